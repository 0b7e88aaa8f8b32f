"""Estimator-style wrappers: the nonlinear solver and the homogeneity fit."""

import math
import warnings

import numpy as np
from sklearn.base import BaseEstimator, RegressorMixin
from sklearn.utils.validation import check_is_fitted

from ..errors import DegenerateFitError
from ..tilted import TiltedNorm
from .engine import SolverOptions, TiltedDensity, minimize
from .field import ScalarField
from .grids import SectorGrid, SlabGrid


def _tilt_vector(grid, tn):
    n = grid.geometry.n
    if tn is None:
        return np.zeros(n if not isinstance(grid, SectorGrid) else 2)
    if not isinstance(tn, TiltedNorm):
        tn = TiltedNorm(tuple(tn), grid.geometry.p)
    if len(tn.a) != n:
        raise ValueError(f"tilt vector must have {n} components, got {len(tn.a)}")
    if abs(float(tn.p) - float(grid.geometry.p)) > 1e-12:
        raise ValueError(f"tilted norm exponent {tn.p} differs from grid exponent {grid.geometry.p}")
    if isinstance(grid, SectorGrid):
        return grid.tilt_plane(tn.vector)
    return tn.vector


class PLaplaceSolver(BaseEstimator):
    """Minimize ``sum_q w_q (|grad u|_eps + <a, grad u>)^p / p`` on a grid.

    ``fit(grid, datum)`` solves for the Dirichlet datum (a callable on the
    plane coordinates or an array of bottom-node values) and stores the
    result in ``field_``; ``predict(X)`` interpolates it at physical points.

    Parameters
    ----------
    tilt : TiltedNorm or sequence, optional
        Perturbation vector ``a``; zero gives the plain p-Laplacian.
    top : {"neumann", "mean"} or float
        Closure at the far end of a slab grid.
    outer : float
        Dirichlet value on the outer arc of a sector grid.
    eps0, eps_final, eps_decay, tol, stage_tol, max_iter :
        Continuation and stopping parameters, see :class:`SolverOptions`.
    """

    def __init__(self, tilt=None, top="neumann", outer=0.0, eps0=1e-1, eps_final=1e-8,
                 eps_decay=0.5, tol=1e-8, stage_tol=1e-5, max_iter=200):
        self.tilt = tilt
        self.top = top
        self.outer = outer
        self.eps0 = eps0
        self.eps_final = eps_final
        self.eps_decay = eps_decay
        self.tol = tol
        self.stage_tol = stage_tol
        self.max_iter = max_iter

    def _options(self):
        return SolverOptions(self.eps0, self.eps_final, self.eps_decay, self.tol,
                             self.stage_tol, self.max_iter)

    def fit(self, grid, datum, guess=None):
        if isinstance(grid, SectorGrid):
            fixed_vals, mode, scale = grid.boundary_values(datum, outer=self.outer)
        elif isinstance(grid, SlabGrid):
            fixed_vals, mode, scale = grid.boundary_values(datum, top=self.top)
        else:
            raise TypeError(f"unsupported grid type {type(grid).__name__}")
        grid.geometry.check_regime()
        a = _tilt_vector(grid, self.tilt)
        problem = grid.problem(fixed_vals, mode)
        density = TiltedDensity(grid.geometry.p, a)
        u, info = minimize(problem, density, scale, self._options(), guess)
        self.field_ = ScalarField(u, grid, grid.tags(), info)
        self.info_ = info
        self.energy_ = info.energy_history[-1] if info.energy_history else 0.0
        return self

    def predict(self, X):
        check_is_fitted(self, "field_")
        return self.field_.interpolator()(X)


def solve(grid, datum, tn=None, top="neumann", **options):
    """Functional form of :class:`PLaplaceSolver`; returns the :class:`ScalarField`."""
    return PLaplaceSolver(tilt=tn, top=top, **options).fit(grid, datum).field_


class HomogeneityFit(RegressorMixin, BaseEstimator):
    """Least-squares fit of ``value ~ C radius^(-sigma)``.

    ``fit(radii, values)`` sets ``sigma_``, ``log_c_`` and ``residual_``
    (root-mean-square residual of the log-log regression).
    """

    def __init__(self, min_samples=5, min_span=8.0):
        self.min_samples = min_samples
        self.min_span = min_span

    def fit(self, radii, values):
        r = np.asarray(radii, dtype=float).ravel()
        v = np.asarray(values, dtype=float).ravel()
        if r.shape != v.shape:
            raise ValueError("radii and values must have the same length")
        if np.any(r <= 0) or np.any(v <= 0) or not np.all(np.isfinite(v)):
            raise DegenerateFitError("radii and values must be positive and finite")
        span = float(r.max() / r.min()) if r.size else 1.0
        if r.size < 2 or span < 2.0:
            raise DegenerateFitError(f"radii span a factor {span:.3g} < 2")
        if r.size < self.min_samples or span < self.min_span:
            warnings.warn(f"homogeneity fit with {r.size} samples over a factor {span:.3g}",
                          stacklevel=2)
        x, y = np.log(r), np.log(v)
        slope, icpt = np.polyfit(x, y, 1)
        self.sigma_ = float(-slope)
        self.log_c_ = float(icpt)
        self.residual_ = float(math.sqrt(np.mean((y - (slope * x + icpt)) ** 2)))
        self.span_ = span
        return self

    def predict(self, radii):
        check_is_fitted(self, "sigma_")
        return np.exp(self.log_c_) * np.asarray(radii, dtype=float) ** (-self.sigma_)


def fit_homogeneity(samples):
    """``sigma`` from ``[(radius, value), ...]``; returns ``(sigma, residual)``."""
    arr = np.asarray(samples, dtype=float)
    if arr.ndim != 2 or arr.shape[1] != 2:
        raise DegenerateFitError("samples must be (radius, value) pairs")
    fit = HomogeneityFit().fit(arr[:, 0], arr[:, 1])
    return fit.sigma_, fit.residual_
