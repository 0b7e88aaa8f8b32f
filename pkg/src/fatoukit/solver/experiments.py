"""Solver-driven experiments: harmonic measure, Martin exponents, periodic bumps."""

from dataclasses import dataclass, field
import math

import numpy as np

from ..errors import RegimeError, ResolutionError
from .diagnostics import oscillation_profile, fit_decay
from .estimators import HomogeneityFit, PLaplaceSolver
from .field import ScalarField
from .grids import SectorGrid, SlabGrid


def _check_p(grid, p):
    if p is not None and abs(float(p) - float(grid.geometry.p)) > 1e-12:
        raise ValueError(f"p={p} differs from the grid geometry p={grid.geometry.p}")


def _ramp(d, r, width):
    """Piecewise-linear indicator of ``d < r`` smeared over ``width``."""
    return np.clip((r - d) / width + 0.5, 0.0, 1.0)


@dataclass
class MeasureResult:
    r: float
    value: float
    nearest: float
    interpolated: float
    field: ScalarField = field(repr=False, default=None)


def _unit_point(grid):
    if isinstance(grid, SectorGrid):
        return np.array([[0.0, 1.0]])
    x = np.zeros((1, grid.geometry.n))
    x[0, -1] = 1.0
    return x


def harmonic_measure(grid, r, p=None, tn=None, **options):
    """p-harmonic measure of the plane ball ``B(0, r)`` seen from ``e_n``.

    On a :class:`SectorGrid` the datum is a mollified indicator of
    ``|x'| < r`` on the whole plane (smeared over one radial cell) and
    ``value = u(e_n)``.  On a :class:`SlabGrid` the indicator is periodized
    with period ``tau`` and smeared over ``h``.  Both the nearest-node and
    the multilinear values are reported; ``value`` is the latter.
    """
    _check_p(grid, p)
    if not r > 0:
        raise ValueError("r must be positive")
    if isinstance(grid, SectorGrid):
        dxi = float(grid.xi[1] - grid.xi[0])
        if dxi > 0.25 or r < 16.0 * grid.r_min or r > grid.r_max / 16.0:
            raise ResolutionError(
                f"r={r} needs 16 r_min <= r <= r_max/16 and a log step <= 1/4 (got {dxi:.3g})")

        def datum(T):
            return _ramp(np.abs(T[:, 0]), r, r * dxi)
    elif isinstance(grid, SlabGrid):
        if r < 4.0 * grid.h:
            raise ResolutionError(f"r={r} below 4h={4 * grid.h}")
        if grid.H < 1.0:
            raise ResolutionError("the slab must reach height 1 to contain e_n")
        tau = grid.tau

        def datum(X):
            d = (X + 0.5 * tau) % tau - 0.5 * tau
            return _ramp(np.linalg.norm(d, axis=1), r, grid.h)
    else:
        raise TypeError(f"unsupported grid type {type(grid).__name__}")
    solver = PLaplaceSolver(tilt=tn, **options).fit(grid, datum)
    fld = solver.field_
    x = _unit_point(grid)
    near = float(fld.nearest(x)[0])
    interp = float(fld.interpolator()(x)[0])
    return MeasureResult(r, interp, near, interp, fld)


def measure_sweep(grid, radii, p=None, tn=None, **options):
    """Harmonic measure at several radii plus the fitted log-log slope.

    Returns ``(results, slope, residual)`` where ``slope`` is the
    least-squares slope of ``log value`` against ``log r``.
    """
    results = [harmonic_measure(grid, r, p, tn, **options) for r in radii]
    fit = HomogeneityFit(min_samples=2, min_span=2.0).fit(
        [m.r for m in results], [m.value for m in results])
    return results, -fit.sigma_, fit.residual_


@dataclass
class MartinResult:
    sigma: float
    residual: float
    radii: np.ndarray
    values: np.ndarray
    field: ScalarField = field(repr=False, default=None)


def martin_fit(grid, r0=1.0, fit_range=(30.0, 3.0e4), p=None, **options):
    """Homogeneity exponent of a Martin-type solution on a sector grid.

    The datum is the bump ``(1 - (|x'|/r0)^2)^2_+`` (a mollified point mass);
    far from the bump the solution is close to a multiple of the Martin
    function, so the decay along the ``e_n`` ray over ``fit_range`` gives
    ``sigma``.
    """
    _check_p(grid, p)
    if not isinstance(grid, SectorGrid):
        raise TypeError("martin_fit needs a SectorGrid")
    lo, hi = fit_range
    if not (grid.r_min < r0 < lo < hi < grid.r_max):
        raise ResolutionError("need r_min < r0 < fit_range[0] < fit_range[1] < r_max")

    def datum(T):
        return np.clip(1.0 - (T[:, 0] / r0) ** 2, 0.0, None) ** 2

    solver = PLaplaceSolver(**options).fit(grid, datum)
    fld = solver.field_
    arr = fld.array()
    j = int(np.argmin(np.abs(grid.phi - math.pi / 2.0)))
    sel = (grid.rho >= lo) & (grid.rho <= hi)
    radii, values = grid.rho[sel], arr[sel, j]
    fit = HomogeneityFit().fit(radii, values)
    return MartinResult(fit.sigma_, fit.residual_, radii, values, fld)


def smooth_bump(x, t):
    """C-infinity bump: 1 on ``|x| <= t/2``, 0 for ``|x| >= t``, values in [0, 1]."""
    y = (np.abs(np.asarray(x, dtype=float)) - 0.5 * t) / (0.5 * t)
    y = np.clip(y, 0.0, 1.0)

    def g(z):
        out = np.zeros_like(z)
        pos = z > 0
        out[pos] = np.exp(-1.0 / z[pos])
        return out

    a, b = g(1.0 - y), g(y)
    return a / (a + b)


@dataclass
class PsiDiagnostics:
    t: float
    xi: float
    shift: float
    b_bar: float
    b_unit: float
    b_small: float
    s_small: float
    ratio: float
    heights: np.ndarray = field(repr=False)
    means: np.ndarray = field(repr=False)
    profile: list = field(repr=False)
    decay_rate: float = None
    theta: float = None


def build_psi(grid, t, p=None, tn=None, s_small=None, **options):
    """Periodic solution with a small product bump as datum.

    Solves with datum ``prod_i a(x_i)`` (``a`` a smooth bump of half-width
    ``t``, extended with period ``tau``), estimates the far-field constant
    ``xi`` from the top level, and normalizes.  Two vertical shifts are
    compared: height ``tau`` and a small height ``s_small``; the returned
    field is ``Psi~ - xi`` and ``diag.shift`` is the shift giving the larger
    ``|b_bar|``, so that ``Psi(x', y) = field(x', y + shift)``.
    """
    _check_p(grid, p)
    if not isinstance(grid, SlabGrid) or grid.cylinder:
        raise TypeError("build_psi needs a half-space SlabGrid (k = n-1)")
    tau = grid.tau
    if not 0 < t <= tau / 8.0:
        raise RegimeError(f"0 < t <= tau/8 violated: t={t}", field="t", inequality="0 < t <= tau/8")
    if grid.h > t / 8.0:
        raise ResolutionError(f"h={grid.h} exceeds t/8={t / 8}")
    if grid.H < 2.0 * tau:
        raise ResolutionError("slab too short to measure the far-field constant")
    s_small = tau / 128.0 if s_small is None else float(s_small)

    def datum(X):
        d = (X + 0.5 * tau) % tau - 0.5 * tau
        return np.prod(smooth_bump(d, t), axis=1)

    solver = PLaplaceSolver(tilt=tn, **options).fit(grid, datum)
    tilde = solver.field_
    heights, rows = tilde.levels()
    means = np.array([float(np.mean(r)) for r in rows])
    xi = means[-1]
    m_unit = float(np.interp(tau, heights, means))
    m_small = float(np.interp(s_small, heights, means))
    b_unit, b_small = m_unit - xi, m_small - xi
    shift, b_bar = (tau, b_unit) if abs(b_unit) >= abs(b_small) else (s_small, b_small)
    psi = ScalarField(tilde.values - xi, grid, tilde.tags, tilde.info)
    prof = oscillation_profile(tilde)
    rate, theta = fit_decay(prof, start=tau / 4.0)
    diag = PsiDiagnostics(t=t, xi=xi, shift=shift, b_bar=b_bar, b_unit=b_unit, b_small=b_small,
                          s_small=s_small, ratio=m_small / m_unit, heights=heights,
                          means=means, profile=prof, decay_rate=rate, theta=theta)
    return psi, diag
