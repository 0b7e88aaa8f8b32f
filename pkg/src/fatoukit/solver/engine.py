"""Damped Newton minimization of discrete tilted-norm energies.

A discrete energy is described by quadrature points ``q``, each with a
weight ``w_q``, a small set of node indices ``idx[q]`` and a local matrix
``M[q]`` (``d x m``) so that the gradient at ``q`` is ``M[q] @ u[idx[q]]``.
"""

from dataclasses import dataclass, field
import logging

import math

import numpy as np
import scipy.sparse as sp
import scipy.sparse.linalg as spla

from ..errors import NonConvergenceError

log = logging.getLogger(__name__)


@dataclass
class SolverOptions:
    """Regularization and stopping parameters.

    ``eps`` starts at ``eps0 * scale`` and is multiplied by ``eps_decay``
    after each converged stage until it is at most ``eps_final * scale``,
    where ``scale`` is the datum's Lipschitz scale.
    """

    eps0: float = 1e-1
    eps_final: float = 1e-8
    eps_decay: float = 0.5
    tol: float = 1e-8
    stage_tol: float = 1e-5
    max_iter: int = 200
    armijo: float = 1e-4

    def validate(self):
        if not (self.eps0 > 0 and self.eps_final > 0 and 0 < self.eps_decay < 1):
            raise ValueError("need eps0 > 0, eps_final > 0 and 0 < eps_decay < 1")
        if not (self.tol > 0 and self.max_iter >= 1):
            raise ValueError("need tol > 0 and max_iter >= 1")
        return self


@dataclass
class SolveInfo:
    eps: float = None
    residual: float = None
    energy_history: list = field(default_factory=list)
    residual_history: list = field(default_factory=list)
    stage_eps: list = field(default_factory=list)
    newton_steps: int = 0
    gradient_steps: int = 0


class TiltedDensity:
    """``f(eta) = (sqrt(|eta|^2 + eps^2) + <a, eta>)^p / p`` and derivatives."""

    def __init__(self, p, a):
        self.p = float(p)
        self.a = np.asarray(a, dtype=float)

    def evaluate(self, eta, eps, order=2):
        p, a = self.p, self.a
        rho = np.sqrt(np.einsum("qi,qi->q", eta, eta) + eps * eps)
        q = rho + eta @ a
        f = q ** p / p
        if order == 0:
            return f, None, None
        Dq = eta / rho[:, None] + a
        qp1 = q ** (p - 1.0)
        f1 = qp1[:, None] * Dq
        if order == 1:
            return f, f1, None
        d = eta.shape[1]
        unit = eta / rho[:, None]
        D2q = (np.eye(d)[None] - unit[:, :, None] * unit[:, None, :]) / rho[:, None, None]
        f2 = (q ** (p - 2.0))[:, None, None] * (
            (p - 1.0) * Dq[:, :, None] * Dq[:, None, :] + q[:, None, None] * D2q)
        return f, f1, f2


class DiscreteEnergy:
    """Quadrature description plus Dirichlet data of one discrete problem."""

    def __init__(self, n_nodes, idx, M, weights, fixed_mask, fixed_values):
        self.n_nodes = int(n_nodes)
        self.idx = np.ascontiguousarray(idx, dtype=np.int64)
        self.M = np.ascontiguousarray(M, dtype=float)
        self.w = np.ascontiguousarray(weights, dtype=float)
        self.fixed = np.asarray(fixed_mask, dtype=bool)
        self.fixed_values = np.asarray(fixed_values, dtype=float)
        self.free = np.nonzero(~self.fixed)[0]
        self._build_pattern()

    @property
    def dim(self):
        return self.M.shape[1]

    def _build_pattern(self):
        # map every local Hessian entry to a slot of the free-free CSR matrix
        nq, m = self.idx.shape
        pos = -np.ones(self.n_nodes, dtype=np.int64)
        pos[self.free] = np.arange(self.free.size)
        rows = pos[self.idx][:, :, None].repeat(m, axis=2)
        cols = pos[self.idx][:, None, :].repeat(m, axis=1)
        keep = (rows >= 0) & (cols >= 0)
        r, c = rows[keep], cols[keep]
        nf = self.free.size
        key = r * nf + c
        uniq, inv = np.unique(key, return_inverse=True)
        self._keep = keep
        self._slot = inv
        self._nnz = uniq.size
        self._indices = (uniq % nf).astype(np.int32)
        counts = np.bincount(uniq // nf, minlength=nf)
        self._indptr = np.concatenate([[0], np.cumsum(counts)]).astype(np.int32)
        self._pos = pos
        self._absM = np.abs(self.M)
        self._MT = np.ascontiguousarray(self.M.transpose(0, 2, 1))

    def gradients(self, u):
        return np.matmul(self.M, u[self.idx][:, :, None])[:, :, 0]

    def energy(self, u, density, eps):
        f, _, _ = density.evaluate(self.gradients(u), eps, order=0)
        return float(self.w @ f)

    def derivatives(self, u, density, eps):
        """Energy, gradient and the absolute-value gradient used for scaling."""
        eta = self.gradients(u)
        f, f1, _ = density.evaluate(eta, eps, order=1)
        energy = float(self.w @ f)
        wf1 = f1 * self.w[:, None]
        local = np.matmul(wf1[:, None, :], self.M)[:, 0]
        grad = np.bincount(self.idx.ravel(), weights=local.ravel(), minlength=self.n_nodes)
        local_abs = np.matmul(np.abs(wf1)[:, None, :], self._absM)[:, 0]
        grad_abs = np.bincount(self.idx.ravel(), weights=local_abs.ravel(), minlength=self.n_nodes)
        return energy, grad, grad_abs

    def hessian(self, u, density, eps):
        """Free-free block of the Hessian as a CSR matrix."""
        _, _, f2 = density.evaluate(self.gradients(u), eps, order=2)
        f2 *= self.w[:, None, None]
        K = np.matmul(self._MT, np.matmul(f2, self.M))
        data = np.bincount(self._slot, weights=K[self._keep], minlength=self._nnz)
        nf = self.free.size
        return sp.csr_matrix((data, self._indices, self._indptr), shape=(nf, nf))

    def initial(self, guess=None):
        u = np.zeros(self.n_nodes) if guess is None else np.array(guess, dtype=float)
        u[self.fixed] = self.fixed_values
        if guess is None and self.fixed.any():
            u[~self.fixed] = float(np.mean(self.fixed_values))
        return u


def _relative_residual(grad, grad_abs, free):
    g = np.max(np.abs(grad[free])) if free.size else 0.0
    scale = np.max(grad_abs[free]) if free.size else 0.0
    if scale == 0.0:
        return 0.0
    return float(g / scale)


def _linear_solve(H, rhs):
    lu = spla.splu(H.tocsc(), permc_spec="MMD_AT_PLUS_A")
    return lu.solve(rhs)


def minimize(problem, density, scale, options=None, guess=None):
    """Continuation in eps with damped Newton at each stage.

    Returns ``(u, info)``.  Raises :class:`NonConvergenceError` when a stage
    exhausts ``max_iter`` iterations.  The iteration runs on ``u / scale``
    (the solution map is 1-homogeneous), so tiny or huge data do not
    underflow ``eps^2``.
    """
    scale = float(scale) if scale > 0 and math.isfinite(scale) else 1.0
    # a power of two keeps the rescaling exact
    unit = math.ldexp(1.0, math.frexp(scale)[1])
    saved = problem.fixed_values
    problem.fixed_values = saved / unit
    try:
        u, info = _minimize_unit(problem, density, scale / unit, options,
                                 None if guess is None else np.asarray(guess, dtype=float) / unit)
    finally:
        problem.fixed_values = saved
    info.eps *= unit
    with np.errstate(over="ignore"):
        factor = np.power(unit, density.p)
    info.energy_history = [float(e * factor) for e in info.energy_history]
    return u * unit, info


def _minimize_unit(problem, density, scale, options, guess):
    opts = (options or SolverOptions()).validate()
    info = SolveInfo()
    u = problem.initial(guess)
    free = problem.free
    if free.size == 0:
        info.eps = opts.eps_final * scale
        info.residual = 0.0
        return u, info
    eps = opts.eps0 * scale
    eps_stop = opts.eps_final * scale
    total_iter = 0
    while True:
        final = eps <= eps_stop * (1.0 + 1e-12)
        tol = opts.tol if final else max(opts.stage_tol, opts.tol)
        info.stage_eps.append(eps)
        converged = False
        while total_iter < opts.max_iter:
            E, grad, grad_abs = problem.derivatives(u, density, eps)
            res = _relative_residual(grad, grad_abs, free)
            info.energy_history.append(E)
            info.residual_history.append(res)
            if res <= tol:
                converged = True
                break
            g = grad[free]
            H = problem.hessian(u, density, eps)
            try:
                d = -_linear_solve(H, g)
                slope = float(g @ d)
                if not np.all(np.isfinite(d)) or slope >= 0.0:
                    raise ValueError("not a descent direction")
                kind = "newton"
            except (RuntimeError, ValueError):
                diag = H.diagonal()
                diag[diag <= 0] = 1.0
                d = -g / diag
                slope = float(g @ d)
                kind = "gradient"
            alpha = 1.0
            trial = u.copy()
            accepted = False
            for _ in range(60):
                trial[free] = u[free] + alpha * d
                Et = problem.energy(trial, density, eps)
                if Et <= E + opts.armijo * alpha * slope:
                    accepted = True
                    break
                if abs(Et - E) <= 1e-13 * max(abs(E), 1e-300):
                    # energy change below rounding: judge the step by the residual
                    _, gt, gat = problem.derivatives(trial, density, eps)
                    if _relative_residual(gt, gat, free) < res:
                        accepted = True
                        break
                alpha *= 0.5
            total_iter += 1
            if not accepted:
                # no decrease representable in floating point: stationary to rounding
                if abs(slope) <= 1e-13 * max(abs(E), 1e-300):
                    converged = True
                    break
                raise NonConvergenceError(
                    f"line search failed at eps={eps:.3g}, residual={res:.3g}",
                    history=info.residual_history)
            u = trial
            if kind == "newton":
                info.newton_steps += 1
            else:
                info.gradient_steps += 1
        if not converged:
            raise NonConvergenceError(
                f"no convergence within {opts.max_iter} iterations at eps={eps:.3g}",
                history=info.residual_history)
        if final:
            break
        eps = max(eps * opts.eps_decay, eps_stop)
    info.eps = eps
    info.residual = info.residual_history[-1]
    return u, info
