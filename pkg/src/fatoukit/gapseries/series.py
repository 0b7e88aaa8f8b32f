"""Gap series on a periodic grid: quasi-orthogonality, maximal sums and damping.

Grid: ``x = i/N`` on the unit torus in each of ``k`` coordinates.  The
cubes of level ``m`` are ``prod [c/T_m, (c+1)/T_m)``; with ``T_m | T_j``
they nest exactly.  A level is *resolved* when ``16 T_m <= N``; then cube
extremes are taken over the grid nodes inside each cube.  On unresolved
levels a cube is smaller than a grid cell, and its extremes are replaced
by the value of the coarser partial sum at the node plus the extreme of
the new term over a full period (``subgrid="surrogate"``).
"""

from dataclasses import dataclass, field
import math
from typing import NamedTuple

import numpy as np
from scipy import ndimage

from ..errors import ResolutionError, ThresholdLogicError
from .waves import check_coefficients

VARIANTS = ("bounded-divergent", "positive-vanishing")


def _check_subgrid(subgrid):
    if subgrid not in ("error", "surrogate"):
        raise ValueError("subgrid must be 'error' or 'surrogate'")


def _resolved(T, N):
    return 16 * int(T) <= N


class QuasiResult(NamedTuple):
    integral: float
    bound: float
    error: float

    @property
    def holds(self):
        return abs(self.integral) <= self.bound + self.error


def _factor_product_integral(wave, Tm, Tj, N):
    fm = wave.sample_factor(Tm, N)
    fj = wave.sample_factor(Tj, N)
    return float(np.mean(fm * fj))


def quasi_orthogonality(wave, plan, m, j, resolution=1 << 16):
    """``int_Q psi(T_m x) psi(T_j x) dx`` and the bound ``k^(1/2) T_m/T_j``.

    The integral uses the ``N``-point periodic rule per coordinate (exact
    for trigonometric polynomials of degree below ``N``); ``error`` is the
    change against the ``N/2``-point rule.  For ``m = j`` the squared
    L2 norm is returned with an infinite bound.
    """
    N = int(resolution)
    if not 1 <= m <= j <= plan.J:
        raise ValueError("need 1 <= m <= j <= J")
    Tm, Tj = plan[m], plan[j]
    if not _resolved(Tj, N):
        raise ResolutionError(f"resolution {N} below 16 T_j = {16 * Tj}")
    b = wave.b_bar
    k = wave.k

    def integral(n):
        one = _factor_product_integral(wave, Tm, Tj, n)
        # int Psi0(T x) over the cube equals b_bar for integer T
        return one ** k - b * b

    val = integral(N)
    err = abs(val - integral(N // 2)) if _resolved(Tj, N // 2) else 0.0
    bound = math.inf if m == j else math.sqrt(k) * Tm / Tj
    return QuasiResult(val, bound, err)


def _terms(wave, plan, J, N, centered):
    for j in range(1, J + 1):
        yield j, plan[j], wave.sample(plan[j], N, centered=centered)


@dataclass
class MaximalReport:
    weak_constant: float
    l2_ratio: float
    l2_bound: float
    s_star_max: float
    chi_hat: float
    resolved_levels: int


def maximal_stats(wave, plan, coeffs, resolution=1 << 16, subgrid="error"):
    """Partial sums ``s_l = sum a_j psi_j`` and their maximal function.

    ``weak_constant = sup_lambda lambda^2 |{s* > lambda}| / chi_hat^2`` over
    the grid; ``l2_ratio = sup_l mean(s_l^2) / chi_hat^2`` is compared with
    ``l2_bound = 3 k^(1/2)``.
    """
    _check_subgrid(subgrid)
    N = int(resolution)
    J = min(plan.J, coeffs.J)
    if subgrid == "error" and not _resolved(plan[J], N):
        raise ResolutionError(f"resolution {N} below 16 T_J = {16 * plan[J]}")
    k = wave.k
    s = np.zeros((N,) * k)
    s_star = np.zeros_like(s)
    l2 = 0.0
    for j, _, psi in _terms(wave, plan, J, N, True):
        s = s + coeffs.a[j - 1] * psi
        s_star = np.maximum(s_star, np.abs(s))
        l2 = max(l2, float(np.mean(s * s)))
    chi2 = coeffs.chi_hat ** 2
    if chi2 == 0:
        return MaximalReport(0.0, 0.0, 3.0 * math.sqrt(k), float(s_star.max()), 0.0,
                             sum(_resolved(plan[j], N) for j in range(1, J + 1)))
    v = np.sort(s_star.ravel())[::-1]
    frac = np.arange(1, v.size + 1) / v.size
    weak = float(np.max(v * v * frac)) / chi2
    return MaximalReport(weak, l2 / chi2, 3.0 * math.sqrt(k), float(s_star.max()),
                         coeffs.chi_hat, sum(_resolved(plan[j], N) for j in range(1, J + 1)))


class _Cubes:
    """Cube bookkeeping for one resolved level."""

    def __init__(self, T, N, k):
        T = int(T)
        axis = (np.arange(N, dtype=np.int64) * T) // N
        ids = axis
        for _ in range(k - 1):
            ids = np.add.outer(ids * T, axis)
        self.ids = ids.ravel()
        self.count = T ** k
        self.order = np.argsort(self.ids, kind="stable")
        sorted_ids = self.ids[self.order]
        self.starts = np.concatenate([[0], np.nonzero(np.diff(sorted_ids))[0] + 1])
        self.present = sorted_ids[self.starts]

    def reduce(self, values, fn):
        """Per-node value of ``fn`` over the node's cube."""
        red = fn.reduceat(values.ravel()[self.order], self.starts)
        per_cube = np.empty(self.count)
        per_cube[self.present] = red
        return per_cube[self.ids].reshape(values.shape)

    def uniform(self, mask):
        m = mask.ravel().astype(np.int8)
        hi = np.maximum.reduceat(m[self.order], self.starts)
        lo = np.minimum.reduceat(m[self.order], self.starts)
        return bool(np.all(hi == lo))

    def members(self, mask):
        return sorted(set(int(c) for c in self.ids[mask.ravel()]))


def _unresolved_members(mask, T, N, k):
    idx = np.argwhere(mask)
    return sorted(tuple((int(T) * int(i)) // N for i in row) if k > 1 else (int(T) * int(row[0])) // N
                  for row in idx)


def _theta_kernel(eps, h, k):
    """Discrete ``(1 - |2y|^2)^4`` bump of radius ``eps/2``, unit sum."""
    r = int(math.floor(0.5 * eps / h))
    off = np.arange(-r, r + 1) * h
    grids = np.meshgrid(*([off] * k), indexing="ij")
    y2 = sum(g * g for g in grids) / (eps * eps)
    w = np.clip(1.0 - 4.0 * y2, 0.0, None) ** 4
    return w / w.sum()


def _periodic_distance(mask, h):
    """Euclidean distance (physical units) from every node to the nearest masked node."""
    k = mask.ndim
    N = mask.shape[0]
    tiled = np.tile(~mask, (3,) * k)
    d = ndimage.distance_transform_edt(tiled)
    sl = tuple(slice(N, 2 * N) for _ in range(k))
    return d[sl] * h


def _periodic_convolve(field_, kernel):
    if kernel.size == 1:
        return field_.astype(float)
    N = field_.shape[0]
    k = field_.ndim
    r = kernel.shape[0] // 2
    full = np.zeros(field_.shape)
    # place the kernel centred at the origin with wrap-around
    idx = np.indices(kernel.shape).reshape(k, -1).T - r
    full[tuple((idx % N).T)] = kernel.ravel()
    return np.real(np.fft.ifftn(np.fft.fftn(field_.astype(float)) * np.fft.fftn(full)))


def damping_factor(E, T, N, k):
    """``zeta`` for the flagged node set ``E`` at scale ``T`` (resolved level).

    Zero on ``E``, one at distance ``>= 1/(4T)``, values in ``[0, 1]``, and a
    mollification of the indicator of ``{dist >= 1/(8T)}`` in between.
    """
    if not E.any():
        return np.ones(E.shape)
    h = 1.0 / N
    d = _periodic_distance(E, h)
    F2 = d >= 1.0 / (8.0 * T)
    eps = 1.0 / (16.0 * math.sqrt(k) * T)
    zeta = _periodic_convolve(F2, _theta_kernel(eps, h, k))
    zeta = np.clip(zeta, 0.0, 1.0)
    zeta[E] = 0.0
    zeta[d >= 1.0 / (4.0 * T)] = 1.0
    return zeta


def discrete_lipschitz(f, N):
    lip = 0.0
    for a in range(f.ndim):
        lip = max(lip, float(np.max(np.abs(np.roll(f, -1, axis=a) - f))) * N)
    return lip


@dataclass
class DampingState:
    """Damping sequence, stopping families and partial sums of one construction.

    ``sigma[m-1]`` is ``sigma_m`` (bounded-divergent) or ``sigma~_m``
    (positive-vanishing); ``s[m-1]`` is ``s_m`` or ``s~_m`` respectively.
    ``families`` maps ``(family, i, level)`` to the sorted cube indices of
    that family; ``family_sizes[level]`` counts them per family name.
    """

    plan: object
    wave: object
    coeffs: object
    variant: str
    N: int
    L: list = field(repr=False)
    sigma: list = field(repr=False)
    s: list = field(repr=False)
    families: dict = field(default_factory=dict, repr=False)
    family_sizes: list = field(default_factory=list)
    resolved: list = field(default_factory=list)
    lip_constants: list = field(default_factory=list)

    @property
    def J(self):
        return len(self.sigma)

    def sup_norms(self):
        return [float(np.max(np.abs(s))) for s in self.sigma]

    def ratio_bounds(self):
        """``(min, max)`` of ``L_{j+1}/L_j`` over all nodes and levels."""
        lo, hi = 1.0, 1.0
        for a, b in zip(self.L, self.L[1:]):
            r = b / a
            lo, hi = min(lo, float(r.min())), max(hi, float(r.max()))
        return lo, hi


def _family_pass(name, crit_fn, i_values, stopped, level_cubes, resolved, j, T, N, k,
                 taken, families, E):
    """Flag cubes meeting ``crit_fn(i)`` that are not inside an earlier cube of the family."""
    count = 0
    for i in i_values:
        key = (name, i)
        prev = stopped.get(key)
        q = crit_fn(i)
        if prev is not None:
            q &= ~prev
        q &= ~taken.get(i, np.zeros_like(q))
        if not q.any():
            continue
        if resolved and not level_cubes.uniform(q):
            raise ThresholdLogicError(
                f"family {name}, i={i}, level {j}: membership differs inside one cube")
        members = level_cubes.members(q) if resolved else _unresolved_members(q, T, N, k)
        families[(name, i, j)] = members
        count += len(members)
        stopped[key] = q if prev is None else (prev | q)
        taken[i] = taken.get(i, np.zeros_like(q)) | q
        E |= q
    return count


def build_damping(wave, plan, coeffs, variant="bounded-divergent", resolution=1 << 16,
                  subgrid="error", i_max=64):
    """Damping factors ``L_j`` and the damped partial sums.

    bounded-divergent: stopping cubes ``K_i`` where ``|s_l|`` first exceeds
    ``8 k^(1/2) i chi_hat``; ``sigma_m = sum a_j L_j psi~_j``.
    positive-vanishing: families ``K`` (``max s~_m > i``), ``F``
    (``min sigma~_j < 2^-i``) and ``H`` (``min s~_j < -2^i/(i+1)`` and
    ``max L_j > 2^-i``), scanned in that order; ``sigma~_m = 1 + sum a_j L_j psi~_j``.
    Flagged cubes of level ``j`` form the set where ``L_{j+1} = L_j / 2``.
    """
    if variant not in VARIANTS:
        raise ValueError(f"variant must be one of {VARIANTS}")
    _check_subgrid(subgrid)
    check_coefficients(coeffs, variant)
    N = int(resolution)
    J = min(plan.J, coeffs.J)
    if subgrid == "error" and not _resolved(plan[J], N):
        raise ResolutionError(f"resolution {N} below 16 T_J = {16 * plan[J]}")
    k = wave.k
    shape = (N,) * k
    lo, hi = wave.value_range
    b = wave.b_bar
    chi = coeffs.chi_hat
    positive = variant == "positive-vanishing"

    L = [np.ones(shape)]
    sig = []
    ssum = []
    s_prev = np.zeros(shape)
    sig_prev = np.ones(shape) if positive else np.zeros(shape)
    stopped = {}
    families = {}
    sizes = []
    res_flags = []
    lips = []
    for j in range(1, J + 1):
        T = plan[j]
        a = coeffs.a[j - 1]
        Lj = L[-1]
        psi_t = wave.sample(T, N)
        resolved = _resolved(T, N)
        res_flags.append(resolved)
        cubes = _Cubes(T, N, k) if resolved else None
        if positive:
            s_new = s_prev + a * psi_t
            add = a * Lj * psi_t
        else:
            s_new = s_prev + a * (psi_t - b)
            add = a * Lj * psi_t
        sig_new = sig_prev + add
        taken = {}
        E = np.zeros(shape, dtype=bool)
        count = {}
        if positive:
            if resolved:
                s_max = cubes.reduce(s_new, np.maximum)
                s_min = cubes.reduce(s_new, np.minimum)
                g_min = cubes.reduce(sig_new, np.minimum)
                L_max = cubes.reduce(Lj, np.maximum)
            else:
                s_max = s_prev + max(a * lo, a * hi)
                s_min = s_prev + min(a * lo, a * hi)
                g_min = sig_prev + np.minimum(a * Lj * lo, a * Lj * hi)
                L_max = Lj
            top = int(min(i_max, max(0, math.floor(float(s_max.max())))))
            count["K"] = _family_pass("K", lambda i: s_max > i, range(1, top + 1), stopped,
                                      cubes, resolved, j, T, N, k, taken, families, E)
            count["F"] = _family_pass("F", lambda i: g_min < 2.0 ** -i, range(1, i_max + 1),
                                      stopped, cubes, resolved, j, T, N, k, taken, families, E)
            count["H"] = _family_pass(
                "H", lambda i: (s_min < -(2.0 ** i) / (i + 1)) & (L_max > 2.0 ** -i),
                range(1, i_max + 1), stopped, cubes, resolved, j, T, N, k, taken, families, E)
        else:
            if resolved:
                s_abs = cubes.reduce(np.abs(s_new), np.maximum)
            else:
                s_abs = np.maximum(np.abs(s_prev + a * (lo - b)), np.abs(s_prev + a * (hi - b)))
            thr = 8.0 * math.sqrt(k) * chi
            top = int(min(i_max, math.floor(float(s_abs.max()) / thr))) if thr > 0 else 0
            count["K"] = _family_pass("K", lambda i: s_abs > thr * i, range(1, top + 1), stopped,
                                      cubes, resolved, j, T, N, k, taken, families, E)
        sizes.append(count)
        sig.append(sig_new)
        ssum.append(s_new)
        s_prev, sig_prev = s_new, sig_new
        if j < J:
            if not E.any():
                zeta = np.ones(shape)
            elif resolved:
                zeta = damping_factor(E, T, N, k)
            else:
                zeta = np.where(E, 0.0, 1.0)
            L_next = 0.5 * (zeta + 1.0) * Lj
            L.append(L_next)
            lips.append(discrete_lipschitz(L_next, N) / T)
    return DampingState(plan, wave, coeffs, variant, N, L, sig, ssum, families, sizes,
                        res_flags, lips)


@dataclass
class DivergenceReport:
    variant: str
    threshold: float
    rows: list
    trend: list


def divergence_statistics(state, threshold=None, m=1, quantiles=(0.1, 0.5, 0.9)):
    """Finite-grid divergence/vanishing diagnostics.

    bounded-divergent: for each start index ``m'`` the rows hold
    ``(m', fraction of nodes with tail oscillation > threshold, median tail
    oscillation)`` where the tail oscillation is ``max - min`` of
    ``sigma_l`` over ``m' <= l <= J``; ``trend`` is the median tail
    oscillation from index ``m`` truncated at ``J' = m..J``.
    positive-vanishing: rows ``(m', q_1, q_2, ...)`` of quantiles of
    ``sigma~_m'``; ``trend`` is the median of ``sigma~_J'`` for each ``J'``.
    """
    sig = state.sigma
    J = len(sig)
    if state.variant == "bounded-divergent":
        thr = abs(state.wave.b_bar) / 4.0 if threshold is None else float(threshold)
        rows = []
        hi = sig[-1].copy()
        lo = sig[-1].copy()
        tails = [None] * J
        for mm in range(J, 0, -1):
            hi = np.maximum(hi, sig[mm - 1])
            lo = np.minimum(lo, sig[mm - 1])
            tails[mm - 1] = hi - lo
        for mm in range(1, J + 1):
            t = tails[mm - 1]
            rows.append((mm, float(np.mean(t > thr)), float(np.median(t))))
        trend = []
        hi = sig[m - 1].copy()
        lo = sig[m - 1].copy()
        for jj in range(m, J + 1):
            hi = np.maximum(hi, sig[jj - 1])
            lo = np.minimum(lo, sig[jj - 1])
            trend.append(float(np.median(hi - lo)))
        return DivergenceReport(state.variant, thr, rows, trend)
    rows = [(mm,) + tuple(float(v) for v in np.quantile(sig[mm - 1], quantiles))
            for mm in range(1, J + 1)]
    trend = [float(np.median(s)) for s in sig]
    return DivergenceReport(state.variant, float("nan") if threshold is None else threshold,
                            rows, trend)
