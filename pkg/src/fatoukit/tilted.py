"""Calculus of the tilted norm ``q(eta) = |eta| + <a, eta>`` and ``f = q**p / p``.

The profiles here are the bumped versions ``u = s**beta_t r**-(lambda_t+beta_t)``
with ``beta_t = (1+delta) beta`` and ``lambda_t = (1+delta) lambda``.
"""

from dataclasses import dataclass
import math
import numbers

import numpy as np

from ._fd import normalized_divergence
from .errors import NotFoundError, RegimeError, StepTooLargeError
from .exponents import Geometry, compute_exponents
from .profiles import RadialProfile, divergence_st, gradient_st, hessian_st

__all__ = [
    "TiltedNorm",
    "AHarmonicProfile",
    "ETerms",
    "ThresholdReport",
    "q_calculus",
    "divergence_tilted",
    "subsolution_threshold",
    "delta_for_target",
    "grid_subsolution_check",
    "measured_threshold",
    "halfspace_w_functions",
    "halfspace_w_derivatives",
    "baseline_sign_sum",
    "lemma616_scan",
    "n0_derivative_bound",
    "fd_tilted_oracle",
]

DIRECTION_PRESETS = ("plus", "minus", "orthogonal")


@dataclass(frozen=True)
class TiltedNorm:
    """Perturbation vector ``a`` (``|a| < 1``) and exponent ``p``."""

    a: tuple
    p: numbers.Real

    def __post_init__(self):
        a = tuple(float(v) for v in np.ravel(self.a))
        object.__setattr__(self, "a", a)
        if not math.sqrt(sum(v * v for v in a)) < 1.0:
            raise RegimeError(f"|a| < 1 violated: |a| = {self.norm}", field="a",
                              inequality="|a| < 1")
        if not self.p > 1:
            raise RegimeError(f"p > 1 violated: p={self.p}", field="p", inequality="p > 1")

    @classmethod
    def zero(cls, n, p):
        return cls((0.0,) * n, p)

    @property
    def vector(self):
        return np.array(self.a)

    @property
    def norm(self):
        return float(np.linalg.norm(self.a))

    def split(self, k):
        """``(|a'|, |a''|)`` for the first ``k`` and remaining coordinates."""
        v = self.vector
        return float(np.linalg.norm(v[:k])), float(np.linalg.norm(v[k:]))

    def q(self, eta):
        eta = np.asarray(eta, dtype=float)
        return np.linalg.norm(eta, axis=-1) + eta @ self.vector

    def flux(self, eta):
        """``Df(eta) = q^(p-1) Dq`` row-wise."""
        eta = np.asarray(eta, dtype=float)
        norm = np.linalg.norm(eta, axis=-1, keepdims=True)
        q = norm[..., 0] + eta @ self.vector
        return (q ** (float(self.p) - 1.0))[..., None] * (eta / norm + self.vector)


@dataclass(frozen=True)
class AHarmonicProfile:
    """Bumped profile; ``delta >= 0`` and ``lam >= chi``."""

    geometry: Geometry
    delta: numbers.Real
    lam: numbers.Real

    def __post_init__(self):
        if not self.delta >= 0:
            raise RegimeError(f"delta >= 0 violated: {self.delta}", field="delta",
                              inequality="delta >= 0")
        chi = float(compute_exponents(self.geometry).chi)
        if not float(self.lam) >= chi - 1e-12:
            raise RegimeError(f"lambda >= chi violated: lambda={self.lam}, chi={chi}",
                              field="lambda", inequality="lambda >= chi")

    @property
    def beta(self):
        return compute_exponents(self.geometry).beta

    @property
    def chi(self):
        return compute_exponents(self.geometry).chi

    @property
    def beta_t(self):
        return (1 + self.delta) * self.beta

    @property
    def lambda_t(self):
        return (1 + self.delta) * self.lam

    @property
    def radial(self):
        return RadialProfile(self.geometry, self.beta_t, self.lambda_t)


@dataclass(frozen=True)
class ETerms:
    main: float
    E1: float
    E2: float
    E3: float
    E4: float

    @property
    def total(self):
        return self.main + self.E1 + self.E2 + self.E3 + self.E4


@dataclass(frozen=True)
class ThresholdReport:
    bound: float
    lemma_k1_bound: float = None
    halfplane_bound: float = None
    norm_a: float = 0.0

    @property
    def certified(self):
        return self.norm_a < self.bound


def q_calculus(tn, eta):
    """Return ``(q, Dq, D2q)`` at a nonzero ``eta``."""
    eta = np.asarray(eta, dtype=float)
    norm = float(np.linalg.norm(eta))
    if norm == 0.0:
        raise RegimeError("eta must be nonzero", field="eta", inequality="eta != 0")
    unit = eta / norm
    a = tn.vector
    q = norm + float(unit @ a) * norm
    Dq = unit + a
    D2q = (np.eye(eta.size) - np.outer(unit, unit)) / norm
    return q, Dq, D2q


def _cosines(tn, k, cos_prime, cos_dprime):
    ap, app = tn.split(k)
    presets = {"plus": (ap, app), "minus": (-ap, -app), "orthogonal": (0.0, 0.0)}
    if isinstance(cos_prime, str):
        if cos_prime not in presets:
            raise ValueError(f"unknown direction preset {cos_prime!r}")
        c1 = presets[cos_prime][0]
    else:
        c1 = float(cos_prime)
    if cos_dprime is None:
        c2 = presets[cos_prime][1] if isinstance(cos_prime, str) else 0.0
    elif isinstance(cos_dprime, str):
        c2 = presets[cos_dprime][1]
    else:
        c2 = float(cos_dprime)
    slack = 1e-12
    if abs(c1) > ap + slack or abs(c2) > app + slack:
        raise RegimeError("direction cosines exceed |a'| or |a''|", field="cosines",
                          inequality="|<w',a'>| <= |a'|, |<w'',a''>| <= |a''|")
    return c1, c2, ap * ap, app * app


def divergence_tilted(tn, prof, s, t, cos_prime="plus", cos_dprime=None):
    """Split ``q^(2-p)(grad u) div(Df(grad u))`` into the main term and E1..E4.

    ``cos_prime`` and ``cos_dprime`` are ``<w', a'>`` and ``<w'', a''>`` for
    the unit directions ``w' = x'/t``, ``w'' = x''/s``; pass numbers or one of
    the presets ``"plus"``, ``"minus"``, ``"orthogonal"``.  A string for
    ``cos_prime`` alone sets both.
    """
    radial = prof.radial if isinstance(prof, AHarmonicProfile) else prof
    g = radial.geometry
    n, k, p = g.n, g.k, float(g.p)
    if abs(float(tn.p) - p) > 1e-12:
        raise RegimeError(f"tilt exponent {tn.p} differs from geometry p={g.p}", field="p",
                          inequality="tilt p = geometry p")
    c1, c2, ap2, app2 = _cosines(tn, k, cos_prime, cos_dprime)
    main = divergence_st(radial, s, t)
    s = np.asarray(s, dtype=float)
    t = np.asarray(t, dtype=float)
    u, u_t, u_s, grad = gradient_st(radial, s, t)
    u_tt, u_st, u_ss = hessian_st(radial, s, t)
    lam, bet = float(radial.lambda_t), float(radial.beta_t)
    r2 = s * s + t * t
    ut_over_t = -(lam + bet) * u / r2
    us_over_s = u_s / s
    a_nu = (c1 * u_t + c2 * u_s) / grad
    hess_nn = (u_t * u_t * u_tt + 2.0 * u_t * u_s * u_st + u_s * u_s * u_ss) / (grad * grad)
    E1 = -a_nu * hess_nn
    E2 = 2.0 * (p - 1.0) * ((u_s * u_st + u_tt * u_t) * c1 + (u_t * u_st + u_ss * u_s) * c2) / grad
    E3 = (p - 1.0) * (ut_over_t * ap2 + (u_tt - ut_over_t) * c1 * c1 + 2.0 * c1 * c2 * u_st
                      + us_over_s * app2 + (u_ss - us_over_s) * c2 * c2)
    laplace = (k - 1) * ut_over_t + u_tt + (n - k - 1) * us_over_s + u_ss
    E4 = a_nu * laplace
    if np.ndim(main) == 0:
        return ETerms(float(main), float(E1), float(E2), float(E3), float(E4))
    return ETerms(main, E1, E2, E3, E4)


def delta_for_target(g):
    """delta with ``(1+delta) chi = 1 - (p-2)/(4(p-1))``."""
    p = float(g.p)
    chi = float(compute_exponents(g).chi)
    return (1.0 - (p - 2.0) / (4.0 * (p - 1.0))) / chi - 1.0


def subsolution_threshold(tn, prof):
    """Certified bound on ``|a|`` plus the two simplified bounds when they apply."""
    if not prof.delta > 0:
        raise RegimeError("delta > 0 required: no threshold exists at delta = 0",
                          field="delta", inequality="delta > 0")
    g = prof.geometry
    g.check_regime()
    n, k, p = g.n, g.k, float(g.p)
    lt, bt = float(prof.lambda_t), float(prof.beta_t)
    d = float(prof.delta)
    chi, beta = float(prof.chi), float(prof.beta)
    num = 0.25 * (p - 1.0) * min(lt * lt * (lt + bt) * d * chi, bt ** 3 * d * beta)
    den = (lt * lt + bt * bt) * ((30.0 * (p - 1.0) + 10.0 * (n + k)) * (lt + bt + 1.0) ** 2)
    bound = num / den
    k1 = None
    if k == 1 and n >= 3 and p > n - 1:
        k1 = (p - 2.0) * min((p + 1.0 - n) ** 4, 1.0) / (100000.0 * (p - 1.0))
    half = None
    if n == 2 and p >= 2:
        half = (p - 2.0) / (100000.0 * (p - 1.0))
    return ThresholdReport(bound=min(bound, 1.0), lemma_k1_bound=k1, halfplane_bound=half,
                           norm_a=tn.norm)


def _sphere_points(n_points, s_min=1e-4):
    theta = np.linspace(math.asin(s_min), math.pi / 2.0, n_points)
    return np.sin(theta), np.cos(theta)


def grid_subsolution_check(tn, prof, n_points=10_000, n_dirs=5):
    """Minimum of the total over unit-sphere points and direction cosines.

    Points are ``(s, t) = (sin th, cos th)``; cosines range over an
    ``n_dirs x n_dirs`` grid of ``[-|a'|, |a'|] x [-|a''|, |a''|]``
    including all corners.  Returns ``(min_total, argmin)``.
    """
    s, t = _sphere_points(n_points)
    ap, app = tn.split(prof.geometry.k)
    best = (math.inf, None)
    for c1 in np.linspace(-ap, ap, n_dirs):
        for c2 in np.linspace(-app, app, n_dirs):
            tot = divergence_tilted(tn, prof, s, t, c1, c2).total
            i = int(np.argmin(tot))
            if tot[i] < best[0]:
                best = (float(tot[i]), (float(s[i]), float(t[i]), float(c1), float(c2)))
    return best


def measured_threshold(prof, direction, n_points=2000, hi=0.999, iters=40):
    """Largest ``|a|`` along unit ``direction`` passing the grid check (bisection)."""
    direction = np.asarray(direction, dtype=float)
    direction = direction / np.linalg.norm(direction)
    p = prof.geometry.p

    def ok(m):
        return grid_subsolution_check(TiltedNorm(m * direction, p), prof, n_points)[0] >= 0.0

    lo = 0.0
    if ok(hi):
        return hi
    for _ in range(iters):
        mid = 0.5 * (lo + hi)
        if ok(mid):
            lo = mid
        else:
            hi = mid
    return lo


def _check_w_args(p, n, lam, b, w):
    w = np.asarray(w, dtype=float)
    if np.any((w < 0) | (w > 1)):
        raise RegimeError("w must lie in [0, 1]", field="w", inequality="0 <= w <= 1")
    if not abs(b) < 1:
        raise RegimeError(f"|b| < 1 violated: b={b}", field="b", inequality="|b| < 1")
    if not p >= 2:
        raise RegimeError(f"p >= 2 violated: p={p}", field="p", inequality="p >= 2")
    if not lam > 0:
        raise RegimeError(f"lambda > 0 violated: {lam}", field="lambda", inequality="lambda > 0")
    return w


def halfspace_w_functions(p, n, lam, b, w):
    """``(G, F1, F2, F3, F4)`` on the unit sphere of the half-space, ``w = s^2``.

    They are the main term and E1..E4 for ``beta = 1``, ``delta = 0`` and
    ``a = b e_n``, each divided by ``s (lambda + 1)``.
    """
    w = _check_w_args(p, n, lam, b, w)
    d = (lam * lam - 1.0) * w + 1.0
    G = ((p - 1.0) * (lam - (n - 1.0) / (p - 1.0)) * lam * lam * w
         + (2.0 * p - 3.0) * (lam - (p + n - 3.0) / (2.0 * p - 3.0)) * (1.0 - w)) / d
    F1 = b * ((lam + 1.0) * w - 1.0) * ((lam ** 3 - 2.0 * lam + 1.0) * w + 2.0 * lam - 1.0) / d ** 1.5
    F2 = 2.0 * (p - 1.0) * b * (lam - 2.0 - w * (lam + 2.0) * (lam - 1.0)) / np.sqrt(d)
    F3 = (p - 1.0) * b * b * (-3.0 + w * (3.0 + lam))
    F4 = b * (1.0 - (lam + 1.0) * w) / np.sqrt(d) * (lam + 1.0 - n)
    return G, F1, F2, F3, F4


def halfspace_w_derivatives(p, n, b, w):
    """``(dG/dw, dF2/dw, dF3/dw)`` at ``lambda = n - 1``."""
    w = _check_w_args(p, n, n - 1.0, b, w)
    m = n * (n - 2.0) * w + 1.0
    dG = (p - 2.0) * (-n ** 3 + 4.0 * n * n - 5.0 * n + 2.0) / (m * m)
    dF2 = (p - 1.0) * (-b * (n + 1.0) * n * (n - 2.0) ** 2 * w
                       - b * (n - 2.0) * (n * n - n + 2.0)) / m ** 1.5
    dF3 = (p - 1.0) * (n + 2.0) * b * b * np.ones_like(w)
    return dG, dF2, dF3


def baseline_sign_sum(b, w):
    """``F1 + F2 + F3`` for ``n = p = 2``, ``lambda = 1`` in factored form."""
    w = np.asarray(w, dtype=float)
    return b * (2.0 * w - 3.0 + (4.0 * w - 3.0) * b)


def w_grid(n_points=10_000, n=None):
    """Uniform grid of [0, 1] plus the split point ``1/n`` when given."""
    w = np.linspace(0.0, 1.0, n_points)
    extra = [0.0, 1.0] + ([1.0 / n] if n else [])
    return np.union1d(w, extra)


def lemma616_scan(b, p, n_max=1000, n_min=2, n_points=10_000, margin=1e-3):
    """Smallest ``n`` where the half-space profile is a subsolution for the tilt ``b e_n``.

    Positivity of the full sum is required on the w-grid at
    ``lambda = n - 1`` and at ``lambda = (n - 1)(1 - margin)``.
    """
    if not 0 < b < 1:
        raise RegimeError(f"0 < b < 1 violated: b={b}", field="b", inequality="0 < b < 1")
    if not (p - 2.0) / (p - 1.0) > 2.0 * b - b * b:
        raise RegimeError(
            f"(p-2)/(p-1) > 2b - b^2 violated: {(p - 2.0) / (p - 1.0):.6g} <= {2 * b - b * b:.6g}",
            field="b", inequality="(p-2)/(p-1) > 2b - b^2")
    for n in range(n_min, n_max + 1):
        w = w_grid(n_points, n)
        ok = True
        for lam in (n - 1.0, (n - 1.0) * (1.0 - margin)):
            if lam <= 0:
                ok = False
                break
            if float(np.min(sum(halfspace_w_functions(p, n, lam, b, w)))) <= 0.0:
                ok = False
                break
        if ok:
            return n
    raise NotFoundError(f"no n <= {n_max} passes for b={b}, p={p}", last_scanned=n_max)


def n0_derivative_bound(b, p, n_max=2000, n_points=10_000):
    """Smallest ``n0 >= 3`` with ``dF2/dw + dF3/dw < 0`` for all ``n0 <= n <= n_max``."""
    bad = None
    for n in range(3, n_max + 1):
        w = w_grid(n_points, n)
        _, dF2, dF3 = halfspace_w_derivatives(p, n, b, w)
        if float(np.max(dF2 + dF3)) >= 0.0:
            bad = n
    if bad == n_max:
        raise NotFoundError(f"derivative sign fails at n_max={n_max}", last_scanned=n_max)
    return 3 if bad is None else bad + 1


def fd_tilted_oracle(tn, prof, x, h):
    """Brute-force ``q^(2-p)(grad u) div(Df(grad u))`` at ``x`` in R^n."""
    radial = prof.radial if isinstance(prof, AHarmonicProfile) else prof
    g = radial.geometry
    x = np.asarray(x, dtype=float)
    if x.shape != (g.n,):
        raise ValueError(f"x must have shape ({g.n},), got {x.shape}")
    if not h > 0:
        raise StepTooLargeError("h must be positive")
    dist = float(np.linalg.norm(x[g.k:]))
    if not 10.0 * h < dist:
        raise StepTooLargeError(f"10h = {10 * h} must be below dist(x, R^k) = {dist}")
    p = float(g.p)
    return normalized_divergence(radial.value, x, h, tn.flux,
                                 lambda g0: float(tn.q(g0)) ** (p - 2.0))
