"""p-Laplacian of the profiles ``u = s**beta_t * r**-(lambda_t + beta_t)``.

Coordinates: ``t = |x'|`` along the plane R^k, ``s = |x''|`` across it,
``r = sqrt(s^2 + t^2)``.
"""

from dataclasses import dataclass, field
from fractions import Fraction
import math
import numbers

import numpy as np

from ._fd import normalized_divergence
from .errors import DegenerateGradientError, RegimeError, StepTooLargeError
from .exponents import Geometry, coefficients, compute_exponents

__all__ = [
    "RadialProfile",
    "Classification",
    "gradient_st",
    "hessian_st",
    "divergence_st",
    "quartic_coefficients",
    "classify",
    "fd_divergence_oracle",
    "oracle_discrepancy",
]

SUBSOLUTION = "Subsolution"
SUPERSOLUTION = "Supersolution"
SOLUTION = "Solution"
INDEFINITE = "Indefinite"


@dataclass(frozen=True)
class RadialProfile:
    geometry: Geometry
    beta_t: numbers.Real
    lambda_t: numbers.Real

    def __post_init__(self):
        if not self.beta_t > 0:
            raise RegimeError(f"beta_t must be positive, got {self.beta_t}",
                              field="beta_t", inequality="beta_t > 0")

    @classmethod
    def from_lambda(cls, geometry, lambda_t):
        """Profile with ``beta_t`` equal to the geometric beta."""
        return cls(geometry, compute_exponents(geometry).beta, lambda_t)

    def value(self, x):
        """Evaluate u at points ``x`` of shape (..., n)."""
        x = np.asarray(x, dtype=float)
        k = self.geometry.k
        s = np.linalg.norm(x[..., k:], axis=-1)
        r = np.linalg.norm(x, axis=-1)
        return s ** float(self.beta_t) * r ** (-float(self.lambda_t + self.beta_t))


@dataclass(frozen=True)
class Classification:
    kind: str
    witness: tuple = None
    boundary: bool = False
    quartic: tuple = field(default=None, repr=False)


def _check_st(s, t):
    s = np.asarray(s, dtype=float)
    t = np.asarray(t, dtype=float)
    if np.any(s <= 0):
        raise RegimeError("s must be positive (the profile is singular on the plane)",
                          field="s", inequality="s > 0")
    if np.any(t < 0):
        raise RegimeError("t must be nonnegative", field="t", inequality="t >= 0")
    return s, t


def gradient_st(prof, s, t):
    """Return ``(u, u_t, u_s, |grad u|)``; array inputs broadcast."""
    s, t = _check_st(s, t)
    lam, bet = float(prof.lambda_t), float(prof.beta_t)
    r2 = s * s + t * t
    u = s ** bet * r2 ** (-(lam + bet) / 2.0)
    u_t = -(lam + bet) * t / r2 * u
    u_s = (-lam * s * s + bet * t * t) / (s * r2) * u
    grad = u * np.sqrt(lam * lam * s * s + bet * bet * t * t) / (s * np.sqrt(r2))
    return u, u_t, u_s, grad


def hessian_st(prof, s, t):
    """Second derivatives ``(u_tt, u_ts, u_ss)`` in the (s, t) variables."""
    s, t = _check_st(s, t)
    lam, bet = float(prof.lambda_t), float(prof.beta_t)
    r2 = s * s + t * t
    r4 = r2 * r2
    u = s ** bet * r2 ** (-(lam + bet) / 2.0)
    m = lam + bet
    u_tt = u / r4 * m * ((m + 1.0) * t * t - s * s)
    u_ts = u * t / (s * r4) * m * ((2.0 + lam) * s * s - bet * t * t)
    u_ss = u / (s * s * r4) * ((lam * lam + lam) * s ** 4
                               - (lam + 3.0 * bet + 2.0 * lam * bet) * s * s * t * t
                               + (bet * bet - bet) * t ** 4)
    return u_tt, u_ts, u_ss


def quartic_coefficients(prof):
    """Coefficients ``(A l^2, B b, C b^3)`` of the quartic in (s^2, t^2)."""
    A, B, C = coefficients(prof.geometry, prof.lambda_t, prof.beta_t).as_tuple()
    lam, bet = prof.lambda_t, prof.beta_t
    return A * lam * lam, B * bet, C * bet * bet * bet


def divergence_st(prof, s, t):
    """``|grad u|^(2-p) div(|grad u|^(p-2) grad u)`` in closed form."""
    s, t = _check_st(s, t)
    lam, bet = float(prof.lambda_t), float(prof.beta_t)
    qa, qb, qc = (float(c) for c in quartic_coefficients(prof))
    s2, t2 = s * s, t * t
    r2 = s2 + t2
    den = lam * lam * s2 + bet * bet * t2
    if np.any(den == 0):
        raise DegenerateGradientError("lambda_t^2 s^2 + beta_t^2 t^2 vanishes")
    u = s ** bet * r2 ** (-(lam + bet) / 2.0)
    return u * (qa * s2 * s2 + qb * s2 * t2 + qc * t2 * t2) / (s2 * r2 * den)


def _divergence_scale(prof, s, t):
    # same expression with absolute values of the three coefficients
    lam, bet = float(prof.lambda_t), float(prof.beta_t)
    qa, qb, qc = (abs(float(c)) for c in quartic_coefficients(prof))
    s2, t2 = s * s, t * t
    r2 = s2 + t2
    u = s ** bet * r2 ** (-(lam + bet) / 2.0)
    return u * (qa * s2 * s2 + qb * s2 * t2 + qc * t2 * t2) / (s2 * r2 * (lam * lam * s2 + bet * bet * t2))


def _is_exact(*vals):
    return all(isinstance(v, (Fraction, numbers.Integral)) for v in vals)


def _nonneg(a, b, c):
    return a >= 0 and c >= 0 and (b >= 0 or b * b <= 4 * a * c)


def _witness(qa, qb, qc, grid=1024):
    """Point (s, t) on the unit quarter circle where the quartic changes sign."""
    qa, qb, qc = float(qa), float(qb), float(qc)

    def q(theta):
        c, s_ = math.cos(theta), math.sin(theta)
        x, y = c * c, s_ * s_
        return qa * x * x + qb * x * y + qc * y * y

    thetas = (np.arange(grid) + 0.5) * (math.pi / 2.0) / grid
    c, sn = np.cos(thetas) ** 2, np.sin(thetas) ** 2
    vals = qa * c * c + qb * c * sn + qc * sn * sn
    sg = np.sign(vals)
    idx = np.nonzero(sg[:-1] * sg[1:] < 0)[0]
    if idx.size:
        lo, hi = thetas[idx[0]], thetas[idx[0] + 1]
        flo = q(lo)
        for _ in range(200):
            mid = 0.5 * (lo + hi)
            fm = q(mid)
            if fm == 0.0 or hi - lo < 1e-15:
                lo = hi = mid
                break
            if (fm > 0) == (flo > 0):
                lo, flo = mid, fm
            else:
                hi = mid
        theta = 0.5 * (lo + hi)
    else:
        # sign change too narrow for the grid: roots of qc z^2 + qb z + qa, z = tan^2
        roots = np.roots([qc, qb, qa]) if qc != 0 else np.array([-qa / qb])
        roots = [z.real for z in np.atleast_1d(roots) if abs(z.imag) < 1e-14 and z.real > 0]
        theta = math.atan(math.sqrt(min(roots)))
    return (math.cos(theta), math.sin(theta))


def classify(prof, atol=1e-12):
    """Sub/super/solution classification of the profile.

    The quartic ``qa s^4 + qb s^2 t^2 + qc t^4`` is nonnegative on the open
    quadrant iff ``qa >= 0``, ``qc >= 0`` and ``qb >= 0`` or
    ``qb^2 <= 4 qa qc``.  Rational inputs are decided exactly; for floats
    the coefficients are compared against ``atol`` times their scale.
    """
    qa, qb, qc = quartic_coefficients(prof)
    if not _is_exact(prof.geometry.p, prof.lambda_t, prof.beta_t):
        qa, qb, qc = float(qa), float(qb), float(qc)
        tol = atol * max(1.0, abs(qa), abs(qb), abs(qc))
        qa, qb, qc = (v if abs(v) > tol else 0.0 for v in (qa, qb, qc))
    boundary = False
    try:
        ex = compute_exponents(prof.geometry)
        same_beta = abs(float(prof.beta_t) - float(ex.beta)) <= atol
        boundary = same_beta and any(
            abs(float(prof.lambda_t) - float(v)) <= atol for v in (ex.chi, ex.chi_breve))
    except RegimeError:
        pass
    quartic = (qa, qb, qc)
    pos = _nonneg(qa, qb, qc)
    neg = _nonneg(-qa, -qb, -qc)
    if pos and neg:
        return Classification(SOLUTION, None, boundary, quartic)
    if pos:
        return Classification(SUBSOLUTION, None, boundary, quartic)
    if neg:
        return Classification(SUPERSOLUTION, None, boundary, quartic)
    return Classification(INDEFINITE, _witness(qa, qb, qc), boundary, quartic)


def _plaplace_flux(p):
    def flux(g):
        norm = np.linalg.norm(g, axis=-1, keepdims=True)
        return norm ** (p - 2.0) * g
    return flux


def fd_divergence_oracle(prof, x, h):
    """Brute-force ``|grad u|^(2-p) div(|grad u|^(p-2) grad u)`` at ``x`` in R^n.

    Nested central differences in full Cartesian coordinates: 4th-order
    gradients inside, a 2nd-order divergence outside.
    """
    x = np.asarray(x, dtype=float)
    g = prof.geometry
    if x.shape != (g.n,):
        raise ValueError(f"x must have shape ({g.n},), got {x.shape}")
    if not h > 0:
        raise StepTooLargeError("h must be positive")
    dist = float(np.linalg.norm(x[g.k:]))
    if not 10.0 * h < dist:
        raise StepTooLargeError(f"10h = {10 * h} must be below dist(x, R^k) = {dist}")
    p = float(g.p)
    return normalized_divergence(prof.value, x, h, _plaplace_flux(p),
                                 lambda g0: np.linalg.norm(g0) ** (p - 2.0))


def oracle_discrepancy(prof, x, h):
    """Relative gap between the oracle and the closed form at ``x``.

    The gap is divided by the closed form evaluated with absolute values of
    its three coefficients, which stays meaningful near sign changes.
    """
    x = np.asarray(x, dtype=float)
    k = prof.geometry.k
    s = float(np.linalg.norm(x[k:]))
    t = float(np.linalg.norm(x[:k]))
    exact = float(divergence_st(prof, s, t))
    approx = fd_divergence_oracle(prof, x, h)
    scale = max(abs(exact), float(_divergence_scale(prof, s, t)))
    if scale == 0.0:
        return abs(approx - exact)
    return abs(approx - exact) / scale
