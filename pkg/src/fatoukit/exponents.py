"""Closed-form exponents for positive solutions vanishing on a k-plane.

Every formula here is written with plain arithmetic operators so that the
same code runs in double precision or, when the inputs are
:class:`fractions.Fraction` (or ``int``), in exact rational arithmetic.
"""

from dataclasses import dataclass
from fractions import Fraction
import math
import numbers

from .errors import RegimeError

__all__ = [
    "Geometry",
    "ExponentSet",
    "CoefficientTriple",
    "compute_exponents",
    "coefficients",
    "coefficient_roots",
    "martin_exponent_halfplane",
    "capacity_energy",
]


@dataclass(frozen=True)
class Geometry:
    """Ambient dimension ``n``, plane dimension ``k`` and exponent ``p``.

    Construction only checks the structural constraints (integers,
    ``1 <= k <= n-1``, ``p > 1``).  The sub/supersolution regime is checked
    by :meth:`check_regime`, because some diagnostics deliberately work
    outside it.
    """

    n: int
    k: int
    p: numbers.Real

    def __post_init__(self):
        if not isinstance(self.n, numbers.Integral) or self.n < 2:
            raise RegimeError(f"n must be an integer >= 2, got {self.n!r}",
                              field="n", inequality="n >= 2")
        if not isinstance(self.k, numbers.Integral) or not 1 <= self.k <= self.n - 1:
            raise RegimeError(f"k must satisfy 1 <= k <= n-1, got k={self.k!r}, n={self.n}",
                              field="k", inequality="1 <= k <= n-1")
        if not isinstance(self.p, numbers.Real) or not self.p > 1:
            raise RegimeError(f"p must be a real number > 1, got {self.p!r}",
                              field="p", inequality="p > 1")

    @property
    def codim(self):
        """Codimension ``n - k`` of the plane."""
        return self.n - self.k

    @property
    def halfspace(self):
        return self.k == self.n - 1

    def check_regime(self):
        """Raise :class:`RegimeError` unless (n, k, p) is admissible.

        For ``k <= n-2`` this requires ``p > n-k``.  For ``k = n-1`` it
        requires ``p >= 2``; ``p = 2`` is the linear half-space case where
        both exponents equal ``k``.
        """
        n, k, p = self.n, self.k, self.p
        if k <= n - 2:
            if not p > n - k:
                raise RegimeError(
                    f"p > n-k violated: p={p}, n-k={n - k}",
                    field="p", inequality="p > n-k")
        elif not p >= 2:
            raise RegimeError(
                f"p >= 2 violated for the half-space case k=n-1: p={p}",
                field="p", inequality="p >= 2 (k = n-1)")
        return self

    def exact(self):
        """Copy of the geometry with ``p`` converted to a Fraction."""
        return Geometry(self.n, self.k, Fraction(self.p))


@dataclass(frozen=True)
class ExponentSet:
    beta: numbers.Real
    chi: numbers.Real
    chi_breve: numbers.Real
    branch_a: numbers.Real
    branch_b: numbers.Real
    coincident: bool

    def as_dict(self):
        return {
            "beta": float(self.beta),
            "chi": float(self.chi),
            "chi_breve": float(self.chi_breve),
            "branch_a": float(self.branch_a),
            "branch_b": float(self.branch_b),
            "coincident": bool(self.coincident),
        }


@dataclass(frozen=True)
class CoefficientTriple:
    A: numbers.Real
    B: numbers.Real
    C: numbers.Real

    def as_tuple(self):
        return (self.A, self.B, self.C)


def _beta(n, k, p):
    return (p + k - n) / (p - 1) if isinstance(p, Fraction) else (p + k - n) / (p - 1.0)


def compute_exponents(g):
    """Return beta, both branches, chi = max and chi_breve = min.

    Raises
    ------
    RegimeError
        If the geometry is outside the admissible regime.
    """
    g.check_regime()
    n, k, p = g.n, g.k, g.p
    if isinstance(p, numbers.Integral):
        p = Fraction(p)
    beta = _beta(n, k, p)
    branch_a = beta * (k + p - 2) / (2 * p - n + k - 2)
    branch_b = k / (p - 1)
    chi = max(branch_a, branch_b)
    chi_breve = min(branch_a, branch_b)
    linear_halfspace = g.halfspace and p == 2
    if not (chi < k or (linear_halfspace and chi == k)):
        raise AssertionError(f"chi < k failed for {g}: chi={chi}")
    if not isinstance(g.p, (Fraction, numbers.Integral)):
        beta, branch_a, branch_b = float(beta), float(branch_a), float(branch_b)
        chi, chi_breve = float(chi), float(chi_breve)
    return ExponentSet(beta=beta, chi=chi, chi_breve=chi_breve,
                       branch_a=branch_a, branch_b=branch_b,
                       coincident=(chi == chi_breve))


def coefficients(g, lambda_t, beta_t):
    """Values (A, B, C) of the three lambda-quadratics at (lambda_t, beta_t).

    The beta appearing inside the quadratics is ``beta_t``; with
    ``beta_t`` equal to the geometric beta, ``C`` vanishes.  Inputs that
    are all rational give exact results.
    """
    n, k, p = g.n, g.k, g.p
    lam, bt = lambda_t, beta_t
    A = (p - 1) * lam * lam + (p - n) * lam - bt * k
    B = (2 * bt * (p - 1) + n - k - 2) * lam * lam + bt * (p - n) * lam \
        - bt * bt * (p - 2 + k)
    C = (p - 1) * bt - (p - n + k)
    return CoefficientTriple(A, B, C)


def coefficient_roots(g):
    """Stated roots of A and B (with beta_t equal to beta).

    Returns ``((a1, a2), (b1, b2))`` where A vanishes at ``a1, a2`` and B
    at ``b1, b2``.  The second root of B needs ``2p - n + k - 2 != 0``.
    """
    n, k, p = g.n, g.k, g.p
    if isinstance(p, numbers.Integral):
        p = Fraction(p)
    beta = _beta(n, k, p)
    return ((-beta, k / (p - 1)),
            (-beta, beta * (p - 2 + k) / (2 * p - n + k - 2)))


def martin_exponent_halfplane(p):
    """Homogeneity exponent of the p-harmonic Martin function of the half-plane.

    ``sigma(p) = -(p - 3 - 2 sqrt(p^2 - 3p + 3)) / (3 (p - 1))``;
    ``p = inf`` returns the limit 1/3.
    """
    if not p > 1:
        raise RegimeError(f"p > 1 violated: p={p}", field="p", inequality="p > 1")
    if math.isinf(p):
        return 1.0 / 3.0
    p = float(p)
    return -(p - 3.0 - 2.0 * math.sqrt(p * p - 3.0 * p + 3.0)) / (3.0 * (p - 1.0))


def _unit_ball_volume(d):
    return math.pi ** (d / 2.0) / math.gamma(d / 2.0 + 1.0)


def _sphere_area(d):
    # area of the unit sphere S^{d-1} in R^d
    return 2.0 * math.pi ** (d / 2.0) / math.gamma(d / 2.0)


def capacity_energy(g, r):
    """p-energy of the logarithmic cutoff around the plane.

    The cutoff is ``phi = max(1 + log|x''| / log(1/r), 0)`` restricted to the
    cylinder ``{|x'| < 1, |x''| < 1}``.  Only ``|x''|`` enters, so the energy is
    ``|B^k| |S^{n-k-1}| (log 1/r)^{-p} int_r^1 rho^{n-k-p-1} d rho``,
    integrated in closed form.  The regime check is skipped on purpose.
    """
    r = float(r)
    if not 0.0 < r < 0.1:
        raise RegimeError(f"r must lie in (0, 1/10), got {r}", field="r",
                          inequality="0 < r < 1/10")
    n, k, p = g.n, g.k, float(g.p)
    m = n - k - p
    L = math.log(1.0 / r)
    if m == 0.0:
        radial = L
    else:
        radial = (1.0 - r ** m) / m
    return _unit_ball_volume(k) * _sphere_area(n - k) * radial * L ** (-p)
