"""Periodic boundary waves and coefficient sequences."""

from dataclasses import dataclass, field
import math

import numpy as np

from ..errors import RegimeError

_FINE = 1 << 16


@dataclass(frozen=True, eq=False)
class BoundaryWave:
    """``Psi0(x) = prod_i factor(x_i)`` with ``factor`` 1-periodic.

    ``b_bar`` is the mean of ``Psi0`` over the unit cube and
    ``psi = Psi0 - b_bar``.  ``factor_mean`` and the value range of the
    factor are computed from a fine uniform sample unless given.
    """

    factor: object
    k: int = 1
    name: str = "custom"
    factor_mean: float = None
    factor_lip: float = None
    _range: tuple = field(default=None, repr=False)

    def __post_init__(self):
        x = np.arange(_FINE) / _FINE
        v = np.asarray(self.factor(x), dtype=float)
        if self.factor_mean is None:
            object.__setattr__(self, "factor_mean", float(np.mean(v)))
        if self.factor_lip is None:
            lip = float(np.max(np.abs(np.diff(np.append(v, v[0]))))) * _FINE
            object.__setattr__(self, "factor_lip", lip)
        object.__setattr__(self, "_range", (float(v.min()), float(v.max())))

    @property
    def b_bar(self):
        return self.factor_mean ** self.k

    @property
    def sup_norm(self):
        lo, hi = self._range
        return max(abs(lo), abs(hi)) ** self.k

    @property
    def lipschitz(self):
        # gradient of a product of k factors, each bounded by its sup norm
        m = max(abs(self._range[0]), abs(self._range[1]))
        return math.sqrt(self.k) * self.factor_lip * m ** (self.k - 1)

    @property
    def value_range(self):
        """Range of ``Psi0`` (the product of the factor ranges)."""
        lo, hi = self._range
        ends = [lo ** a * hi ** (self.k - a) for a in range(self.k + 1)]
        return min(ends), max(ends)

    def admissible(self):
        """``||Psi0||_inf + Lip(Psi0) <= 1/2`` and ``b_bar != 0``."""
        return self.sup_norm + self.lipschitz <= 0.5 and self.b_bar != 0

    def psi0(self, x):
        x = np.asarray(x, dtype=float)
        if self.k == 1 and x.ndim == 1:
            return np.asarray(self.factor(np.mod(x, 1.0)), dtype=float)
        return np.prod(np.asarray(self.factor(np.mod(x, 1.0)), dtype=float), axis=-1)

    def psi(self, x):
        return self.psi0(x) - self.b_bar

    def sample_factor(self, T, N):
        """``factor(frac(T i / N))`` for ``i = 0..N-1`` with exact integer phases."""
        t = int(T) % N
        phase = (np.arange(N, dtype=np.int64) * t) % N
        return np.asarray(self.factor(phase / N), dtype=float)

    def sample(self, T, N, centered=False):
        """``Psi0(T x)`` (or ``psi``) on the ``N^k`` grid ``x = i/N``."""
        f = self.sample_factor(T, N)
        out = f
        for _ in range(self.k - 1):
            out = np.multiply.outer(out, f)
        return out - self.b_bar if centered else out


def cosine_wave(k=1):
    """``1/8 + cos(2 pi x)/16`` per coordinate."""
    return BoundaryWave(lambda x: 0.125 + 0.0625 * np.cos(2.0 * np.pi * x), k, "cosine",
                        factor_mean=0.125, factor_lip=2.0 * np.pi * 0.0625)


def triangle_wave(k=1):
    """``0.1 + 0.2 |frac(x) - 1/2|`` per coordinate (mean 0.15, Lipschitz 0.2)."""
    return BoundaryWave(lambda x: 0.1 + 0.2 * np.abs(np.mod(x, 1.0) - 0.5), k, "triangle",
                        factor_mean=0.15, factor_lip=0.2)


def trace_wave(values, name="trace"):
    """Wave from periodic samples of a one-dimensional trace, rescaled to be admissible.

    The samples are taken at ``x = i/len(values)`` and interpolated
    linearly.  They are multiplied by the largest factor ``c <= 1`` with
    ``||c Psi0||_inf + Lip(c Psi0) <= 1/2``; p-homogeneity keeps the
    rescaled trace the boundary value of a solution.
    """
    v = np.asarray(values, dtype=float)
    n = v.size
    lip = float(np.max(np.abs(np.diff(np.append(v, v[0]))))) * n
    c = min(1.0, 0.5 / (float(np.max(np.abs(v))) + lip))
    v = c * v
    xs = np.arange(n + 1) / n
    vs = np.append(v, v[0])

    def factor(x):
        return np.interp(np.mod(x, 1.0), xs, vs)

    return BoundaryWave(factor, 1, name, factor_mean=float(np.mean(v)), factor_lip=c * lip)


@dataclass(frozen=True)
class CoefficientSequence:
    """Leading coefficients ``a`` and the l2 norm of the full sequence."""

    a: tuple
    chi_hat: float
    variant: str = "custom"

    @property
    def J(self):
        return len(self.a)

    def partial_sums(self):
        return np.cumsum(self.a)


def divergent_coefficients(J):
    """Blocks of ``m^2`` terms ``+1/m^2`` then ``m^2`` terms ``-1/m^2``.

    Partial sums stay in ``[0, 1]`` and sweep the whole interval in every
    block, so they do not converge; the squared sum is ``2 sum 1/m^2 = pi^2/3``.
    """
    a = []
    m = 1
    while len(a) < J:
        a.extend([1.0 / m ** 2] * m ** 2 + [-1.0 / m ** 2] * m ** 2)
        m += 1
    return CoefficientSequence(tuple(a[:J]), math.pi / math.sqrt(3.0), "bounded-divergent")


def positive_coefficients(J):
    """``a_j = -1/(4j)``; squared sum ``pi^2/96``."""
    return CoefficientSequence(tuple(-1.0 / (4.0 * j) for j in range(1, J + 1)),
                               math.pi / math.sqrt(96.0), "positive-vanishing")


def check_coefficients(coeffs, variant):
    if variant == "positive-vanishing":
        expected = positive_coefficients(coeffs.J).a
        if not np.allclose(coeffs.a, expected, rtol=0, atol=1e-15):
            raise RegimeError("the positive variant needs a_j = -1/(4j)", field="coeffs",
                              inequality="a_j = -1/(4j)")
    elif variant != "bounded-divergent":
        raise ValueError(f"unknown variant {variant!r}")
