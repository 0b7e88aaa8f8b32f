"""Lacunary scale sequences."""

from dataclasses import dataclass
from fractions import Fraction
import math

from ..errors import PlanOverflowError

DEFAULT_LIMIT = 2 ** 256


def growth_bound(T):
    """Right-hand side ``4 T [ln(2 + T)]^3`` of the gap condition (float)."""
    return 4.0 * T * math.log(2 + T) ** 3


@dataclass(frozen=True)
class LacunaryPlan:
    T: tuple

    def __post_init__(self):
        T = tuple(int(t) for t in self.T)
        object.__setattr__(self, "T", T)
        if not T or T[0] != 1:
            raise ValueError("a plan starts with T_1 = 1")
        for a, b in zip(T, T[1:]):
            if b % a != 0:
                raise ValueError(f"{b} is not a multiple of {a}")
            if b < growth_bound(a):
                raise ValueError(f"{b} < 4*{a}*ln(2+{a})^3")

    @property
    def J(self):
        return len(self.T)

    def __len__(self):
        return len(self.T)

    def __getitem__(self, j):
        """1-based access ``plan[j] = T_j``."""
        if not 1 <= j <= len(self.T):
            raise IndexError(j)
        return self.T[j - 1]

    def ratio_violations(self):
        """Pairs ``(m, j)`` with ``T_m/T_j > (j-1)^-3 4^(m-j)`` (exact arithmetic)."""
        bad = []
        for j in range(2, self.J + 1):
            for m in range(1, j):
                lhs = Fraction(self[m], self[j])
                rhs = Fraction(1, (j - 1) ** 3) * Fraction(4) ** (m - j)
                if lhs > rhs:
                    bad.append((m, j))
        return bad


def gen_lacunary(J, limit=DEFAULT_LIMIT):
    """Smallest admissible plan of length ``J``.

    ``T_{j+1}`` is the least multiple of ``T_j`` that is at least
    ``4 T_j [ln(2 + T_j)]^3``.  Raises :class:`PlanOverflowError` when a
    scale exceeds ``limit``.
    """
    if not isinstance(J, int) or J < 1:
        raise ValueError("J must be a positive integer")
    T = [1]
    while len(T) < J:
        t = T[-1]
        q = math.ceil(4.0 * math.log(2 + t) ** 3)
        # guard the float ceiling against rounding at an exact boundary
        while t * (q - 1) >= growth_bound(t) and q > 1:
            q -= 1
        nxt = t * q
        if nxt > limit:
            raise PlanOverflowError(
                f"T_{len(T) + 1} = {nxt:.3e} exceeds the limit {limit:.3e}; use J <= {len(T)}")
        T.append(nxt)
    return LacunaryPlan(tuple(T))
