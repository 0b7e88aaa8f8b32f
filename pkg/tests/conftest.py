import random
from fractions import Fraction

import pytest
from hypothesis import settings

from fatoukit import Geometry

settings.register_profile("default", deadline=None, max_examples=60)
settings.load_profile("default")


def admissible_geometries(count, seed=0, exact=False):
    """Random (n, k, p) inside the sub/supersolution regime."""
    rng = random.Random(seed)
    out = []
    while len(out) < count:
        n = rng.randint(2, 8)
        k = rng.randint(1, n - 1)
        lo = 2 if k == n - 1 else n - k
        num = rng.randint(1, 400)
        p = Fraction(lo) + Fraction(num, 100)
        out.append(Geometry(n, k, p if exact else float(p)))
    return out


@pytest.fixture
def geometries():
    return admissible_geometries(200)
