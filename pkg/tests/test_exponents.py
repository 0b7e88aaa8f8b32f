import math
from fractions import Fraction

import numpy as np
import pytest
from hypothesis import given, strategies as st

from conftest import admissible_geometries
from fatoukit import (Geometry, RegimeError, capacity_energy, coefficient_roots, coefficients,
                      compute_exponents, martin_exponent_halfplane)


@pytest.mark.parametrize("n,k,p,beta,chi,chi_breve", [
    # hand evaluation of beta = (p+k-n)/(p-1) and the two branches
    (3, 1, 3, Fraction(1, 2), Fraction(1, 2), Fraction(1, 2)),
    (4, 2, 3, Fraction(1, 2), Fraction(1), Fraction(3, 4)),
    (2, 1, 2, Fraction(1), Fraction(1), Fraction(1)),
    (2, 1, 3, Fraction(1), Fraction(2, 3), Fraction(1, 2)),
    (5, 1, 5, Fraction(1, 4), Fraction(1, 4), Fraction(1, 4)),
])
def test_exact_exponents(n, k, p, beta, chi, chi_breve):
    ex = compute_exponents(Geometry(n, k, Fraction(p)))
    assert ex.beta == beta
    assert ex.chi == chi
    assert ex.chi_breve == chi_breve


def test_regime_messages_name_the_inequality():
    with pytest.raises(RegimeError) as err:
        Geometry(3, 1, 2).check_regime()
    assert err.value.inequality == "p > n-k"
    with pytest.raises(RegimeError):
        Geometry(2, 1, 1.5).check_regime()
    with pytest.raises(RegimeError):
        Geometry(3, 3, 4)
    with pytest.raises(RegimeError):
        Geometry(3, 1, 1)


def test_roots_agree_with_numpy_roots():
    for g in admissible_geometries(50, seed=3):
        ex = compute_exponents(g)
        n, k, p, b = g.n, g.k, g.p, ex.beta
        ra = np.sort(np.roots([p - 1, p - n, -b * k]).real)
        rb = np.sort(np.roots([2 * b * (p - 1) + n - k - 2, b * (p - n), -b * b * (p - 2 + k)]).real)
        (a1, a2), (b1, b2) = coefficient_roots(g)
        assert np.allclose(np.sort([a1, a2]), ra, atol=1e-9)
        assert np.allclose(np.sort([b1, b2]), rb, atol=1e-9)


@given(st.integers(2, 9), st.data())
def test_exact_root_identities(n, data):
    k = data.draw(st.integers(1, n - 1))
    lo = 2 if k == n - 1 else n - k
    p = Fraction(lo) + data.draw(st.fractions(Fraction(1, 1000), 6, max_denominator=1000))
    g = Geometry(n, k, p)
    ex = compute_exponents(g)
    (a1, a2), (b1, b2) = coefficient_roots(g)
    assert coefficients(g, a1, ex.beta).A == 0 and coefficients(g, a2, ex.beta).A == 0
    assert coefficients(g, b1, ex.beta).B == 0 and coefficients(g, b2, ex.beta).B == 0
    assert coefficients(g, 1, ex.beta).C == 0
    assert ex.chi_breve <= ex.chi < k


@given(st.floats(1.05, 50.0), st.floats(0.01, 5.0))
def test_martin_exponent_decreasing(p, dp):
    s = martin_exponent_halfplane(p)
    assert s > martin_exponent_halfplane(p + dp) > 1.0 / 3.0


def test_martin_closed_values():
    assert martin_exponent_halfplane(2) == pytest.approx(1.0, abs=1e-15)
    assert martin_exponent_halfplane(3) == pytest.approx(math.sqrt(3) / 3, abs=1e-15)
    assert martin_exponent_halfplane(math.inf) == pytest.approx(1 / 3)


def test_capacity_log_law():
    g = Geometry(3, 1, 2)
    assert capacity_energy(g, 1e-6) / capacity_energy(g, 1e-3) == pytest.approx(0.5, abs=1e-12)
    # closed form for m = n-k-p = 0: |B^1| |S^1| (log 1/r)^(1-p) = 2 * 2 pi / log(1/r)
    assert capacity_energy(g, 1e-3) == pytest.approx(4 * math.pi / math.log(1e3), rel=1e-12)
    with pytest.raises(RegimeError):
        capacity_energy(g, 0.5)


def test_capacity_matches_quadrature():
    from scipy.integrate import quad
    g = Geometry(4, 1, 2.5)
    r = 1e-2
    L = math.log(1 / r)
    radial = quad(lambda rho: rho ** (4 - 1 - 2.5 - 1), r, 1)[0]
    area = 2 * math.pi ** 1.5 / math.gamma(1.5)
    assert capacity_energy(g, r) == pytest.approx(2 * area * radial * L ** -2.5, rel=1e-9)


@given(st.floats(2.0, 40.0))
def test_martin_exponent_bracketed_in_half_plane(p):
    ex = compute_exponents(Geometry(2, 1, p))
    assert ex.chi_breve - 1e-12 <= martin_exponent_halfplane(p) <= ex.chi + 1e-12
