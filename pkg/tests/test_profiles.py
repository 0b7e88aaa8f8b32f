import math
from fractions import Fraction

import numpy as np
import pytest
from hypothesis import given, strategies as st

from conftest import admissible_geometries
from fatoukit import (Geometry, RadialProfile, RegimeError, StepTooLargeError, classify,
                      compute_exponents, divergence_st, fd_divergence_oracle, gradient_st,
                      oracle_discrepancy, quartic_coefficients)
from fatoukit.profiles import INDEFINITE, SOLUTION, SUBSOLUTION, SUPERSOLUTION


def test_gradient_matches_numerical_derivative():
    prof = RadialProfile(Geometry(3, 1, 3), 0.5, 0.9)
    s, t, h = 0.7, 0.4, 1e-6
    u, ut, us, grad = gradient_st(prof, s, t)
    f = lambda s_, t_: s_ ** 0.5 * (s_ * s_ + t_ * t_) ** (-(0.9 + 0.5) / 2)
    assert u == pytest.approx(f(s, t))
    assert ut == pytest.approx((f(s, t + h) - f(s, t - h)) / (2 * h), rel=1e-7)
    assert us == pytest.approx((f(s + h, t) - f(s - h, t)) / (2 * h), rel=1e-7)
    assert grad == pytest.approx(math.hypot(ut, us))


def test_classification_examples():
    g = Geometry(3, 1, 3)
    assert classify(RadialProfile.from_lambda(g, 1)).kind == SUBSOLUTION
    assert classify(RadialProfile.from_lambda(g, Fraction(1, 4))).kind == SUPERSOLUTION
    at_chi = classify(RadialProfile.from_lambda(g.exact(), Fraction(1, 2)))
    assert at_chi.kind == SOLUTION and at_chi.boundary


def test_indefinite_has_witness():
    # beta_t away from beta leaves C nonzero; pick a sign-changing quartic
    g = Geometry(4, 2, 3)
    prof = RadialProfile(g, 0.5, 0.85)
    cl = classify(prof)
    assert cl.kind == INDEFINITE
    s, t = cl.witness
    assert s * s + t * t == pytest.approx(1.0)
    qa, qb, qc = cl.quartic
    assert abs(qa * s ** 4 + qb * s * s * t * t + qc * t ** 4) < 1e-12
    # the divergence changes sign across the witness ray
    th = math.atan2(t, s)
    before = divergence_st(prof, math.cos(th - 1e-3), math.sin(th - 1e-3))
    after = divergence_st(prof, math.cos(th + 1e-3), math.sin(th + 1e-3))
    assert before * after < 0


def test_quartic_criterion_against_dense_sampling():
    rng = np.random.default_rng(5)
    th = np.linspace(1e-3, math.pi / 2 - 1e-3, 4001)
    for g in admissible_geometries(40, seed=11):
        lam = float(rng.uniform(0.05, 2 * g.k))
        prof = RadialProfile.from_lambda(g, lam)
        qa, qb, qc = (float(v) for v in quartic_coefficients(prof))
        vals = qa * np.sin(th) ** 4 + qb * np.sin(th) ** 2 * np.cos(th) ** 2 + qc * np.cos(th) ** 4
        kind = classify(prof).kind
        if kind == SUBSOLUTION:
            assert vals.min() >= -1e-9 * max(1, abs(vals).max())
        elif kind == SUPERSOLUTION:
            assert vals.max() <= 1e-9 * max(1, abs(vals).max())
        elif kind == INDEFINITE:
            assert vals.min() < 0 < vals.max()


def test_divergence_sign_follows_classification():
    for g in admissible_geometries(30, seed=2):
        ex = compute_exponents(g)
        s, t = np.sin(np.linspace(0.05, 1.5, 50)), np.cos(np.linspace(0.05, 1.5, 50))
        up = divergence_st(RadialProfile.from_lambda(g, float(ex.chi) + 0.1), s, t)
        assert np.all(up >= -1e-12)
        lam = max(float(ex.chi_breve) - 0.1, 1e-3)
        down = divergence_st(RadialProfile.from_lambda(g, lam), s, t)
        assert np.all(down <= 1e-12)


def test_oracle_second_order():
    prof = RadialProfile.from_lambda(Geometry(3, 1, 3.5), 0.8)
    x = np.array([0.5, 0.3, 0.7])
    hs = np.array([4e-3, 2e-3, 1e-3, 5e-4])
    err = [oracle_discrepancy(prof, x, h) for h in hs]
    order = np.polyfit(np.log(hs), np.log(err), 1)[0]
    assert 1.8 <= order <= 2.2


def test_oracle_rejects_large_step():
    prof = RadialProfile.from_lambda(Geometry(3, 1, 3), 0.8)
    with pytest.raises(StepTooLargeError):
        fd_divergence_oracle(prof, np.array([1.0, 0.01, 0.0]), 1e-2)
    with pytest.raises(RegimeError):
        RadialProfile(Geometry(3, 1, 3), 0.0, 1.0)


@given(st.floats(0.1, 3.0), st.floats(0.1, 3.0), st.floats(0.2, 5.0))
def test_homogeneity_of_divergence(s, t, scale):
    # u is homogeneous of degree -lambda, so the normalized divergence has degree -lambda - 2
    prof = RadialProfile.from_lambda(Geometry(3, 1, 3), 0.9)
    lhs = divergence_st(prof, scale * s, scale * t)
    rhs = scale ** (-0.9 - 2.0) * divergence_st(prof, s, t)
    assert lhs == pytest.approx(rhs, rel=1e-9, abs=1e-12)
