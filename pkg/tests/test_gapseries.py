import math
from fractions import Fraction

import numpy as np
import pytest
from hypothesis import given, settings, strategies as st

from fatoukit import PlanOverflowError, RegimeError, ResolutionError, ThresholdLogicError
from fatoukit.gapseries import (CoefficientSequence, LacunaryPlan, build_damping, cosine_wave,
                                damping_factor, discrete_lipschitz, divergence_statistics,
                                divergent_coefficients, gen_lacunary, growth_bound,
                                maximal_stats, positive_coefficients, quasi_orthogonality,
                                trace_wave, triangle_wave)
from fatoukit.gapseries.series import _Cubes, _family_pass


def test_plan_values():
    assert gen_lacunary(1).T == (1,)
    assert gen_lacunary(2).T == (1, 6)
    assert gen_lacunary(3).T == (1, 6, 216)


@given(st.integers(1, 9))
def test_plan_admissible_exactly(J):
    plan = gen_lacunary(J)
    for a, b in zip(plan.T, plan.T[1:]):
        assert b % a == 0
        assert b >= growth_bound(a)
        assert b - a < growth_bound(a)  # least admissible multiple
    assert plan.ratio_violations() == []


def test_plan_validation_and_overflow():
    with pytest.raises(ValueError):
        LacunaryPlan((1, 5))
    with pytest.raises(ValueError):
        LacunaryPlan((1, 6, 210))  # a multiple of 6 but below 4*6*ln(8)^3
    with pytest.raises(ValueError):
        LacunaryPlan((1, 6, 220))
    assert LacunaryPlan((1, 7)).J == 2
    with pytest.raises(PlanOverflowError):
        gen_lacunary(12, limit=10 ** 12)


def test_waves():
    tri = triangle_wave()
    assert tri.admissible()
    assert tri.b_bar == pytest.approx(0.15)
    cos = cosine_wave()
    assert cos.b_bar == 0.125
    assert cos.sup_norm == pytest.approx(3 / 16)
    # 3/16 + 2 pi/16 exceeds 1/2: the cosine wave is a test wave, not an admissible one
    assert not cos.admissible()
    assert triangle_wave(2).b_bar == pytest.approx(0.0225)
    w = trace_wave(np.sin(2 * np.pi * np.arange(64) / 64) + 2.0)
    assert w.sup_norm + w.lipschitz <= 0.5 + 1e-12


def test_sampling_uses_exact_phase():
    w = cosine_wave()
    T = 31159320570000
    N = 1 << 10
    direct = w.factor(((T % N) * np.arange(N) % N) / N)
    assert np.array_equal(w.sample(T, N), direct)


def test_quasi_orthogonality_examples():
    plan = gen_lacunary(3)
    cos = cosine_wave()
    for m, j in ((1, 2), (1, 3), (2, 3)):
        q = quasi_orthogonality(cos, plan, m, j)
        assert abs(q.integral) < 1e-15 and q.holds
    q = quasi_orthogonality(triangle_wave(), plan, 1, 2)
    assert abs(q.integral) <= 1 / 6 and q.bound == pytest.approx(1 / 6)
    d = quasi_orthogonality(triangle_wave(), plan, 2, 2)
    # squared L2 norm of 0.2|x - 1/2| - 0.05 over a period: 0.04/12 - 0.0025 + ... = 1/1200
    assert d.integral == pytest.approx(1 / 1200, rel=1e-8) and d.bound == math.inf
    with pytest.raises(ResolutionError):
        quasi_orthogonality(cos, plan, 1, 3, resolution=1024)


def test_quasi_orthogonality_two_dimensional():
    plan = gen_lacunary(3)
    for w in (cosine_wave(2), triangle_wave(2)):
        for m, j in ((1, 2), (1, 3), (2, 3)):
            q = quasi_orthogonality(w, plan, m, j, resolution=4096)
            assert q.holds and q.error <= 1e-6


def test_maximal_stats_examples():
    plan = gen_lacunary(3)
    w = triangle_wave()
    zero = maximal_stats(w, plan, CoefficientSequence((0.0, 0.0, 0.0), 0.0), 4096)
    assert zero.weak_constant == 0.0 and zero.s_star_max == 0.0
    one = maximal_stats(w, gen_lacunary(1), CoefficientSequence((0.8,), 0.8), 4096)
    assert one.weak_constant <= 0.25
    a = tuple(1.0 / j for j in range(1, 11))
    rep = maximal_stats(cosine_wave(), gen_lacunary(10), CoefficientSequence(a, math.sqrt(sum(x * x for x in a))),
                        1 << 12, subgrid="surrogate")
    assert rep.weak_constant <= 50
    with pytest.raises(ResolutionError):
        maximal_stats(w, gen_lacunary(4), divergent_coefficients(4), 4096)


def test_coefficients():
    d = divergent_coefficients(12)
    s = d.partial_sums()
    assert d.a[:2] == (1.0, -1.0) and d.a[2:6] == (0.25,) * 4
    assert s.min() >= -1e-15 and s.max() <= 1 + 1e-15
    assert d.chi_hat == pytest.approx(math.pi / math.sqrt(3))
    p = positive_coefficients(5)
    assert p.a[0] == -0.25 and p.chi_hat ** 2 == pytest.approx(math.pi ** 2 / 96)


def test_positive_variant_invariants():
    plan = gen_lacunary(6)
    st_ = build_damping(cosine_wave(), plan, positive_coefficients(6), "positive-vanishing",
                        1 << 14, subgrid="surrogate")
    assert np.all(st_.L[0] == 1.0)
    assert st_.sigma[0].min() >= 7 / 8 and st_.sigma[0].max() <= 9 / 8
    assert all(s.min() > 0 for s in st_.sigma)
    lo, hi = st_.ratio_bounds()
    assert lo >= 0.5 and hi <= 1.0
    med = divergence_statistics(st_).trend
    assert all(b < a for a, b in zip(med, med[1:]))
    with pytest.raises(RegimeError):
        build_damping(cosine_wave(), plan, divergent_coefficients(6), "positive-vanishing", 1 << 14,
                      subgrid="surrogate")
    with pytest.raises(ResolutionError):
        build_damping(cosine_wave(), plan, positive_coefficients(6), "positive-vanishing", 1 << 14)


def _crafted():
    # coefficients chosen so that some (not all) level-2 cubes cross the first threshold
    return CoefficientSequence((0.8, 0.2, 0.2), 0.045 / 8)


def test_stopping_families_on_crafted_series():
    plan = gen_lacunary(3)
    st_ = build_damping(triangle_wave(), plan, _crafted(), "bounded-divergent", 1 << 14)
    fam = st_.families
    assert fam[("K", 1, 2)] == [0, 5]
    level3 = fam[("K", 1, 3)]
    # no level-3 cube lies inside a stopped level-2 cube (36 children each)
    assert all(c // 36 not in (0, 5) for c in level3)
    lo, hi = st_.ratio_bounds()
    assert lo == 0.5 and hi == 1.0
    L3 = st_.L[2]
    x = np.arange(1 << 14) / (1 << 14)
    in0 = x < 1 / 6
    assert np.all(L3[in0 & (x > 0.01) & (x < 1 / 6 - 0.01)] == 0.5)
    # damping factor is Lipschitz at scale T_j
    assert st_.lip_constants[1] < 64
    again = build_damping(triangle_wave(), plan, _crafted(), "bounded-divergent", 1 << 14)
    assert again.families == fam


def test_damping_factor_shape():
    N, T = 4096, 8
    E = np.zeros(N, dtype=bool)
    E[: N // T] = True
    z = damping_factor(E, T, N, 1)
    assert np.all(z[E] == 0) and z.min() >= 0 and z.max() <= 1
    x = np.arange(N) / N
    last = (N // T - 1) / N
    d = np.where(E, 0.0, np.minimum(x - last, 1.0 - x))
    assert np.all(z[d >= 1 / (4 * T)] == 1)
    assert discrete_lipschitz(z, N) / T < 64
    assert np.all(damping_factor(np.zeros(N, bool), T, N, 1) == 1)


def test_threshold_logic_error_on_split_cube():
    N, T = 64, 4
    cubes = _Cubes(T, N, 1)
    mask = np.zeros(N, dtype=bool)
    mask[3] = True  # one node of a 16-node cube
    with pytest.raises(ThresholdLogicError):
        _family_pass("K", lambda i: mask.copy(), [1], {}, cubes, True, 2, T, N, 1, {}, {},
                     np.zeros(N, bool))


def test_divergent_variant_bounded():
    plan = gen_lacunary(8)
    sup = []
    for J in (5, 8):
        st_ = build_damping(cosine_wave(), plan, divergent_coefficients(J), "bounded-divergent",
                            1 << 14, subgrid="surrogate")
        sup.append(max(st_.sup_norms()))
    assert sup[1] <= 2 * sup[0]
    single = build_damping(cosine_wave(), plan, divergent_coefficients(1), "bounded-divergent",
                           1 << 10)
    rep = divergence_statistics(single)
    assert rep.rows == [(1, 0.0, 0.0)]


def test_tail_oscillation_trend_nondecreasing():
    plan = gen_lacunary(8)
    st_ = build_damping(triangle_wave(), plan, divergent_coefficients(8), "bounded-divergent",
                        1 << 14, subgrid="surrogate")
    trend = divergence_statistics(st_).trend
    assert all(b >= a for a, b in zip(trend, trend[1:]))
    assert trend[-1] > 0
