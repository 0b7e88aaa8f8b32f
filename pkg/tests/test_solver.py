import io
import math
import warnings

import numpy as np
import pytest
from hypothesis import given, settings, strategies as st

from fatoukit import (DegenerateFitError, Geometry, NonConvergenceError, RegimeError,
                      ResolutionError, TiltedNorm)
from fatoukit.solver import (HomogeneityFit, PLaplaceSolver, SectorGrid, SlabGrid,
                             convexity_diagnostic, fit_decay, fit_homogeneity, harmonic_measure,
                             build_psi, monotonicity_defect, oscillation_profile, read_grid_dump,
                             smooth_bump, solve, write_grid_dump, write_profile_csv)
from fatoukit.solver.engine import SolverOptions

EXACT = math.exp(-math.pi)  # cos(2 pi x) e^{-2 pi z} at x = 0, z = 1/2


def _cos_value(nx):
    g = SlabGrid(Geometry(2, 1, 2), 1.0, nx, 4.0, 4 * nx)
    f = solve(g, lambda X: np.cos(2 * np.pi * X[:, 0]))
    return float(f.interpolator()(np.array([[0.0, 0.5]]))[0])


def test_linear_case_second_order():
    e32, e64 = abs(_cos_value(32) - EXACT), abs(_cos_value(64) - EXACT)
    assert e64 < 1.2e-4
    assert 1.8 <= math.log2(e32 / e64) <= 2.2


def _random_datum(coef):
    def datum(X):
        x = X[:, 0]
        return sum(c * np.cos(2 * np.pi * (i + 1) * x + i) for i, c in enumerate(coef))
    return datum


@settings(max_examples=12)
@given(st.lists(st.floats(-1, 1), min_size=1, max_size=3), st.floats(2.0, 4.0))
def test_maximum_principle(coef, p):
    g = SlabGrid(Geometry(2, 1, p), 1.0, 16, 4.0, 16)
    datum = _random_datum(coef)
    f = solve(g, datum, tol=1e-9)
    b = datum(g.coordinates()[:16, :1])
    assert f.values.max() <= b.max() + 1e-9
    assert f.values.min() >= b.min() - 1e-9


@settings(max_examples=8)
@given(st.lists(st.floats(-1, 1), min_size=2, max_size=2), st.floats(0.01, 0.5),
       st.floats(2.0, 4.0))
def test_comparison_principle(coef, lift, p):
    g = SlabGrid(Geometry(2, 1, p), 1.0, 16, 4.0, 16)
    d = _random_datum(coef)
    lo = solve(g, d, tol=1e-10).values
    hi = solve(g, lambda X: d(X) + lift * (1 + np.cos(2 * np.pi * X[:, 0])), tol=1e-10).values
    assert np.all(hi >= lo - 1e-8)


@settings(max_examples=8)
@given(st.floats(0.1, 10.0), st.floats(2.0, 4.0))
def test_homogeneity_and_constants(c, p):
    g = SlabGrid(Geometry(2, 1, p), 1.0, 16, 4.0, 16)
    d = _random_datum([0.7, -0.3])
    u = solve(g, d, tol=1e-10).values
    v = solve(g, lambda X: c * d(X) + 2.0, tol=1e-10).values
    assert np.allclose(v, c * u + 2.0, atol=1e-6 * max(1.0, c))


def test_translation_by_one_cell():
    nx = 32
    g = SlabGrid(Geometry(2, 1, 3), 1.0, nx, 4.0, 32)
    d = _random_datum([0.5, 0.4])
    u = solve(g, d, tol=1e-10).array()
    v = solve(g, lambda X: d(X + 1.0 / nx), tol=1e-10).array()
    assert np.allclose(np.roll(u, -1, axis=1), v, atol=1e-6)


def test_tilted_maximum_principle():
    g = SlabGrid(Geometry(2, 1, 3), 1.0, 32, 4.0, 32)
    d = _random_datum([1.0])
    f = solve(g, d, tn=TiltedNorm((0.1, 0.3), 3), tol=1e-9)
    assert f.values.max() <= 1.0 + 1e-9 and f.values.min() >= -1.0 - 1e-9
    with pytest.raises(ValueError):
        solve(g, d, tn=TiltedNorm((0.1, 0.3), 4))


def test_cylinder_slab_solves():
    g = SlabGrid(Geometry(3, 1, 3), 1.0, 8, 4.0, 8)
    f = solve(g, lambda X: 1.0 + 0.5 * np.cos(2 * np.pi * X[:, 0]), tol=1e-9)
    v = f.values[np.isfinite(f.values)]
    assert v.max() <= 1.5 + 1e-9 and v.min() >= -1e-9


def test_nonconvergence_carries_history():
    g = SlabGrid(Geometry(2, 1, 3), 1.0, 16, 4.0, 16)
    with pytest.raises(NonConvergenceError) as err:
        solve(g, _random_datum([1.0, 0.5]), max_iter=1, eps_final=1e-12)
    assert len(err.value.history) >= 1


def test_estimator_api():
    g = SlabGrid(Geometry(2, 1, 2), 1.0, 32, 4.0, 128)
    est = PLaplaceSolver(tol=1e-9).fit(g, lambda X: np.cos(2 * np.pi * X[:, 0]))
    assert est.get_params()["tol"] == 1e-9
    pred = est.predict(np.array([[0.0, 0.5], [1.0, 0.5]]))
    assert pred[0] == pytest.approx(pred[1], abs=1e-14)
    assert pred[0] == pytest.approx(EXACT, rel=0.02)


def test_grid_dump_round_trip(tmp_path):
    g = SlabGrid(Geometry(2, 1, 3), 1.0, 8, 4.0, 8)
    f = solve(g, _random_datum([1.0]))
    path = tmp_path / "dump.txt"
    write_grid_dump(f, path)
    header, arr = read_grid_dump(path)
    assert header["n"] == 2 and header["nx"] == 8 and header["p"] == 3.0
    assert np.array_equal(arr, f.array())
    text = write_profile_csv(oscillation_profile(f))
    assert text.splitlines()[0] == "height,max,min,mean"


def test_oscillation_profile_monotone():
    g = SlabGrid.graded(Geometry(2, 1, 3), 1.0, 64, 4.0)
    f = solve(g, _random_datum([1.0, 0.3]))
    prof = oscillation_profile(f)
    assert monotonicity_defect(prof) <= 1e-7
    rate, theta = fit_decay(prof)
    assert rate > 0 and theta < 1


def test_homogeneity_fit_exact_power():
    r = np.geomspace(1, 100, 12)
    fit = HomogeneityFit().fit(r, 3.0 * r ** -0.75)
    assert fit.sigma_ == pytest.approx(0.75, abs=1e-12)
    assert fit.residual_ < 1e-12
    assert fit.predict([10.0])[0] == pytest.approx(3.0 * 10 ** -0.75)
    sigma, _ = fit_homogeneity(list(zip(r, 2.0 * r ** -1.5)))
    assert sigma == pytest.approx(1.5)
    with pytest.raises(DegenerateFitError):
        HomogeneityFit().fit([1.0, 1.5], [1.0, 0.5])
    with pytest.raises(DegenerateFitError):
        HomogeneityFit().fit([1.0, 10.0, 100.0], [1.0, -1.0, 0.5])
    with warnings.catch_warnings(record=True) as caught:
        warnings.simplefilter("always")
        HomogeneityFit().fit([1.0, 4.0, 16.0], [1.0, 0.5, 0.25])
    assert caught


def test_convexity_diagnostic_controls():
    rng = np.random.default_rng(0)
    pts = rng.uniform(-1, 1, (4000, 2))
    pts[:, 1] = np.abs(pts[:, 1]) + 1e-3
    concave = 1.0 - np.einsum("ij,ij->i", pts, pts)  # superlevel sets are discs
    rep = convexity_diagnostic(None, thresholds=[0.2, 0.5, 0.8], points=pts, values=concave,
                               exclude_radius=0.0)
    assert rep.convex
    noise = rng.uniform(0, 1, 4000)
    rep = convexity_diagnostic(None, thresholds=[0.2, 0.5, 0.8], points=pts, values=noise,
                               exclude_radius=0.0)
    assert sum(rep.violations) > 100


def test_resolution_and_regime_errors():
    sec = SectorGrid(Geometry(3, 1, 3), 32, 128, 1e-2, 1e2)
    with pytest.raises(ResolutionError):
        harmonic_measure(sec, 1e-2)
    slab = SlabGrid(Geometry(2, 1, 3), 1.0, 16, 4.0, 16)
    with pytest.raises(ResolutionError):
        harmonic_measure(slab, 0.1)
    with pytest.raises(RegimeError):
        build_psi(slab, 0.2)
    with pytest.raises(ResolutionError):
        build_psi(slab, 0.1)
    with pytest.raises(RegimeError):
        solve(SlabGrid(Geometry(3, 1, 1.5), 1.0, 8, 4.0, 8), lambda X: X[:, 0])


def test_smooth_bump_properties():
    x = np.linspace(-0.2, 0.2, 401)
    b = smooth_bump(x, 0.1)
    assert np.all((b >= 0) & (b <= 1))
    assert np.all(b[np.abs(x) <= 0.05] == 1.0)
    assert np.all(b[np.abs(x) >= 0.1] == 0.0)


def test_sector_harmonic_measure_linear_case():
    # p = 2 half-plane: omega(B(0, r), e_2) = (2/pi) arctan r
    g = SectorGrid(Geometry(2, 1, 2), 64, 256, 1e-3, 1e3)
    m = harmonic_measure(g, 0.05)
    assert m.value == pytest.approx(2 / math.pi * math.atan(0.05), rel=0.05)


def test_tiny_and_huge_data_scale_out():
    g = SlabGrid(Geometry(2, 1, 3.0), 1.0, 16, 4.0, 16)
    d = _random_datum([0.6, -0.2])
    ref = solve(g, d).values
    for c in (1e-235, 1e200):
        u = solve(g, lambda X: c * d(X)).values
        assert np.all(np.isfinite(u))
        assert np.allclose(u / c, ref, atol=1e-9)
