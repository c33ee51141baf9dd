import numpy as np
import pytest
from hypothesis import given
from hypothesis import strategies as st

from squeezedepth.fj import (CurveCache, EvalMode, FjCurve, IncompleteScanError, ScanGrid,
                             brute_force_fj, compute_fj, default_cache, eval_fj, fj_exact,
                             minimal_variance_state)
from squeezedepth.spin import Spin, build_spin_operators

SMALL = [Spin(t) for t in (1, 2, 3, 4, 5, 7, 10)]


@pytest.fixture(scope="module")
def curves():
    return default_cache()


def test_spin_half_curve_is_parabola(curves):
    c = curves.get(0.5)
    assert np.max(np.abs(c.f - c.x**2 / 2)) < 1e-9


@pytest.mark.parametrize("spin", SMALL, ids=str)
def test_curve_invariants(curves, spin):
    c = curves.get(spin)
    c.check()
    assert c.points[0] == (0.0, 0.0, 0.0)
    assert c.x[-1] > 1 - 1e-6
    # F approaches 1/2 like 1/2 - c sqrt(1 - X)
    assert abs(c.f[-1] - 0.5) < 5e-3
    assert np.all(np.diff(c.x) > 0) and np.all(np.diff(c.f) >= 0)
    assert c.metadata["dropped_off_hull"] == 0


@pytest.mark.parametrize("spin", SMALL, ids=str)
def test_convex_on_every_triple(curves, spin):
    c = curves.get(spin)
    i, j, k = np.meshgrid(*(np.arange(0, len(c), 7),) * 3, indexing="ij")
    mask = (i < j) & (j < k)
    x1, x2, x3 = c.x[i[mask]], c.x[j[mask]], c.x[k[mask]]
    f1, f2, f3 = c.f[i[mask]], c.f[j[mask]], c.f[k[mask]]
    chord = f1 + (f3 - f1) * (x2 - x1) / (x3 - x1)
    assert np.all(f2 <= chord + 1e-10)


@pytest.mark.parametrize("spin", SMALL, ids=str)
def test_sandwich(curves, spin, rng):
    c = curves.get(spin)
    xs = rng.uniform(0, 1, 1000)
    cert = c.eval(xs, "certify")
    interp = c.eval(xs, "interpolate")
    assert np.all(cert <= interp + 1e-15)
    assert np.all(cert >= 0)


@pytest.mark.parametrize("spin", [Spin(1), Spin(4), Spin(9)], ids=str)
def test_certify_below_exact_below_interpolate(curves, spin):
    c = curves.get(spin)
    for x in (0.05, 0.37, 0.8, 0.97):
        exact = fj_exact(spin, x)
        assert c.eval(x, "certify") <= exact + 1e-12
        assert exact <= c.eval(x, "interpolate") + 1e-12


def test_endpoints_both_modes(curves):
    for spin in SMALL:
        c = curves.get(spin)
        for mode in EvalMode:
            assert c.eval(0.0, mode) == 0.0
            assert c.eval(1.0, mode) == 0.5


def test_modes_agree_at_scanned_points(curves):
    c = curves.get(3)
    xs = c.x[1:-1:10]
    assert np.max(np.abs(c.eval(xs, "certify") - c.eval(xs, "interpolate"))) < 1e-10


def test_spin_half_value_at_0_6():
    c = default_cache().get(0.5)
    assert abs(c.eval(0.6, "interpolate") - 0.18) < 1e-15
    assert abs(c.eval(0.6, "certify") - 0.18) < 1e-15
    # the scanned points alone, linearly interpolated, on a finer grid
    dense = compute_fj(0.5, ScanGrid(n_points=4000))
    assert abs(np.interp(0.6, dense.x, dense.f) - 0.18) < 1e-6
    lines = dense.f + dense.mu * (0.6 - dense.x)
    assert 0.18 - 1e-4 <= lines.max() <= 0.18 + 1e-15


def test_eval_rejects_out_of_range(curves):
    c = curves.get(1)
    for bad in (-0.1, 1.1, np.nan):
        with pytest.raises(ValueError):
            c.eval(bad)
    empty = FjCurve(Spin(1), [], [], [])
    with pytest.raises(ValueError):
        eval_fj(empty, 0.5)


def test_incomplete_scan():
    with pytest.raises(IncompleteScanError):
        compute_fj(2, ScanGrid(n_points=20, mu_max=0.05))


def test_scan_grid_validation():
    with pytest.raises(ValueError):
        ScanGrid(n_points=2)
    with pytest.raises(ValueError):
        ScanGrid(mu_min=0)
    with pytest.raises(ValueError):
        compute_fj(0)


def test_row_count_matches_grid():
    assert len(compute_fj(5, ScanGrid(n_points=400))) == 400


def test_csv_round_trip(tmp_path, curves):
    c = curves.get(1.5)
    path = tmp_path / "c.csv"
    text = c.to_csv(path)
    assert text.startswith("mu,X,F\n") and "\r" not in text
    back = FjCurve.from_csv(path, 1.5)
    assert np.array_equal(back.x, c.x) and np.array_equal(back.f, c.f) and np.array_equal(back.mu, c.mu)
    with pytest.raises(ValueError):
        FjCurve.from_csv("a,b\n1,2\n", 1)


def test_cache_persistence(tmp_path):
    cache = CurveCache(ScanGrid(n_points=50), tmp_path)
    c1 = cache.get(1)
    assert cache.get(1) is c1
    assert len(list(tmp_path.glob("*.csv"))) == 1
    fresh = CurveCache(ScanGrid(n_points=50), tmp_path)
    assert np.array_equal(fresh.get(1).f, c1.f)


def test_brute_force_examples():
    assert abs(brute_force_fj(0.5, 1.0) - 0.25) < 1e-8
    assert abs(brute_force_fj(0.5, 0.5) - 1 / 16) < 1e-8
    assert brute_force_fj(1, 0.0) < 1e-8
    with pytest.raises(ValueError):
        brute_force_fj(0.5, 1.2)
    with pytest.raises(ValueError):
        brute_force_fj(2, 0.5)


@pytest.mark.parametrize("j", [0.5, 1, 1.5])
def test_oracle_agreement(curves, j):
    c = curves.get(j)
    for x in np.linspace(0, 1, 11):
        assert abs(c.eval(x, "interpolate") - brute_force_fj(j, x) / j) <= 1e-4


def test_exact_matches_brute_force_tightly():
    for j in (0.5, 1, 1.5):
        for x in (0.2, 0.55, 0.9):
            assert abs(fj_exact(j, x) - brute_force_fj(j, x) / j) < 1e-7


@given(st.integers(1, 12), st.floats(0.01, 0.98))
def test_minimal_variance_state_attains_exact(two_j, x):
    spin = Spin(two_j)
    psi, xa, f = minimal_variance_state(spin, x)
    ops = build_spin_operators(spin)
    jz = np.vdot(psi, ops.jz @ psi).real / spin.j
    mean_x = np.vdot(psi, ops.jx @ psi).real
    var = np.vdot(psi, ops.jx @ ops.jx @ psi).real - mean_x**2
    assert abs(jz - x) < 1e-9 and abs(xa - x) < 1e-9
    assert abs(var / spin.j - f) < 1e-12
    assert abs(f - fj_exact(spin, x)) < 1e-8


def test_half_integer_needs_shift():
    # with <j_x> forced to zero, spin 3/2 would give F(0) > 0
    c = default_cache().get(1.5)
    assert c.metadata["max_shift_mismatch"] < 1e-6
    assert fj_exact(1.5, 1e-3) < 1e-5


ALL_SPINS = [Spin(t) for t in range(1, 21)]
X_GRID = np.linspace(0, 1, 201)


@pytest.mark.slow
@pytest.mark.parametrize("mode", list(EvalMode), ids=lambda m: m.value)
def test_larger_spin_has_smaller_curve(curves, mode):
    vals = {s: curves.get(s).eval(X_GRID, mode) for s in ALL_SPINS}
    for a in ALL_SPINS:
        for b in ALL_SPINS:
            if b.two_j > a.two_j:
                assert np.all(vals[b] <= vals[a] + 1e-9), (a, b)


@pytest.mark.slow
@pytest.mark.parametrize("mode", list(EvalMode), ids=lambda m: m.value)
def test_rescaled_spin_inequality(curves, mode):
    for a in ALL_SPINS:
        fa = a.j * curves.get(a).eval(X_GRID, mode)
        for b in ALL_SPINS:
            if b.two_j > a.two_j:
                lhs = b.j * curves.get(b).eval(a.j / b.j * X_GRID, mode)
                assert np.all(lhs <= fa + 1e-9), (a, b)
