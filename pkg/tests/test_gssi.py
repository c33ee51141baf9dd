import json
import math

import numpy as np
import pytest
from hypothesis import given, strategies as st

from squeezedepth.gssi import (duan_bound, duan_min_k, eval_complete_set_fixed,
                               eval_complete_set_fluctuating)
from squeezedepth.moments import MomentSummary
from squeezedepth.spin import Spin
from squeezedepth.symsim import (CollectiveSpinState, FluctuatingState, PureStateFQ, css,
                                 exact_moments, twin_fock)

FIXED_IDS = ["eq11", "eq12"] + [f"eq1{a}_perm{p}" for a in (3, 4) for p in (1, 2, 3)]
GEN_IDS = ["duan", "gen11", "gen12"] + [f"gen1{a}_perm{p}" for a in (3, 4) for p in (1, 2, 3)]


def ghz(n):
    amps = np.zeros(n + 1)
    amps[0] = amps[-1] = 1 / math.sqrt(2)
    return CollectiveSpinState(n, Spin(1), n, amps)


def random_product(n, rng):
    singles = []
    for _ in range(n):
        v = rng.normal(size=2) + 1j * rng.normal(size=2)
        singles.append(v / np.linalg.norm(v))
    return PureStateFQ.product(singles, 2)


@pytest.mark.parametrize("n", [2, 5, 12])
def test_css_saturates_first_two(n):
    rep = eval_complete_set_fixed(n, exact_moments(css(n)))
    assert rep["eq11"].lhs == pytest.approx(n * (n + 2) / 4, abs=1e-10)
    assert rep["eq11"].margin == pytest.approx(0, abs=1e-10)
    assert rep["eq12"].lhs == pytest.approx(n / 2, abs=1e-10)
    assert not rep.entangled


def test_all_identifiers_present_in_order():
    rep = eval_complete_set_fixed(4, exact_moments(css(4)))
    assert sorted(e.identifier for e in rep.entries) == sorted(FIXED_IDS)
    perms = {e.axes for e in rep.entries if e.axes}
    assert perms == {("x", "y", "z"), ("y", "z", "x"), ("z", "x", "y")}
    fl = eval_complete_set_fluctuating(exact_moments(css(4)))
    assert sorted(e.identifier for e in fl.entries) == sorted(GEN_IDS)


def test_twin_fock_violates_eq13():
    rep = eval_complete_set_fixed(4, exact_moments(twin_fock(4)))
    e = rep["eq13_perm1"]
    assert e.axes == ("x", "y", "z")
    assert e.lhs == pytest.approx(4.0) and e.rhs == pytest.approx(0.0)
    assert e.satisfied is False
    assert rep.entangled


def test_ghz_saturates_without_violation():
    rep = eval_complete_set_fixed(4, exact_moments(ghz(4)))
    assert not rep.entangled
    assert rep["eq11"].margin == pytest.approx(0, abs=1e-10)
    assert rep["eq13_perm2"].margin == pytest.approx(0, abs=1e-10)
    assert rep["eq13_perm3"].margin == pytest.approx(0, abs=1e-10)
    assert rep["eq14_perm1"].margin == pytest.approx(0, abs=1e-10)


def test_missing_moments_flagged_not_raised():
    m = MomentSummary(Spin(1), mean_n=4, mean_n2=16, mean_j_n=0.0)
    rep = eval_complete_set_fixed(4, m)
    assert all(not e.evaluable and e.satisfied is None for e in rep.entries)
    assert not rep.entangled
    assert rep.available == {"second_moments": False, "variances": False}
    fl = eval_complete_set_fluctuating(m)
    assert fl["duan"].evaluable is False


def test_fixed_requires_n_at_least_two():
    with pytest.raises(ValueError):
        eval_complete_set_fixed(1, exact_moments(css(1)))


def test_poissonian_css_mixture():
    ns = np.arange(8, 13)
    w = np.array([10.0**k / math.factorial(k) for k in ns])
    w /= w.sum()
    mix = FluctuatingState(tuple((q, css(int(k))) for q, k in zip(w, ns)))
    m = exact_moments(mix)
    rep = eval_complete_set_fluctuating(m)
    assert rep["gen11"].margin == pytest.approx(0, abs=1e-10)
    # number fluctuations add Var(N) j^2 to the variance along the polarization
    var_n = m.mean_n2 - m.mean_n**2
    assert rep["gen12"].margin == pytest.approx(var_n / 4, abs=1e-10)
    assert not rep.entangled


def test_n_one_sector_is_rejected():
    mix = FluctuatingState(((0.5, css(1)), (0.5, css(3))))
    with pytest.raises(ValueError, match="Q_0 = Q_1 = 0"):
        eval_complete_set_fluctuating(exact_moments(mix))


@pytest.mark.parametrize("state", [twin_fock(4), ghz(5), css(6, "x")], ids=["tf", "ghz", "css"])
def test_fixed_number_reduction(state, rng):
    m = exact_moments(state)
    n = m.fixed_n
    fixed = eval_complete_set_fixed(n, m)
    gen = eval_complete_set_fluctuating(m)
    assert gen["gen11"].margin == pytest.approx(fixed["eq11"].margin, abs=1e-12)
    assert gen["gen12"].margin == pytest.approx(fixed["eq12"].margin, abs=1e-12)
    for p in (1, 2, 3):
        # the number-weighted forms are the fixed forms divided by N - 1
        for a in (3, 4):
            g, f = gen[f"gen1{a}_perm{p}"], fixed[f"eq1{a}_perm{p}"]
            assert (n - 1) * g.margin == pytest.approx(f.margin, abs=1e-12)
            assert g.satisfied == f.satisfied or abs(f.margin) < 1e-12


def test_random_product_states_are_never_flagged():
    rng = np.random.default_rng(2024)
    for _ in range(500):
        ns = rng.integers(2, 7, size=rng.integers(1, 4))
        q = rng.dirichlet(np.ones(len(ns)))
        mix = FluctuatingState(tuple((w, random_product(int(k), rng)) for w, k in zip(q, ns)))
        m = exact_moments(mix)
        rep = eval_complete_set_fluctuating(m)
        bad = [e.identifier for e in rep.entries if e.satisfied is False and e.margin < -1e-10]
        assert not bad
        assert duan_min_k(m).minimal_consistent_k == 1
        if m.fixed_n is not None:
            fx = eval_complete_set_fixed(m.fixed_n, m)
            assert all(e.margin > -1e-10 for e in fx.entries)


@pytest.mark.parametrize("n", [4, 10, 50])
def test_twin_fock_duan(n):
    m = exact_moments(twin_fock(n))
    w = m.weighted["inv_n"]["x"] + m.weighted["inv_n"]["y"]
    assert w == pytest.approx((n + 2) / 4, abs=1e-10)
    assert duan_bound(n, m) == pytest.approx(0, abs=1e-10)
    res = duan_min_k(m)
    assert res.minimal_consistent_k == n == res.depth_claim
    assert duan_bound(n - 1, m) > 0


def test_css_duan():
    m = exact_moments(css(8))
    assert m.weighted["inv_n"]["x"] + m.weighted["inv_n"]["y"] == pytest.approx(0.5)
    for k in (1, 2, 7, 100):
        assert duan_bound(k, m) == pytest.approx(1 / (2 * (k + 2)) - 0.25)
    assert duan_min_k(m).minimal_consistent_k == 1


def test_huge_variance_gives_k_one():
    m = exact_moments(twin_fock(10)).with_(variances={"x": 1.0, "y": 1.0, "z": 1e6})
    assert duan_min_k(m).minimal_consistent_k == 1


def test_duan_limit_and_errors():
    m = exact_moments(twin_fock(6))
    assert duan_bound(10**9, m) == pytest.approx(-0.25, abs=1e-8)
    with pytest.raises(ValueError):
        duan_bound(0, m)
    with pytest.raises(ValueError):
        duan_min_k(MomentSummary(Spin(1), 4, 16, 0.0))


def test_duan_tested_k_reported():
    m = exact_moments(twin_fock(10))
    res = duan_min_k(m, k_tested=9)
    assert res.violated_at_k_tested is True
    assert json.loads(res.to_json())["bounds"]["9"] > 0


@given(w=st.floats(1e-6, 1e4), var=st.floats(0, 1e3))
def test_min_k_matches_direct_scan(w, var):
    m = MomentSummary(Spin(1), 10, 100, 0.0, variances={"x": 0.0, "y": 0.0, "z": var},
                      weighted={"inv_n": {"x": w / 2, "y": w / 2, "z": 0.0}})
    k = duan_min_k(m).minimal_consistent_k
    assert var >= duan_bound(k, m)
    assert k == 1 or var < duan_bound(k - 1, m)
    bounds = [duan_bound(kk, m) for kk in range(1, 30)]
    assert all(b > a_ for a_, b in zip(bounds[1:], bounds))


def test_report_json_roundtrip():
    rep = eval_complete_set_fluctuating(exact_moments(twin_fock(4)))
    data = json.loads(rep.to_json())
    assert data["entangled"] is True
    assert data["mode"] == "fluctuating"
    assert {e["identifier"] for e in data["entries"]} == set(GEN_IDS)
