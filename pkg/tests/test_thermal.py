import dataclasses
import json
import math
import time

import numpy as np
import pytest
from hypothesis import given, settings, strategies as st

from squeezedepth.thermal import (HBAR, K_B, CondensedPhaseError, TrapSpec, bose_series,
                                  critical_number, direct_level_sum, occupation, solve_mu,
                                  total_number)

REFERENCE_TRAP = TrapSpec(omega_z=2.0, omega_perp=1000.0, temperature=30e-6, n_total=5e5)


@pytest.fixture(scope="module")
def report():
    return solve_mu(REFERENCE_TRAP)


def test_constants_are_codata_exact():
    assert HBAR == 1.054571817e-34
    assert K_B == 1.380649e-23


def test_reference_trap(report):
    assert report.beta_mu == pytest.approx(-12.41, abs=0.02)
    assert report.ground_occupation == pytest.approx(4.1e-6, rel=0.05)
    assert report.max_double_occupancy_ratio == pytest.approx(4.1e-6, rel=0.05)
    assert report.distinguishable and report.threshold == 1e-3
    assert report.relative_residual < 1e-10
    assert report.beta_mu < report.beta_e0
    assert 0 < report.max_double_occupancy_ratio < 1


def test_reference_trap_is_fast():
    t0 = time.perf_counter()
    solve_mu(REFERENCE_TRAP)
    assert time.perf_counter() - t0 < 1.0


def test_zero_point_convention():
    # E_0 = hbar (omega_perp + omega_z / 2), with frequencies given in units of 2 pi / s
    e0 = HBAR * 2 * math.pi * (1000 + 1)
    assert REFERENCE_TRAP.level_energy(0, 0, 0) == pytest.approx(e0, rel=1e-15)
    assert REFERENCE_TRAP.beta_e0 == pytest.approx(e0 / (K_B * 30e-6), rel=1e-12)
    assert REFERENCE_TRAP.beta_e0 == pytest.approx(1.6e-3, rel=0.02)


def test_known_fugacity_gives_reference_number():
    assert total_number(math.exp(-12.41), REFERENCE_TRAP) == pytest.approx(5e5, rel=0.02)


def test_small_fugacity_vanishes():
    assert total_number(1e-30, REFERENCE_TRAP) < 1e-15


def test_number_is_monotone_in_fugacity():
    zs = np.exp(np.linspace(-30, -5, 12))
    ns = [total_number(z, REFERENCE_TRAP) for z in zs]
    assert all(b > a for a, b in zip(ns, ns[1:]))


@pytest.mark.parametrize("beta_mu", [-3.0, -0.5, 0.0, 0.5])
def test_series_matches_level_sum(beta_mu):
    b = [0.5, 0.5, 0.5]
    series, terms = bose_series(beta_mu, b)
    assert terms > 1
    assert series == pytest.approx(direct_level_sum(beta_mu, b, 60), rel=1e-10)


@settings(max_examples=25)
@given(st.floats(0.3, 3.0), st.floats(0.3, 3.0), st.floats(-8.0, 0.0))
def test_series_matches_level_sum_random(bx, bz, beta_mu):
    b = [bx, bx, bz]
    assert bose_series(beta_mu, b)[0] == pytest.approx(direct_level_sum(beta_mu, b, 80), rel=1e-10)


def test_round_trip(report):
    n = total_number(math.exp(report.beta_mu), REFERENCE_TRAP)
    assert n == pytest.approx(REFERENCE_TRAP.n_total, rel=1e-9)


def test_doubling_adds_ln2(report):
    doubled = solve_mu(dataclasses.replace(REFERENCE_TRAP, n_total=1e6))
    assert doubled.beta_mu - report.beta_mu == pytest.approx(math.log(2), abs=1e-4)


def test_occupation(report):
    n0 = occupation(report, 0, 0, 0)
    assert n0 == pytest.approx(report.ground_occupation, rel=1e-12)
    assert occupation(report, 0, 0, 1) <= n0
    assert occupation(report, 1, 0, 0) <= occupation(report, 0, 0, 1)
    with pytest.raises(ValueError):
        occupation(report, -1, 0, 0)


def test_unit_exponent_occupation(report):
    # place mu one k_B T below the (0, 0, 3) level
    e = REFERENCE_TRAP.beta * REFERENCE_TRAP.level_energy(0, 0, 3)
    shifted = dataclasses.replace(report, beta_mu=e - 1.0)
    assert occupation(shifted, 0, 0, 3) == pytest.approx(1 / (math.e - 1))
    assert occupation(shifted, 0, 0, 3) == pytest.approx(0.582, abs=5e-4)


def test_condensed_regime_is_reported():
    trap = dataclasses.replace(REFERENCE_TRAP, n_total=1e13)
    with pytest.raises(CondensedPhaseError, match="critical N"):
        solve_mu(trap)
    assert critical_number(trap) == pytest.approx(1.468e11, rel=0.01)
    with pytest.raises(CondensedPhaseError):
        total_number(math.exp(REFERENCE_TRAP.beta_e0), REFERENCE_TRAP)


def test_invalid_inputs():
    with pytest.raises(ValueError):
        TrapSpec(0, 1, 1, 1)
    with pytest.raises(ValueError):
        TrapSpec(1, 1, -1, 1)
    with pytest.raises(ValueError):
        total_number(0.0, REFERENCE_TRAP)


def test_threshold_controls_verdict():
    strict = solve_mu(REFERENCE_TRAP, threshold=1e-7)
    assert not strict.distinguishable


def test_report_json(report):
    data = json.loads(report.to_json())
    assert data["beta_mu"] == report.beta_mu
    assert isinstance(data["series_terms"], int)
    assert data["units"]["temperature"] == "K"
