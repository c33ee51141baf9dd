import json
import math

import numpy as np
import pytest

from squeezedepth.depth import (InconsistentMomentsError, NonPrefixExclusionError, certify_depth,
                                default_k_max, phase_uncertainty, shot_noise_limit, sm_bound,
                                wineland_xi2)
from squeezedepth.fj import CurveCache, FjCurve, default_cache, fj_exact
from squeezedepth.moments import MomentSummary
from squeezedepth.spin import Spin
from squeezedepth.symsim import (beta_of_alpha, css, exact_moments, psi_alpha, squeezed_block_state,
                                 symmetrize, twin_fock)

HALF = Spin(1)


def summary(n, jn, var, se=None, j=HALF, fixed=None):
    return MomentSummary(spin=j, mean_n=n, mean_n2=n * n, mean_j_n=jn, var_j_perp=var,
                         se=se or {}, fixed_n=fixed)


def test_bound_at_full_polarization():
    assert sm_bound(1, 0.5, summary(100, 50, 30)) == 25


def test_bound_vanishes_without_mean_spin():
    for k in (1, 3, 7):
        assert sm_bound(k, 0.5, summary(40, 0.0, 1.0)) == 0


def test_spin_half_bound_is_wineland(rng):
    for _ in range(50):
        n = rng.uniform(2, 500)
        jn = rng.uniform(-1, 1) * n / 2
        assert math.isclose(sm_bound(1, 0.5, summary(n, jn, 1.0)), jn**2 / n, rel_tol=1e-12)


def test_negative_mean_spin_by_symmetry():
    a = sm_bound(3, 0.5, summary(30, 9.0, 1.0))
    b = sm_bound(3, 0.5, summary(30, -9.0, 1.0))
    assert a == b


def test_inconsistent_moments_rejected():
    with pytest.raises(ValueError):
        sm_bound(1, 0.5, summary(10, 5.1, 1.0))
    # passes the summary check (relative 1e-9) only by a hair; the bound guard is absolute in X
    m = summary(10, 5.0 * (1 + 5e-10), 1.0)
    assert sm_bound(1, 0.5, m) == pytest.approx(2.5)
    assert issubclass(InconsistentMomentsError, ValueError)


def test_bound_requires_positive_k():
    with pytest.raises(ValueError):
        sm_bound(0, 0.5, summary(10, 2, 1))


def test_css_depth_one():
    m = exact_moments(css(30))
    cert = certify_depth(m, k_max=10)
    assert cert.claimed_depth == 1 and cert.k_excluded_max == 0
    assert cert.per_k[0].margin == pytest.approx(0, abs=1e-12)
    assert wineland_xi2(m) == pytest.approx(1)


def test_twin_fock_blind():
    cert = certify_depth(exact_moments(twin_fock(10)), k_max=10)
    assert cert.claimed_depth == 1
    assert any("blind" in w for w in cert.warnings)
    assert cert.xi2 is None


def test_block_state_just_below_k5_bound():
    m = exact_moments(squeezed_block_state(10, 5, 0.8))
    # product of blocks: variance is the sum of the block minima
    assert m.var_j_perp == pytest.approx(25 * fj_exact(2.5, 0.8), rel=1e-9)
    honest = certify_depth(m, k_max=10)
    assert honest.claimed_depth == 5
    b5 = honest.per_k[4].bound
    doctored = certify_depth(m.with_(var_j_perp=b5 * (1 - 1e-9)), k_max=10)
    assert doctored.claimed_depth == 6
    assert [e.excluded for e in doctored.per_k] == [True] * 5 + [False] * 5


def test_bounds_nonincreasing_and_scaling(rng):
    for _ in range(10):
        n = rng.uniform(5, 40)
        jn = rng.uniform(0.05, 0.95) * n / 2
        var = rng.uniform(0, 3)
        m = summary(n, jn, var)
        cert = certify_depth(m, k_max=min(5, math.ceil(n)))
        bounds = [e.bound for e in cert.per_k]
        assert all(b2 <= b1 + 1e-12 for b1, b2 in zip(bounds, bounds[1:]))
        lam = rng.uniform(0.5, 4)
        scaled = certify_depth(summary(lam * n, lam * jn, lam * var), k_max=len(bounds))
        assert np.allclose([e.bound for e in scaled.per_k], lam * np.array(bounds), rtol=1e-12)
        assert [e.excluded for e in scaled.per_k] == [e.excluded for e in cert.per_k]


def test_certify_never_claims_more_than_interpolate(rng):
    for _ in range(20):
        n = 20.0
        jn = rng.uniform(0.2, 0.98) * 10
        var = rng.uniform(0, 3)
        m = summary(n, jn, var)
        c = certify_depth(m, k_max=8, mode="certify")
        i = certify_depth(m, k_max=8, mode="interpolate")
        assert c.claimed_depth <= i.claimed_depth


def test_significance_gate():
    m = summary(100, 40, 15.9, se={"var_j_perp": 0.5, "mean_j_n": 0.0})
    gated = certify_depth(m, k_max=3)
    raw = certify_depth(m, k_max=3, sigma=None)
    assert raw.claimed_depth >= 2
    assert gated.claimed_depth == 1
    assert gated.per_k[0].significance == pytest.approx(-0.2)


def test_non_prefix_is_an_error():
    class Skewed(CurveCache):
        def get(self, j):
            spin = Spin.from_value(j)
            f = 0.01 if spin.two_j == 1 else 0.4
            return FjCurve(spin, [0, 1], [0, 0.5], [0, f])

    m = summary(10, 2.5, 1.5)
    with pytest.raises((NonPrefixExclusionError, RuntimeError)):
        certify_depth(m, k_max=3, curves=Skewed())


def test_k_max_limits():
    m = summary(4.2, 1.0, 0.3)
    assert default_k_max(m, 0.5) == 5
    with pytest.raises(ValueError):
        certify_depth(m, k_max=6)
    assert default_k_max(summary(400, 10, 1), 0.5) == 50


def test_non_integer_mean_number_accepted():
    m = MomentSummary(HALF, mean_n=7.3, mean_n2=60, mean_j_n=3.0, var_j_perp=0.5)
    cert = certify_depth(m, k_max=8)
    assert 1 <= cert.claimed_depth <= 8


def test_wineland_examples():
    a = 2 / 3
    m = exact_moments(symmetrize(psi_alpha(a)))
    assert beta_of_alpha(a) == pytest.approx(0.8)
    assert wineland_xi2(m) == pytest.approx(7 / 8, abs=1e-12)
    assert wineland_xi2(summary(10, 3, 0.0)) == 0
    with pytest.raises(ValueError):
        wineland_xi2(summary(10, 0.0, 1.0))


def test_phase_uncertainty_examples():
    m = summary(100, 40, 16.0)
    assert wineland_xi2(m) == pytest.approx(1)
    assert phase_uncertainty(m) == pytest.approx(0.1)
    two = summary(2, 0.8, 7 / 8 * 0.64 / 2)
    assert phase_uncertainty(two) == pytest.approx(math.sqrt(7 / 8) / math.sqrt(2))
    assert phase_uncertainty(two) == pytest.approx(0.6614, abs=1e-4)
    noisy = summary(100, 40, 64.0)
    assert phase_uncertainty(noisy) == pytest.approx(0.2)
    assert phase_uncertainty(noisy) > shot_noise_limit(noisy)


def test_certificate_json_is_stable():
    m = summary(100, 40, 10.0, se={"var_j_perp": 0.1, "mean_j_n": 0.1, "mean_n": 0.0})
    a = certify_depth(m, k_max=4).to_json()
    b = certify_depth(m, k_max=4).to_json()
    assert a == b
    data = json.loads(a)
    assert data["claimed_depth"] == data["k_excluded_max"] + 1
    assert list(data) == sorted(data)


def test_shared_cache_is_used():
    assert default_cache().get(1) is default_cache().get(Spin(2))
