"""Entanglement-depth certification from the mean spin and transverse variance.

A k-producible state of spin-j particles (fixed or fluctuating number) obeys

    (Delta J_perp)^2 >= <N> j F_{kj}( <J_n> / (<N> j) ),

so a measured variance below this bound excludes k-producibility and shows
an entanglement depth of at least k + 1.
"""
from __future__ import annotations

import json
import math
from dataclasses import asdict, dataclass, field

import numpy as np

from .fj import CurveCache, EvalMode, default_cache
from .moments import MomentSummary
from .spin import Spin

X_TOL = 1e-9
BLIND_X = 1e-12


class InconsistentMomentsError(ValueError):
    """Moments imply |<J_n>| > <N> j."""


class NonPrefixExclusionError(RuntimeError):
    """Excluded k values do not form a prefix 1..K; no certificate issued."""


@dataclass(frozen=True)
class BoundEntry:
    k: int
    bound: float
    margin: float
    excluded: bool
    margin_se: float | None = None
    significance: float | None = None


@dataclass(frozen=True)
class DepthCertificate:
    spin_j: str
    k_excluded_max: int
    claimed_depth: int
    per_k: tuple
    xi2: float | None
    mode: str
    sigma_threshold: float | None
    polarization: float
    warnings: tuple = ()

    def to_dict(self) -> dict:
        d = asdict(self)
        d["per_k"] = [asdict(e) for e in self.per_k]
        d["warnings"] = list(self.warnings)
        return d

    def to_json(self) -> str:
        return json.dumps(_finite(self.to_dict()), indent=2, sort_keys=True) + "\n"


def _finite(obj):
    # JSON has no inf/nan
    if isinstance(obj, float) and not math.isfinite(obj):
        return None
    if isinstance(obj, dict):
        return {k: _finite(v) for k, v in obj.items()}
    if isinstance(obj, (list, tuple)):
        return [_finite(v) for v in obj]
    return obj


def _polarization(moments: MomentSummary, j: Spin) -> float:
    x = moments.mean_j_n / (moments.mean_n * j.j)
    if abs(x) > 1 + X_TOL:
        raise InconsistentMomentsError(
            f"<J_n>/(<N> j) = {x:.12g} exceeds 1; the moments are inconsistent")
    # F is even in X; the sign of <J_n> only fixes the orientation of n
    return min(abs(x), 1.0)


def sm_bound(k: int, j, moments: MomentSummary, curves: CurveCache | None = None,
             mode: EvalMode | str = EvalMode.CERTIFY) -> float:
    """Lower bound on (Delta J_perp)^2 for k-producible states."""
    if int(k) != k or k < 1:
        raise ValueError("k must be a positive integer")
    spin = Spin.from_value(j)
    x = _polarization(moments, spin)
    if x == 0.0:
        return 0.0
    curves = curves or default_cache()
    f = curves.get(spin * int(k)).eval(x, mode)
    return moments.mean_n * spin.j * f


def _bound_slope(k, spin, moments, curves, mode, x):
    """d bound / d<J_n> and d bound / d<N> by central differences in X."""
    h = 1e-6
    lo, hi = max(x - h, 0.0), min(x + h, 1.0)
    if hi <= lo:
        return 0.0, 0.0
    curve = curves.get(spin * int(k))
    df_dx = (curve.eval(hi, mode) - curve.eval(lo, mode)) / (hi - lo)
    f = curve.eval(x, mode)
    n = moments.mean_n
    # bound = n j F(Jn/(n j)):  d/dJn = F'(X);  d/dn = j F - X F'
    return df_dx, spin.j * f - x * df_dx


def _margin_se(k, spin, moments, curves, mode, x):
    se = moments.se or {}
    if "var_j_perp" not in se or "mean_j_n" not in se:
        return None
    d_jn, d_n = _bound_slope(k, spin, moments, curves, mode, x)
    parts = [se.get("var_j_perp", 0.0), d_jn * se.get("mean_j_n", 0.0)]
    if moments.fixed_n is None:
        parts.append(d_n * se.get("mean_n", 0.0))
    vals = np.array([p for p in parts if p is not None and np.isfinite(p)])
    return float(np.sqrt(np.sum(vals**2)))


def wineland_xi2(moments: MomentSummary) -> float:
    """<N> (Delta J_perp)^2 / <J_n>^2 (N itself when the number is fixed)."""
    if moments.mean_j_n == 0:
        raise ValueError("xi^2 is undefined for <J_n> = 0 (e.g. twin-Fock states)")
    if moments.var_j_perp is None:
        raise ValueError("transverse variance missing")
    n = moments.fixed_n if moments.fixed_n is not None else moments.mean_n
    return n * moments.var_j_perp / moments.mean_j_n**2


def shot_noise_limit(moments: MomentSummary) -> float:
    n = moments.fixed_n if moments.fixed_n is not None else moments.mean_n
    return 1.0 / math.sqrt(n)


def phase_uncertainty(moments: MomentSummary) -> float:
    """Phase uncertainty xi / sqrt(<N>) in radians; compare with ``shot_noise_limit``."""
    return math.sqrt(wineland_xi2(moments)) * shot_noise_limit(moments)


def default_k_max(moments: MomentSummary, j, max_curve_two_j: int = 50) -> int:
    spin = Spin.from_value(j)
    return max(1, min(math.ceil(moments.mean_n), max_curve_two_j // spin.two_j))


def certify_depth(moments: MomentSummary, j=None, k_max: int | None = None,
                  curves: CurveCache | None = None, mode: EvalMode | str = EvalMode.CERTIFY,
                  sigma: float | None = 3.0) -> DepthCertificate:
    """Scan k = 1..k_max and report the largest excluded k.

    With standard errors present, a k counts as excluded only when the margin
    is below ``-sigma`` propagated standard errors (``sigma=None`` or 0 uses
    the raw strict inequality).
    """
    spin = Spin.from_value(j if j is not None else moments.spin)
    mode = EvalMode(mode)
    curves = curves or default_cache()
    if moments.var_j_perp is None:
        raise ValueError("certification needs the transverse variance")
    n_ceil = max(1, math.ceil(moments.mean_n - 1e-9))
    if k_max is None:
        k_max = default_k_max(moments, spin)
    if k_max < 1 or k_max > n_ceil:
        raise ValueError(f"k_max must lie in [1, ceil(<N>) = {n_ceil}], got {k_max}")

    x = _polarization(moments, spin)
    warnings = []
    blind = x <= BLIND_X
    se_jn = (moments.se or {}).get("mean_j_n")
    if not blind and se_jn and sigma and abs(moments.mean_j_n) < sigma * se_jn:
        blind = True
    if blind:
        warnings.append("mean spin <J_n> is consistent with zero: the squeezing witness is blind "
                        "here (e.g. twin-Fock states); no depth is claimed")

    entries = []
    for k in range(1, k_max + 1):
        b = sm_bound(k, spin, moments, curves, mode)
        margin = moments.var_j_perp - b
        mse = None if blind else _margin_se(k, spin, moments, curves, mode, x)
        if mse is not None and sigma and mse > 0:
            signif = margin / mse
            excluded = signif < -sigma
        else:
            signif = None
            excluded = margin < 0
        entries.append(BoundEntry(k, b, margin, bool(excluded and not blind), mse, signif))

    flags = [e.excluded for e in entries]
    k_exc = sum(flags)
    if flags != [True] * k_exc + [False] * (len(flags) - k_exc):
        raise NonPrefixExclusionError(f"excluded set is not a prefix: {flags}")
    for a, b in zip(entries, entries[1:]):
        if b.bound > a.bound + 1e-9 * max(1.0, abs(a.bound)):
            raise RuntimeError(f"bound increased from k={a.k} to k={b.k}")
    claimed = k_exc + 1
    if claimed > n_ceil:
        warnings.append(f"every k up to {k_max} excluded; depth capped at ceil(<N>) = {n_ceil}")
        claimed = n_ceil
    try:
        xi2 = wineland_xi2(moments)
    except ValueError:
        xi2 = None
    return DepthCertificate(
        spin_j=str(spin),
        k_excluded_max=k_exc,
        claimed_depth=claimed,
        per_k=tuple(entries),
        xi2=xi2,
        mode=mode.value,
        sigma_threshold=sigma if sigma else None,
        polarization=x,
        warnings=tuple(warnings),
    )
