"""Complete set of generalized spin-squeezing inequalities and the Duan bound.

All inequalities here are for spin-1/2 particles.  Each entry reports a
margin that is nonnegative when the inequality holds; equality counts as
satisfied, so entanglement is flagged only on strict violation (beyond
floating-point roundoff, see ``ROUNDOFF_RTOL``).
"""
from __future__ import annotations

import json
import math
from dataclasses import asdict, dataclass, field

from .moments import AXES, MomentSummary

# (i, j, l) assignments; i and j enter symmetrically so three cover all six
PERMUTATIONS = (("x", "y", "z"), ("y", "z", "x"), ("z", "x", "y"))

# exact moments of saturating states (CSS, GHZ) carry roundoff of a few ulps;
# a violation must exceed this fraction of the compared magnitudes
ROUNDOFF_RTOL = 1e-12


@dataclass(frozen=True)
class InequalityEntry:
    identifier: str
    lhs: float | None
    rhs: float | None
    relation: str
    margin: float | None
    satisfied: bool | None
    axes: tuple | None = None
    evaluable: bool = True
    note: str = ""


def _entry(identifier, lhs, rhs, relation, axes=None):
    margin = rhs - lhs if relation == "<=" else lhs - rhs
    slack = ROUNDOFF_RTOL * max(1.0, abs(lhs), abs(rhs))
    return InequalityEntry(identifier, lhs, rhs, relation, margin, bool(margin >= -slack), axes)


def _missing(identifier, relation, what, axes=None):
    return InequalityEntry(identifier, None, None, relation, None, None, axes, False,
                           f"not evaluable: missing {what}")


@dataclass(frozen=True)
class InequalityReport:
    mode: str
    entries: tuple
    available: dict = field(default_factory=dict)

    @property
    def entangled(self) -> bool:
        return any(e.satisfied is False for e in self.entries)

    def __getitem__(self, identifier) -> InequalityEntry:
        for e in self.entries:
            if e.identifier == identifier:
                return e
        raise KeyError(identifier)

    def to_dict(self) -> dict:
        return {
            "mode": self.mode,
            "entangled": self.entangled,
            "available": self.available,
            "entries": [asdict(e) for e in self.entries],
        }

    def to_json(self) -> str:
        return json.dumps(self.to_dict(), indent=2, sort_keys=True) + "\n"


def _have(mapping, keys=AXES):
    return mapping is not None and all(k in mapping and mapping[k] is not None for k in keys)


def eval_complete_set_fixed(n: int, moments: MomentSummary) -> InequalityReport:
    """Complete inequality set for exactly ``n`` spin-1/2 particles."""
    if int(n) != n or n < 2:
        raise ValueError("need a fixed particle number n >= 2")
    sec, var = moments.second_moments, moments.variances
    have_sec, have_var = _have(sec), _have(var)
    out = []
    if have_sec:
        out.append(_entry("eq11", sum(sec[a] for a in AXES), n * (n + 2) / 4, "<="))
    else:
        out.append(_missing("eq11", "<=", "<J_i^2>"))
    if have_var:
        out.append(_entry("eq12", sum(var[a] for a in AXES), n / 2, ">="))
    else:
        out.append(_missing("eq12", ">=", "(Delta J_i)^2"))
    for p, (i, j, l) in enumerate(PERMUTATIONS, start=1):
        if have_sec and have_var:
            out.append(_entry(f"eq13_perm{p}", sec[i] + sec[j] - n / 2, (n - 1) * var[l], "<=", (i, j, l)))
            out.append(_entry(f"eq14_perm{p}", (n - 1) * (var[i] + var[j]), sec[l] + n * (n - 2) / 4,
                              ">=", (i, j, l)))
        else:
            out.append(_missing(f"eq13_perm{p}", "<=", "second moments or variances", (i, j, l)))
            out.append(_missing(f"eq14_perm{p}", ">=", "second moments or variances", (i, j, l)))
    out.sort(key=_order)
    return InequalityReport("fixed", tuple(out), {"second_moments": have_sec, "variances": have_var})


def _order(e):
    head, _, perm = e.identifier.partition("_perm")
    return (head, perm)


def eval_complete_set_fluctuating(moments: MomentSummary, duan_k: int = 1) -> InequalityReport:
    """Generalized set for a fluctuating particle number (requires no N <= 1).

    The ``duan`` entry tests the k-producibility bound at ``duan_k``.
    """
    if moments.min_n is not None and moments.min_n <= 1:
        raise ValueError("the generalized inequalities assume Q_0 = Q_1 = 0; "
                         f"input contains shots/sectors with N = {moments.min_n}")
    sec, var, w = moments.second_moments, moments.variances, moments.weighted or {}
    have_sec, have_var = _have(sec), _have(var)
    inv = w.get("inv_nm1")
    have_w = _have(inv) and w.get("n_over_nm1") is not None and w.get("n_nm2_over_nm1") is not None
    mn, mn2 = moments.mean_n, moments.mean_n2
    out = []
    if have_sec:
        out.append(_entry("gen11", sum(sec[a] for a in AXES), (mn2 + 2 * mn) / 4, "<="))
    else:
        out.append(_missing("gen11", "<=", "<J_i^2>"))
    if have_var:
        out.append(_entry("gen12", sum(var[a] for a in AXES), mn / 2, ">="))
    else:
        out.append(_missing("gen12", ">=", "(Delta J_i)^2"))
    for p, (i, j, l) in enumerate(PERMUTATIONS, start=1):
        if have_var and have_w:
            out.append(_entry(f"gen13_perm{p}", var[l], inv[i] + inv[j] - w["n_over_nm1"] / 2, ">=", (i, j, l)))
            out.append(_entry(f"gen14_perm{p}", var[i] + var[j], inv[l] + w["n_nm2_over_nm1"] / 4,
                              ">=", (i, j, l)))
        else:
            out.append(_missing(f"gen13_perm{p}", ">=", "<(N-1)^-1 J_i^2> weighted moments", (i, j, l)))
            out.append(_missing(f"gen14_perm{p}", ">=", "<(N-1)^-1 J_i^2> weighted moments", (i, j, l)))
    try:
        w_sum, var_z = _duan_inputs(moments)
        out.append(_entry("duan", var_z, w_sum / (duan_k + 2) - 0.25, ">=", (f"k={duan_k}",)))
    except ValueError as exc:
        out.append(_missing("duan", ">=", str(exc)))
    out.sort(key=_order)
    return InequalityReport("fluctuating", tuple(out),
                            {"second_moments": have_sec, "variances": have_var, "weighted": have_w})


# ---------------------------------------------------------------------------
# Duan k-producibility bound


@dataclass(frozen=True)
class DuanResult:
    minimal_consistent_k: int
    depth_claim: int
    bounds: dict
    var_jz: float
    weighted_sum: float
    k_tested: int | None = None
    violated_at_k_tested: bool | None = None

    def to_dict(self):
        d = asdict(self)
        d["bounds"] = {str(k): v for k, v in self.bounds.items()}
        return d

    def to_json(self) -> str:
        return json.dumps(self.to_dict(), indent=2, sort_keys=True) + "\n"


def _duan_inputs(moments: MomentSummary):
    inv = (moments.weighted or {}).get("inv_n")
    if not inv or inv.get("x") is None or inv.get("y") is None:
        raise ValueError("Duan bound needs <J_x^2/N> and <J_y^2/N> (per-shot particle numbers)")
    var_z = (moments.variances or {}).get("z")
    if var_z is None:
        raise ValueError("Duan bound needs (Delta J_z)^2")
    return inv["x"] + inv["y"], var_z


def duan_bound(k: int, moments: MomentSummary) -> float:
    """Right-hand side of the k-producibility bound on (Delta J_z)^2."""
    if int(k) != k or k < 1:
        raise ValueError("k must be a positive integer")
    w, _ = _duan_inputs(moments)
    return w / (k + 2) - 0.25


def duan_min_k(moments: MomentSummary, k_tested: int | None = None) -> DuanResult:
    """Smallest k for which the measured (Delta J_z)^2 is consistent with k-producibility."""
    w, var_z = _duan_inputs(moments)
    denom = var_z + 0.25
    if denom <= 0:
        raise ValueError("(Delta J_z)^2 + 1/4 must be positive")
    k = max(1, math.ceil(w / denom - 2 - 1e-12))

    def ok(kk):
        return var_z >= duan_bound(kk, moments)

    # closed form checked against direct evaluation; fix up any rounding slip
    while k > 1 and ok(k - 1):
        k -= 1
    while not ok(k):
        k += 1
    bounds = {kk: duan_bound(kk, moments) for kk in sorted({1, max(k - 1, 1), k, k + 1})}
    violated = None
    if k_tested is not None:
        bounds[int(k_tested)] = duan_bound(k_tested, moments)
        violated = var_z < bounds[int(k_tested)]
    return DuanResult(k, k, bounds, var_z, w, k_tested, violated)
