"""Per-shot measurement records and the moment summaries built from them."""
from __future__ import annotations

import csv
import io
import json
import math
from dataclasses import dataclass, field, replace
from pathlib import Path
from typing import Iterator, Mapping

import numpy as np

from .spin import Spin, as_axis

AXES = ("x", "y", "z")
_COLUMNS = {"jx": "x", "jy": "y", "jz": "z"}
_BOUND_TOL = 1e-9


@dataclass(frozen=True)
class ShotRecord:
    n: int
    values: Mapping[str, float] = field(default_factory=dict)

    def __getitem__(self, axis):
        return self.values[axis]


@dataclass(frozen=True)
class ShotRecords:
    """Column storage for shots; a missing axis outcome is NaN."""

    spin: Spin
    n: np.ndarray
    j: Mapping[str, np.ndarray]
    metadata: dict = field(default_factory=dict, compare=False)

    def __post_init__(self):
        n = np.asarray(self.n)
        if n.ndim != 1:
            raise ValueError("n must be one-dimensional")
        if n.size and (np.any(n < 0) or np.any(n != np.round(n))):
            raise ValueError("particle numbers must be nonnegative integers")
        n = n.astype(np.int64)
        cols = {}
        for axis, v in self.j.items():
            if axis not in AXES:
                raise ValueError(f"unknown axis {axis!r}")
            v = np.asarray(v, dtype=float)
            if v.shape != n.shape:
                raise ValueError(f"axis {axis} has {v.size} entries for {n.size} shots")
            bad = np.flatnonzero(np.abs(v) > n * self.spin.j + _BOUND_TOL)
            if bad.size:
                raise ValueError(f"shot {bad[0]}: |j{axis}| = {abs(v[bad[0]])} exceeds n*j = "
                                 f"{n[bad[0]] * self.spin.j}")
            cols[axis] = v
        object.__setattr__(self, "n", n)
        object.__setattr__(self, "j", cols)

    @classmethod
    def from_records(cls, records, j, metadata=None) -> "ShotRecords":
        records = list(records)
        n = np.array([r.n for r in records], dtype=np.int64)
        axes = sorted({a for r in records for a in r.values}, key=AXES.index)
        cols = {a: np.array([r.values.get(a, np.nan) for r in records], dtype=float) for a in axes}
        return cls(Spin.from_value(j), n, cols, metadata or {})

    def __len__(self):
        return int(self.n.size)

    def __iter__(self) -> Iterator[ShotRecord]:
        for i in range(len(self)):
            vals = {a: float(v[i]) for a, v in self.j.items() if not np.isnan(v[i])}
            yield ShotRecord(int(self.n[i]), vals)

    def __add__(self, other: "ShotRecords") -> "ShotRecords":
        if self.spin != other.spin:
            raise ValueError("cannot combine records with different spin")
        size_a, size_b = len(self), len(other)
        cols = {}
        for a in sorted(set(self.j) | set(other.j), key=AXES.index):
            cols[a] = np.concatenate([self.j.get(a, np.full(size_a, np.nan)),
                                      other.j.get(a, np.full(size_b, np.nan))])
        meta = {"parts": [self.metadata, other.metadata]}
        return ShotRecords(self.spin, np.concatenate([self.n, other.n]), cols, meta)

    def count(self, axis: str) -> int:
        return int(np.sum(~np.isnan(self.j[axis]))) if axis in self.j else 0

    def to_csv(self) -> str:
        buf = io.StringIO()
        w = csv.writer(buf, lineterminator="\n")
        axes = [a for a in AXES if a in self.j]
        w.writerow(["n"] + [f"j{a}" for a in axes])
        for i in range(len(self)):
            row = [str(int(self.n[i]))]
            for a in axes:
                v = self.j[a][i]
                row.append("" if np.isnan(v) else repr(float(v)))
            w.writerow(row)
        return buf.getvalue()

    def to_jsonl(self) -> str:
        lines = []
        for rec in self:
            obj = {"n": rec.n}
            obj.update({f"j{a}": v for a, v in rec.values.items()})
            lines.append(json.dumps(obj))
        return "\n".join(lines) + "\n"

    def save(self, path, fmt: str | None = None) -> None:
        path = Path(path)
        fmt = fmt or ("jsonl" if path.suffix in (".jsonl", ".json") else "csv")
        text = self.to_jsonl() if fmt == "jsonl" else self.to_csv()
        path.write_text(text, encoding="utf-8", newline="")


def load_shots(source, fmt: str = "csv", j=0.5) -> ShotRecords:
    """Parse shots from a path, bytes, text or file object.

    CSV: header ``n`` plus any of ``jx,jy,jz``; an empty cell is a missing value.
    JSON lines: one object per shot with keys ``n`` and optionally ``jx,jy,jz``.
    """
    if isinstance(source, Path) or (isinstance(source, str) and source and "\n" not in source
                                    and Path(source).is_file()):
        path = Path(source)
        text = path.read_bytes().decode("utf-8")
        meta = {"source": str(path)}
    else:
        if hasattr(source, "read"):
            source = source.read()
        text = source.decode("utf-8") if isinstance(source, bytes) else str(source)
        meta = {}
    spin = Spin.from_value(j)
    if fmt == "csv":
        records = _parse_csv(text)
    elif fmt in ("jsonl", "json-lines"):
        records = _parse_jsonl(text)
    else:
        raise ValueError(f"unknown shot format {fmt!r}")
    if not records:
        raise ValueError("no shots in input")
    for lineno, rec in records:
        for axis, v in rec.values.items():
            if abs(v) > rec.n * spin.j + _BOUND_TOL:
                raise ValueError(f"line {lineno}: |j{axis}| = {abs(v)} exceeds n*j = {rec.n * spin.j}")
    return ShotRecords.from_records([r for _, r in records], spin, meta)


def _parse_n(raw, lineno):
    try:
        val = float(raw)
    except ValueError:
        raise ValueError(f"line {lineno}: n={raw!r} is not a number") from None
    if val < 0 or val != int(val):
        raise ValueError(f"line {lineno}: n must be a nonnegative integer, got {raw!r}")
    return int(val)


def _parse_csv(text):
    reader = csv.reader(io.StringIO(text))
    try:
        header = [h.strip() for h in next(reader)]
    except StopIteration:
        return []
    if not header or header[0] != "n" or len(set(header)) != len(header) \
            or any(h not in _COLUMNS for h in header[1:]):
        raise ValueError(f"line 1: header must be 'n' followed by a subset of jx,jy,jz, got {header}")
    out = []
    for lineno, row in enumerate(reader, start=2):
        if not row:
            continue
        if len(row) != len(header):
            raise ValueError(f"line {lineno}: expected {len(header)} fields, got {len(row)}")
        n = _parse_n(row[0].strip(), lineno)
        vals = {}
        for col, cell in zip(header[1:], row[1:]):
            cell = cell.strip()
            if cell == "":
                continue
            try:
                vals[_COLUMNS[col]] = float(cell)
            except ValueError:
                raise ValueError(f"line {lineno}: {col}={cell!r} is not a number") from None
        out.append((lineno, ShotRecord(n, vals)))
    return out


def _parse_jsonl(text):
    out = []
    for lineno, line in enumerate(text.splitlines(), start=1):
        if not line.strip():
            continue
        try:
            obj = json.loads(line)
        except json.JSONDecodeError as exc:
            raise ValueError(f"line {lineno}: invalid JSON ({exc.msg})") from None
        if not isinstance(obj, dict) or "n" not in obj:
            raise ValueError(f"line {lineno}: expected an object with key 'n'")
        extra = set(obj) - {"n", *_COLUMNS}
        if extra:
            raise ValueError(f"line {lineno}: unexpected keys {sorted(extra)}")
        n = _parse_n(obj["n"], lineno)
        vals = {}
        for col, axis in _COLUMNS.items():
            if obj.get(col) is not None:
                if not isinstance(obj[col], (int, float)):
                    raise ValueError(f"line {lineno}: {col} must be a number")
                vals[axis] = float(obj[col])
        out.append((lineno, ShotRecord(n, vals)))
    return out


# ---------------------------------------------------------------------------
# Moment summaries


def _axis_key(axis):
    if isinstance(axis, str):
        as_axis(axis)
        return axis.lower()
    return tuple(float(c) for c in as_axis(axis))


@dataclass(frozen=True)
class MomentSummary:
    """Moments consumed by the depth certifier and the inequality checks.

    ``weighted`` holds per-shot-weighted moments under the keys
    ``inv_n`` ({axis: <J_i^2 / N>}), ``inv_nm1`` ({axis: <J_i^2 / (N-1)>}),
    ``n_over_nm1`` (<N / (N-1)>) and ``n_nm2_over_nm1`` (<N (N-2) / (N-1)>).
    ``se`` maps entry names to standard errors where they are known.
    """

    spin: Spin
    mean_n: float
    mean_n2: float
    mean_j_n: float
    var_j_perp: float | None = None
    axes: tuple = ("z", "x")
    means: Mapping[str, float] = field(default_factory=dict)
    second_moments: Mapping[str, float] = field(default_factory=dict)
    variances: Mapping[str, float] = field(default_factory=dict)
    weighted: Mapping = field(default_factory=dict)
    se: Mapping[str, float] = field(default_factory=dict)
    fixed_n: int | None = None
    n_shots: int | None = None
    min_n: int | None = None

    def __post_init__(self):
        spin = Spin.from_value(self.spin)
        object.__setattr__(self, "spin", spin)
        object.__setattr__(self, "axes", tuple(_axis_key(a) for a in self.axes))
        if not self.mean_n > 0:
            raise ValueError("mean particle number must be positive")
        tol = 1e-9 * max(1.0, self.mean_n2)
        if self.mean_n2 < self.mean_n**2 - tol:
            raise ValueError("<N^2> < <N>^2")
        if self.var_j_perp is not None and self.var_j_perp < 0:
            raise ValueError("negative variance")
        if abs(self.mean_j_n) > self.mean_n * spin.j * (1 + 1e-9) + 1e-12:
            raise ValueError(f"|<J_n>| = {abs(self.mean_j_n)} exceeds <N> j = {self.mean_n * spin.j}")
        n_vec, p_vec = (as_axis(a) for a in self.axes)
        if abs(n_vec @ p_vec) > 1e-10:
            raise ValueError("mean-spin and transverse axes must be orthogonal")

    @property
    def polarization(self) -> float:
        """<J_n> / (<N> j)."""
        return self.mean_j_n / (self.mean_n * self.spin.j)

    def with_(self, **changes) -> "MomentSummary":
        return replace(self, **changes)

    def to_dict(self) -> dict:
        return {
            "spin_j": str(self.spin),
            "mean_n": self.mean_n,
            "mean_n2": self.mean_n2,
            "mean_j_n": self.mean_j_n,
            "var_j_perp": self.var_j_perp,
            "axes": [a if isinstance(a, str) else list(a) for a in self.axes],
            "means": dict(self.means),
            "second_moments": dict(self.second_moments),
            "variances": dict(self.variances),
            "weighted": {k: (dict(v) if isinstance(v, Mapping) else v) for k, v in self.weighted.items()},
            "se": dict(self.se),
            "fixed_n": self.fixed_n,
            "n_shots": self.n_shots,
        }


def jackknife_se(theta_loo: np.ndarray) -> float:
    """Delete-one jackknife standard error from leave-one-out estimates."""
    theta_loo = np.asarray(theta_loo, dtype=float)
    m = theta_loo.size
    if m < 2:
        return float("nan")
    if np.ptp(theta_loo) == 0:
        return 0.0
    dev = theta_loo - theta_loo.mean()
    return float(math.sqrt((m - 1) / m * float(np.dot(dev, dev))))


class _Sums:
    """Column sums over shots with cheap leave-one-out versions."""

    def __init__(self):
        self.cols: dict[str, np.ndarray] = {}

    def add(self, name, per_shot):
        self.cols[name] = np.asarray(per_shot, dtype=float)

    def full(self, name):
        # numpy scalar so that 0/0 gives nan under errstate instead of raising
        return np.float64(np.sum(self.cols[name]))

    def loo(self, name):
        c = self.cols[name]
        return np.sum(c) - c


def estimate(records: ShotRecords, axes=("z", "x"), weighted: bool | None = None) -> MomentSummary:
    """Sample moments with delete-one jackknife standard errors.

    Variances use the unbiased (n-1) estimator.  ``weighted=None`` computes the
    number-weighted moments only when every shot has n >= 2.
    """
    n_axis, p_axis = (_axis_key(a) for a in axes)
    for a in (n_axis, p_axis):
        if not isinstance(a, str):
            raise ValueError("shot data only supports the x, y, z axes")
    if n_axis == p_axis:
        raise ValueError("mean-spin and transverse axes must differ")
    if len(records) < 2:
        raise ValueError("need at least 2 shots")
    for a in (n_axis, p_axis):
        if records.count(a) < 2:
            raise ValueError(f"need at least 2 shots measuring j{a}, got {records.count(a)}")

    n = records.n.astype(float)
    small = np.flatnonzero(records.n <= 1)
    if weighted is None:
        weighted = small.size == 0
    elif weighted and small.size:
        raise ValueError(f"number-weighted moments assume no shots with N <= 1; offending rows: "
                         f"{small[:10].tolist()}{' ...' if small.size > 10 else ''}")

    s = _Sums()
    s.add("one", np.ones_like(n))
    s.add("n", n)
    s.add("n2", n * n)
    axes_present = [a for a in AXES if records.count(a) >= 2]
    for a in axes_present:
        v = records.j[a]
        has = ~np.isnan(v)
        v0 = np.where(has, v, 0.0)
        s.add(f"c_{a}", has)
        s.add(f"j_{a}", v0)
        s.add(f"j2_{a}", v0 * v0)
        if weighted:
            s.add(f"j2n_{a}", v0 * v0 / n)
            s.add(f"j2nm1_{a}", v0 * v0 / (n - 1))
    if weighted:
        s.add("n_nm1", n / (n - 1))
        s.add("nnm2_nm1", n * (n - 2) / (n - 1))

    stats = {}

    def stat(name, fn):
        stats[name] = fn

    stat("mean_n", lambda g: g("n") / g("one"))
    stat("mean_n2", lambda g: g("n2") / g("one"))
    for a in axes_present:
        stat(f"mean_{a}", lambda g, a=a: g(f"j_{a}") / g(f"c_{a}"))
        stat(f"second_{a}", lambda g, a=a: g(f"j2_{a}") / g(f"c_{a}"))
        stat(f"var_{a}", lambda g, a=a: (g(f"j2_{a}") - g(f"j_{a}") ** 2 / g(f"c_{a}")) / (g(f"c_{a}") - 1))
        if weighted:
            stat(f"inv_n_{a}", lambda g, a=a: g(f"j2n_{a}") / g(f"c_{a}"))
            stat(f"inv_nm1_{a}", lambda g, a=a: g(f"j2nm1_{a}") / g(f"c_{a}"))
    if weighted:
        stat("n_over_nm1", lambda g: g("n_nm1") / g("one"))
        stat("n_nm2_over_nm1", lambda g: g("nnm2_nm1") / g("one"))
    stat("xi2", lambda g: stats["mean_n"](g) * stats[f"var_{p_axis}"](g) / stats[f"mean_{n_axis}"](g) ** 2)

    full = {}
    se = {}
    for name, fn in stats.items():
        with np.errstate(divide="ignore", invalid="ignore"):
            full[name] = float(fn(s.full))
            se[name] = jackknife_se(fn(s.loo))

    fixed = int(records.n[0]) if np.all(records.n == records.n[0]) else None
    var = {a: max(full[f"var_{a}"], 0.0) for a in axes_present}
    wdict = {}
    if weighted:
        wdict = {
            "inv_n": {a: full[f"inv_n_{a}"] for a in axes_present},
            "inv_nm1": {a: full[f"inv_nm1_{a}"] for a in axes_present},
            "n_over_nm1": full["n_over_nm1"],
            "n_nm2_over_nm1": full["n_nm2_over_nm1"],
        }
    se_out = {
        "mean_n": se["mean_n"],
        "mean_n2": se["mean_n2"],
        "mean_j_n": se[f"mean_{n_axis}"],
        "var_j_perp": se[f"var_{p_axis}"],
        "xi2": se["xi2"],
    }
    se_out.update({k: v for k, v in se.items() if k not in ("mean_n", "mean_n2", "xi2")})
    return MomentSummary(
        spin=records.spin,
        mean_n=full["mean_n"],
        mean_n2=full["mean_n2"],
        mean_j_n=full[f"mean_{n_axis}"],
        var_j_perp=var[p_axis],
        axes=(n_axis, p_axis),
        means={a: full[f"mean_{a}"] for a in axes_present},
        second_moments={a: full[f"second_{a}"] for a in axes_present},
        variances=var,
        weighted=wdict,
        se=se_out,
        fixed_n=fixed,
        n_shots=len(records),
        min_n=int(records.n.min()),
    )
