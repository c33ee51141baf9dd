"""Minimal transverse variance of a single spin-j at fixed polarization.

``F_j(X) = min (Delta j_x)^2 / j`` over all states with ``<j_z>/j = X``.

The curve is traced by a Lagrange-multiplier scan: for each multiplier
``mu >= 0`` the quantity ``Var(j_x) - mu <j_z>`` is minimized over states.
Writing ``Var(j_x) = min_a <(j_x - a)^2>`` turns the inner problem into the
ground state of ``H(mu, a) = (j_x - a)^2 - mu j_z`` followed by a scalar
minimization over the shift ``a``.  For integer j the optimum is ``a = 0``;
for half-integer j and small ``mu`` it is not, so the shift is always
optimized.

Two evaluators are provided (for j = 1/2 both return the closed form X^2/2).  ``interpolate`` is the piecewise-linear curve
through the scanned points (every point is attained by an actual state, so
this is an upper bound on F).  ``certify`` is the maximum over scanned ``mu``
of the supporting lines ``G(mu)/j + mu X``, which is a lower bound on F and
is what entanglement claims must use.
"""
from __future__ import annotations

import csv
import io
import threading
from dataclasses import dataclass, field
from enum import Enum
from pathlib import Path

import numpy as np
from scipy.linalg import eig_banded
from scipy.optimize import brentq, minimize, minimize_scalar

from .spin import Spin, build_spin_operators

X_TARGET = 1 - 1e-6
DEGENERACY_TOL = 1e-9


class IncompleteScanError(RuntimeError):
    """The multiplier grid never drove the polarization close to 1."""


class EvalMode(str, Enum):
    INTERPOLATE = "interpolate"
    CERTIFY = "certify"


@dataclass(frozen=True)
class ScanGrid:
    """Geometric multiplier grid; ``n_points`` includes the ``mu = 0`` point.

    ``mu_max=None`` doubles from 1 until the polarization exceeds ``1 - 1e-6``.
    """

    n_points: int = 400
    mu_min: float = 1e-3
    mu_max: float | None = None
    shift_refine: int = 3

    def __post_init__(self):
        if self.n_points < 3:
            raise ValueError("need at least 3 grid points")
        if not self.mu_min > 0:
            raise ValueError("mu_min must be positive")
        if self.mu_max is not None and self.mu_max <= self.mu_min:
            raise ValueError("mu_max must exceed mu_min")


@dataclass(frozen=True)
class FjCurve:
    spin: Spin
    mu: np.ndarray
    x: np.ndarray
    f: np.ndarray
    metadata: dict = field(default_factory=dict, compare=False)

    def __post_init__(self):
        for name in ("mu", "x", "f"):
            arr = np.array(getattr(self, name), dtype=float)
            arr.setflags(write=False)
            object.__setattr__(self, name, arr)
        if not (len(self.mu) == len(self.x) == len(self.f)):
            raise ValueError("mu, x, f must have equal length")

    def __len__(self):
        return len(self.x)

    @property
    def points(self):
        return list(zip(self.mu.tolist(), self.x.tolist(), self.f.tolist()))

    def check(self, tol: float = 1e-10) -> None:
        """Raise if any curve invariant is violated."""
        if len(self) == 0:
            raise ValueError("empty curve")
        if self.x[0] != 0 or self.f[0] != 0 or self.mu[0] != 0:
            raise ValueError("curve must start at (mu=0, X=0, F=0)")
        if np.any(np.diff(self.x) <= 0):
            raise ValueError("X must be strictly increasing")
        if np.any(np.diff(self.f) < -tol):
            raise ValueError("F must be nondecreasing")
        if np.any(self.f < 0) or np.any(self.x < 0) or np.any(self.x > 1):
            raise ValueError("points outside X in [0,1], F >= 0")
        slopes = np.diff(self.f) / np.diff(self.x)
        if np.any(np.diff(slopes) < -tol * np.maximum(1.0, np.abs(slopes[1:]))):
            raise ValueError("piecewise-linear interpolant is not convex")

    def eval(self, x, mode: EvalMode | str = EvalMode.CERTIFY):
        return eval_fj(self, x, mode)

    # CSV round trip -----------------------------------------------------
    def to_csv(self, path=None) -> str:
        buf = io.StringIO()
        w = csv.writer(buf, lineterminator="\n")
        w.writerow(["mu", "X", "F"])
        for mu, x, f in zip(self.mu, self.x, self.f):
            w.writerow([repr(float(mu)), repr(float(x)), repr(float(f))])
        text = buf.getvalue()
        if path is not None:
            Path(path).write_text(text, encoding="utf-8", newline="")
        return text

    @classmethod
    def from_csv(cls, source, j) -> "FjCurve":
        if isinstance(source, (str, Path)) and Path(source).exists():
            text = Path(source).read_text(encoding="utf-8")
        else:
            text = str(source)
        rows = list(csv.reader(io.StringIO(text)))
        if not rows or rows[0] != ["mu", "X", "F"]:
            raise ValueError("curve CSV must have header mu,X,F")
        data = np.array([[float(v) for v in r] for r in rows[1:] if r], dtype=float)
        if data.size == 0:
            raise ValueError("curve CSV has no rows")
        curve = cls(Spin.from_value(j), data[:, 0], data[:, 1], data[:, 2], {"source": "csv"})
        curve.check()
        return curve


class _ShiftedHamiltonian:
    """Ground states of (j_x - a)^2 - mu j_z, all real symmetric."""

    def __init__(self, spin: Spin):
        ops = build_spin_operators(spin)
        self.spin = spin
        self.jx = np.asarray(ops.jx, dtype=float)
        self.jz = np.asarray(ops.jz.real, dtype=float)
        self.jx2 = self.jx @ self.jx
        self.eye = np.eye(spin.dim)

    def matrix(self, mu, a):
        return self.jx2 - 2 * a * self.jx + a * a * self.eye - mu * self.jz

    def energies(self, mu, shifts):
        shifts = np.asarray(shifts, dtype=float)[:, None, None]
        stack = self.jx2 - 2 * shifts * self.jx + shifts**2 * self.eye - mu * self.jz
        return np.linalg.eigvalsh(stack)[:, 0]

    def ground_energy(self, mu, a):
        h = self.matrix(mu, a)
        band = np.zeros((3, self.spin.dim))
        band[0, 2:] = np.diagonal(h, 2)
        band[1, 1:] = np.diagonal(h, 1)
        band[2, :] = np.diagonal(h)
        return float(eig_banded(band, eigvals_only=True, select="i", select_range=(0, 0))[0])

    def best_shift(self, mu, n_refine=3):
        """Minimize the ground energy over the shift a in [0, j].

        Local minima sit near the nonnegative eigenvalues of j_x (exactly there
        at mu = 0); each basin is scanned coarsely and the best ones refined.
        """
        j = self.spin.j
        anchors = np.arange(j, -1e-9, -1.0)[::-1]
        probe = np.unique(np.clip(np.concatenate(
            [anchors, anchors - 0.25, anchors + 0.25, [0.0]]), 0.0, j))
        e = self.energies(mu, probe)
        best_a, best_e = 0.0, float(e[0])
        basin = np.clip(np.round(probe - anchors[0]), 0, len(anchors) - 1).astype(int)
        basin_best = {}
        for b, en in zip(basin, e):
            basin_best[b] = min(basin_best.get(b, np.inf), en)
        for b in sorted(basin_best, key=basin_best.get)[:n_refine]:
            lo = max(anchors[b] - 0.5, 0.0)
            hi = min(anchors[b] + 0.5, j)
            res = minimize_scalar(lambda a: self.ground_energy(mu, a), bounds=(lo, hi),
                                  method="bounded", options={"xatol": 1e-12})
            if res.fun < best_e:
                best_a, best_e = float(res.x), float(res.fun)
        for a_try, e_try in zip(probe, e):
            if e_try < best_e:
                best_a, best_e = float(a_try), float(e_try)
        return best_a, best_e

    def point_states(self, mu, a):
        """Ground vector(s) at (mu, a); extremal-<j_z> vectors if degenerate."""
        w, v = np.linalg.eigh(self.matrix(mu, a))
        scale = max(1.0, abs(w[0]))
        deg = int(np.sum(w - w[0] <= DEGENERACY_TOL * scale))
        if deg == 1:
            return [v[:, 0]]
        sub = v[:, :deg]
        wz, vz = np.linalg.eigh(sub.T @ self.jz @ sub)
        # larger <j_z> first: ties resolved toward larger X
        return [sub @ vz[:, -1], sub @ vz[:, 0]]

    def moments(self, psi):
        psi = psi / np.linalg.norm(psi)
        mean_x = psi @ self.jx @ psi
        var_x = max(psi @ self.jx2 @ psi - mean_x**2, 0.0)
        return float(psi @ self.jz @ psi), float(var_x), float(mean_x)


def _scan_point(ham: _ShiftedHamiltonian, mu: float, n_shift: int):
    a, _ = ham.best_shift(mu, n_shift)
    out = []
    j = ham.spin.j
    for psi in ham.point_states(mu, a):
        mz, var_x, mean_x = ham.moments(psi)
        out.append((mu, mz / j, var_x / j, mean_x, a))
    return out


def _polarization(ham, mu, n_shift):
    return max(p[1] for p in _scan_point(ham, mu, n_shift))


def _lower_hull(x, f):
    """Indices of the lower convex hull of points sorted by x."""
    hull: list[int] = []
    for i in range(len(x)):
        while len(hull) >= 2:
            i0, i1 = hull[-2], hull[-1]
            cross = (x[i1] - x[i0]) * (f[i] - f[i0]) - (f[i1] - f[i0]) * (x[i] - x[i0])
            if cross <= 0:
                hull.pop()
            else:
                break
        hull.append(i)
    return hull


def compute_fj(j, scan: ScanGrid | None = None) -> FjCurve:
    """Scan the multiplier grid and return the convex curve F_j."""
    spin = Spin.from_value(j)
    if spin.two_j < 1:
        raise ValueError("F_j needs j >= 1/2")
    scan = scan or ScanGrid()
    ham = _ShiftedHamiltonian(spin)

    mu_max = scan.mu_max
    if mu_max is None:
        mu_max = max(1.0, 2 * scan.mu_min)
        while _polarization(ham, mu_max, scan.shift_refine) <= X_TARGET:
            mu_max *= 2
            if mu_max > 1e12:
                raise IncompleteScanError(f"X never reached {X_TARGET} for j={spin}")
    elif _polarization(ham, mu_max, scan.shift_refine) <= X_TARGET:
        raise IncompleteScanError(
            f"mu_max={mu_max} gives X <= {X_TARGET} for j={spin}; enlarge the grid")

    mus = np.geomspace(scan.mu_min, mu_max, scan.n_points - 1)
    raw = [(0.0, 0.0, 0.0, 0.0, 0.0)]
    max_mean_x_err = 0.0
    for mu in mus:
        for pt in _scan_point(ham, float(mu), scan.shift_refine):
            raw.append(pt)
            # stationarity in the shift: optimal a equals <j_x>
            max_mean_x_err = max(max_mean_x_err, abs(pt[3] - pt[4]))

    raw.sort(key=lambda p: (p[1], p[0]))
    mu_a = np.array([p[0] for p in raw])
    x_a = np.clip(np.array([p[1] for p in raw]), 0.0, 1.0)
    f_a = np.array([p[2] for p in raw])
    # collapse coincident X, keep the smallest F (then the largest mu)
    keep = []
    for i in range(len(x_a)):
        if keep and x_a[i] - x_a[keep[-1]] <= 1e-14:
            if f_a[i] <= f_a[keep[-1]]:
                keep[-1] = i
            continue
        keep.append(i)
    mu_a, x_a, f_a = mu_a[keep], x_a[keep], f_a[keep]
    hull = _lower_hull(x_a, f_a)
    curve = FjCurve(
        spin,
        mu_a[hull],
        x_a[hull],
        f_a[hull],
        {
            "n_points": scan.n_points,
            "mu_min": scan.mu_min,
            "mu_max": float(mu_max),
            "shift_refine": scan.shift_refine,
            "dropped_off_hull": len(x_a) - len(hull),
            "max_shift_mismatch": max_mean_x_err,
        },
    )
    curve.check()
    return curve


def eval_fj(curve: FjCurve, x, mode: EvalMode | str = EvalMode.CERTIFY):
    """Evaluate F_j at X in [0, 1]; scalar in, scalar out."""
    mode = EvalMode(mode)
    if len(curve) == 0:
        raise ValueError("empty curve")
    xs = np.asarray(x, dtype=float)
    if np.any(xs < 0) or np.any(xs > 1) or np.any(np.isnan(xs)):
        raise ValueError("X must lie in [0, 1]")
    if curve.spin.two_j == 1:
        # spin 1/2: every state is a point of the Bloch ball and F(X) = X^2 / 2 exactly
        out = xs**2 / 2
        return float(out) if np.ndim(out) == 0 else out
    # the stretched state |j,j> is the only state with X = 1, and F(1) = 1/2
    px = np.append(curve.x, 1.0) if curve.x[-1] < 1 else curve.x
    pf = np.append(curve.f, 0.5) if curve.x[-1] < 1 else curve.f
    interp = np.interp(xs, px, pf)
    if mode is EvalMode.INTERPOLATE:
        out = interp
    else:
        lines = curve.f[:, None] + curve.mu[:, None] * (np.atleast_1d(xs)[None, :] - curve.x[:, None])
        cert = np.maximum(lines.max(axis=0), 0.0).reshape(xs.shape)
        cert = np.where(xs == 1.0, 0.5, cert)
        out = np.minimum(cert, interp)
    return float(out) if np.ndim(out) == 0 else out


def fj_exact(j, x: float) -> float:
    """F_j(X) by maximizing the supporting line over a continuous multiplier.

    Slower than a tabulated curve but free of grid error; used as a reference.
    """
    spin = Spin.from_value(j)
    if not 0 <= x <= 1:
        raise ValueError("X must lie in [0, 1]")
    if x == 0:
        return 0.0
    if x == 1:
        return 0.5
    ham = _ShiftedHamiltonian(spin)
    jv = spin.j

    def neg_line(log_mu):
        mu = np.exp(log_mu)
        _, g = ham.best_shift(mu)
        return -(g / jv + mu * x)

    # dual is concave in mu; bracket in log space
    res = minimize_scalar(neg_line, bounds=(np.log(1e-6), np.log(1e8)), method="bounded",
                          options={"xatol": 1e-10})
    return max(-float(res.fun), 0.0)


def minimal_variance_state(j, x: float, tol: float = 1e-9):
    """Pure spin-j state with <j_z> = x j and the smallest (Delta j_x)^2.

    Returns ``(psi, x_achieved, f)`` with f = (Delta j_x)^2 / j.  The state is
    a ground state of the shifted Hamiltonian at the multiplier where the
    polarization equals ``x``.
    """
    spin = Spin.from_value(j)
    if not 0 <= x < 1:
        raise ValueError("X must lie in [0, 1)")
    ham = _ShiftedHamiltonian(spin)
    if x == 0:
        mu = 0.0
    else:
        hi = 1.0
        while _polarization(ham, hi, 3) < x:
            hi *= 2
        mu = brentq(lambda m: _polarization(ham, m, 3) - x, 0.0, hi, xtol=1e-15, rtol=1e-15)
    a = max(_scan_point(ham, mu, 3), key=lambda p: p[1])[4]

    def top(m):
        return max(ham.point_states(m, a), key=lambda v: v @ ham.jz @ v)

    if x > 0:
        # hold the optimal shift fixed and polish mu so that X hits x exactly
        def resid(m):
            v = top(m)
            return (v @ ham.jz @ v) / (v @ v) / spin.j - x

        lo, hi = mu * 0.9, mu * 1.1
        if resid(lo) < 0 < resid(hi):
            mu = brentq(resid, lo, hi, xtol=1e-16, rtol=1e-15)
    psi = top(mu)
    psi = psi / np.linalg.norm(psi)
    mz, var_x, _ = ham.moments(psi)
    if abs(mz / spin.j - x) > tol:
        raise RuntimeError(f"polarization {x} is not reached by a single ground state "
                           f"(closest {mz / spin.j:.12g})")
    return psi, mz / spin.j, var_x / spin.j


class CurveCache:
    """Thread-safe cache of curves keyed by (two_j, scan grid)."""

    def __init__(self, scan: ScanGrid | None = None, directory=None):
        self.scan = scan or ScanGrid()
        self.directory = Path(directory) if directory else None
        self._curves: dict = {}
        self._lock = threading.Lock()

    def _path(self, spin: Spin):
        s = self.scan
        return self.directory / f"fj_{spin.two_j}_{s.n_points}_{s.mu_min:g}_{s.mu_max}_{s.shift_refine}.csv"

    def get(self, j) -> FjCurve:
        spin = Spin.from_value(j)
        key = (spin.two_j, self.scan)
        with self._lock:
            if key in self._curves:
                return self._curves[key]
            curve = None
            if self.directory is not None and self._path(spin).exists():
                curve = FjCurve.from_csv(self._path(spin), spin)
            if curve is None:
                curve = compute_fj(spin, self.scan)
                if self.directory is not None:
                    self.directory.mkdir(parents=True, exist_ok=True)
                    curve.to_csv(self._path(spin))
            self._curves[key] = curve
            return curve

    __call__ = get


_default_cache = CurveCache()


def default_cache() -> CurveCache:
    return _default_cache


def brute_force_fj(j, x: float, samples: int = 40, iterations: int = 200, seed: int = 0) -> float:
    """Minimal (Delta j_x)^2 over random, locally refined pure states with <j_z>/j = X.

    Independent of the multiplier scan; intended as a test oracle for j <= 3/2.
    Returns the variance (not divided by j).
    """
    spin = Spin.from_value(j)
    if spin.two_j not in (1, 2, 3):
        raise ValueError("brute force oracle supports j in {1/2, 1, 3/2}")
    if not 0 <= x <= 1:
        raise ValueError("constraint <j_z>/j = X unreachable for X outside [0, 1]")
    ops = build_spin_operators(spin)
    jx, jz = ops.jx.real, ops.jz.real
    jx2 = jx @ jx
    jv, d = spin.j, spin.dim
    if x == 1:
        psi = np.zeros(d)
        psi[0] = 1.0
        return float(psi @ jx2 @ psi - (psi @ jx @ psi) ** 2)

    def unpack(p):
        psi = p[:d] + 1j * p[d:]
        return psi / np.linalg.norm(psi)

    def var_x(p):
        psi = unpack(p)
        m = np.vdot(psi, jx @ psi).real
        return np.vdot(psi, jx2 @ psi).real - m * m

    def pol(p):
        psi = unpack(p)
        return np.vdot(psi, jz @ psi).real / jv - x

    rng = np.random.default_rng(seed)
    best = np.inf
    for _ in range(samples):
        p0 = rng.normal(size=2 * d)
        res = minimize(var_x, p0, method="SLSQP", constraints=[{"type": "eq", "fun": pol}],
                       options={"maxiter": iterations, "ftol": 1e-14})
        if abs(pol(res.x)) <= 1e-6:
            best = min(best, var_x(res.x))
    if not np.isfinite(best):
        raise RuntimeError("no sample satisfied the polarization constraint")
    return float(max(best, 0.0))
