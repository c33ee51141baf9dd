"""Spin-j operators and small dense Hermitian linear algebra.

All matrices use the |j, m> basis ordered by descending m (m = j, j-1, ..., -j).
"""
from __future__ import annotations

from dataclasses import dataclass
from fractions import Fraction

import numpy as np

HERMITIAN_TOL = 1e-10
DENSITY_TOL = 1e-10
VARIANCE_CLAMP = 1e-12

_AXIS_LABELS = {
    "x": (1.0, 0.0, 0.0),
    "y": (0.0, 1.0, 0.0),
    "z": (0.0, 0.0, 1.0),
}


@dataclass(frozen=True, order=True)
class Spin:
    """Spin quantum number stored as ``two_j`` so half-integers stay exact."""

    two_j: int

    def __post_init__(self):
        if int(self.two_j) != self.two_j or self.two_j < 0:
            raise ValueError(f"two_j must be a nonnegative integer, got {self.two_j!r}")
        object.__setattr__(self, "two_j", int(self.two_j))

    @classmethod
    def from_value(cls, j) -> "Spin":
        """Build from j given as float/int/str/Fraction (``0.5``, ``"3/2"``...)."""
        if isinstance(j, Spin):
            return j
        two_j = Fraction(j) * 2
        if two_j.denominator != 1:
            raise ValueError(f"j must be an integer or half-integer, got {j!r}")
        return cls(int(two_j))

    @property
    def j(self) -> float:
        return self.two_j / 2

    @property
    def dim(self) -> int:
        return self.two_j + 1

    def __mul__(self, k: int) -> "Spin":
        return Spin(self.two_j * int(k))

    __rmul__ = __mul__

    def __str__(self):
        return str(self.two_j // 2) if self.two_j % 2 == 0 else f"{self.two_j}/2"


@dataclass(frozen=True)
class SpinOperators:
    spin: Spin
    jx: np.ndarray
    jy: np.ndarray
    jz: np.ndarray

    def __iter__(self):
        return iter((self.jx, self.jy, self.jz))

    def __getitem__(self, label: str) -> np.ndarray:
        return {"x": self.jx, "y": self.jy, "z": self.jz}[label]


def build_spin_operators(j) -> SpinOperators:
    spin = Spin.from_value(j)
    if spin.two_j < 1:
        raise ValueError("spin operators need j >= 1/2")
    jv = spin.j
    m = jv - np.arange(spin.dim)
    # <m+1|j+|m> on the superdiagonal of the descending basis
    jplus = np.diag(np.sqrt(jv * (jv + 1) - m[1:] * (m[1:] + 1)), 1)
    jx = 0.5 * (jplus + jplus.T)
    jy = -0.5j * (jplus - jplus.T)
    jz = np.diag(m)
    for a in (jx, jy, jz):
        a.setflags(write=False)
    return SpinOperators(spin, jx, jy, jz)


def as_axis(axis) -> np.ndarray:
    """Return a unit 3-vector for an axis label or vector."""
    if isinstance(axis, str):
        try:
            return np.array(_AXIS_LABELS[axis.lower()])
        except KeyError:
            raise ValueError(f"unknown axis label {axis!r}") from None
    v = np.asarray(axis, dtype=float)
    if v.shape != (3,):
        raise ValueError("axis vector must have 3 components")
    if abs(np.linalg.norm(v) - 1.0) > 1e-12:
        raise ValueError(f"axis must be a unit vector, |n| = {np.linalg.norm(v)}")
    return v


def spin_along(ops: SpinOperators, axis) -> np.ndarray:
    n = as_axis(axis)
    out = n[0] * ops.jx + n[1] * ops.jy + n[2] * ops.jz
    if np.allclose(out.imag, 0.0):
        out = out.real
    return out


def _check_hermitian(h: np.ndarray) -> np.ndarray:
    h = np.asarray(h)
    if h.ndim != 2 or h.shape[0] != h.shape[1]:
        raise ValueError(f"expected a square matrix, got shape {h.shape}")
    if h.shape[0] == 0:
        raise ValueError("empty matrix")
    scale = max(1.0, float(np.max(np.abs(h))))
    if np.max(np.abs(h - h.conj().T)) > HERMITIAN_TOL * scale:
        raise ValueError("matrix is not Hermitian")
    return h


def ground_state(h: np.ndarray) -> tuple[float, np.ndarray]:
    """Smallest eigenvalue of a Hermitian matrix and a normalized eigenvector.

    Real symmetric input is solved in real arithmetic.
    """
    h = _check_hermitian(h)
    if np.iscomplexobj(h) and np.max(np.abs(h.imag)) == 0.0:
        h = h.real
    w, v = np.linalg.eigh(h)
    return float(w[0]), v[:, 0]


def is_vector(state) -> bool:
    return np.ndim(state) == 1


def _check_density(rho: np.ndarray) -> np.ndarray:
    rho = _check_hermitian(rho)
    if abs(np.trace(rho).real - 1.0) > DENSITY_TOL:
        raise ValueError(f"density matrix trace is {np.trace(rho).real}, expected 1")
    if np.linalg.eigvalsh(rho)[0] < -DENSITY_TOL:
        raise ValueError("density matrix is not positive semidefinite")
    return rho


def expectation(state, op: np.ndarray) -> float:
    """<op> for a state vector (normalized internally) or a density matrix."""
    op = np.asarray(op)
    state = np.asarray(state)
    if state.shape[0] != op.shape[0]:
        raise ValueError(f"dimension mismatch: state {state.shape}, operator {op.shape}")
    if is_vector(state):
        norm2 = np.vdot(state, state).real
        if norm2 == 0:
            raise ValueError("zero state vector")
        return float(np.vdot(state, op @ state).real / norm2)
    rho = _check_density(state)
    return float(np.trace(rho @ op).real)


def variance(state, op: np.ndarray) -> float:
    op = np.asarray(op)
    mean = expectation(state, op)
    shifted = op - mean * np.eye(op.shape[0])
    state = np.asarray(state)
    if is_vector(state):
        phi = shifted @ state
        var = np.vdot(phi, phi).real / np.vdot(state, state).real
    else:
        var = expectation(state, shifted @ shifted)
    if var < 0:
        if var < -VARIANCE_CLAMP:
            raise ValueError(f"negative variance {var}")
        var = 0.0
    return float(var)
