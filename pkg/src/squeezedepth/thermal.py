"""Ideal Bose gas in an anisotropic 3D harmonic trap.

Solves N = sum_k <n_k> for the chemical potential and reports the ground
level occupation and the double-occupancy ratio exp(-beta (E_0 - mu)).
Energies, including mu, are measured on the absolute scale where the ground
level has the zero-point energy E_0 = hbar (omega_perp + omega_z / 2).
"""
from __future__ import annotations

import json
import math
from dataclasses import asdict, dataclass

import numpy as np
from scipy.optimize import bisect
from scipy.special import zeta

HBAR = 1.054571817e-34  # J s
K_B = 1.380649e-23  # J / K

SERIES_RTOL = 1e-12
MAX_TERMS = 2_000_000
_CHUNK = 4096


class CondensedPhaseError(ValueError):
    """Requested particle number exceeds the thermal (non-condensed) capacity."""


class SeriesConvergenceError(RuntimeError):
    """Fugacity so close to exp(beta E_0) that the Bose series cannot be summed."""


@dataclass(frozen=True)
class TrapSpec:
    """Trap frequencies in units of 2 pi / s, temperature in kelvin."""

    omega_z: float
    omega_perp: float
    temperature: float
    n_total: float

    def __post_init__(self):
        for name in ("omega_z", "omega_perp", "temperature", "n_total"):
            if not getattr(self, name) > 0:
                raise ValueError(f"{name} must be positive")

    @property
    def beta(self) -> float:
        return 1.0 / (K_B * self.temperature)

    @property
    def beta_hbar_omega(self) -> np.ndarray:
        """Dimensionless level spacings (x, y, z)."""
        w = 2 * math.pi * np.array([self.omega_perp, self.omega_perp, self.omega_z])
        return self.beta * HBAR * w

    @property
    def beta_e0(self) -> float:
        return float(np.sum(self.beta_hbar_omega) / 2)

    def level_energy(self, nx: int, ny: int, nz: int) -> float:
        """E_k in joules."""
        w_perp, w_z = 2 * math.pi * self.omega_perp, 2 * math.pi * self.omega_z
        return HBAR * (w_perp * (nx + ny + 1) + w_z * (nz + 0.5))


@dataclass(frozen=True)
class ThermalReport:
    trap: TrapSpec
    beta_mu: float
    beta_e0: float
    ground_occupation: float
    max_double_occupancy_ratio: float
    distinguishable: bool
    threshold: float
    series_terms: int
    relative_residual: float

    def to_dict(self) -> dict:
        d = asdict(self)
        d["units"] = {"omega_z": "2pi/s", "omega_perp": "2pi/s", "temperature": "K"}
        return d

    def to_json(self) -> str:
        return json.dumps(self.to_dict(), indent=2, sort_keys=True) + "\n"


def bose_series(beta_mu: float, beta_hbar_omega, stop_above: float | None = None) -> tuple[float, int]:
    """N(beta mu) by summing the Bose series over powers l of the fugacity.

    Each power resums the geometric sums over all oscillator levels, so
    N = sum_l z^l prod_i exp(-l b_i / 2) / (1 - exp(-l b_i)) with b_i = beta hbar omega_i.
    Returns (N, number of terms used).  All terms are positive, so with
    ``stop_above`` set the sum returns early once it exceeds that value.
    """
    b = np.asarray(beta_hbar_omega, dtype=float)
    beta_e0 = float(np.sum(b) / 2)
    if beta_mu >= beta_e0:
        raise CondensedPhaseError(f"beta mu = {beta_mu} is not below beta E_0 = {beta_e0}")
    total = 0.0
    used = 0
    start = 1
    while start <= MAX_TERMS:
        ell = np.arange(start, start + _CHUNK, dtype=float)
        # log of z^l prod_i e^{-l b_i/2} / (1 - e^{-l b_i})
        log_terms = ell * (beta_mu - beta_e0) - np.sum(np.log(-np.expm1(-np.outer(ell, b))), axis=1)
        terms = np.exp(log_terms)
        partial = np.cumsum(terms) + total
        small = np.flatnonzero(terms < SERIES_RTOL * partial)
        if stop_above is not None and partial[-1] > stop_above:
            first = int(np.argmax(partial > stop_above))
            if not small.size or first < small[0]:
                return float(partial[first]), int(used + first + 1)
        if small.size:
            stop = small[0]
            total = float(partial[stop])
            return total, int(used + stop + 1)
        total = float(partial[-1])
        used += _CHUNK
        start += _CHUNK
    raise SeriesConvergenceError(f"Bose series not converged after {MAX_TERMS} terms "
                                 f"(beta E_0 - beta mu = {beta_e0 - beta_mu:.3g})")


def total_number(z: float, trap: TrapSpec) -> float:
    """Mean particle number at fugacity z = exp(beta mu)."""
    if not z > 0:
        raise ValueError("fugacity must be positive")
    if z >= math.exp(trap.beta_e0):
        raise CondensedPhaseError("fugacity at or above exp(beta E_0): condensed regime")
    return bose_series(math.log(z), trap.beta_hbar_omega)[0]


def direct_level_sum(beta_mu: float, beta_hbar_omega, max_quanta: int = 60) -> float:
    """Truncated triple sum of Bose occupations; reference for ``bose_series``."""
    b = np.asarray(beta_hbar_omega, dtype=float)
    q = np.arange(max_quanta + 1)
    ex = b[0] * (q[:, None, None] + 0.5)
    ey = b[1] * (q[None, :, None] + 0.5)
    ez = b[2] * (q[None, None, :] + 0.5)
    return float(np.sum(1.0 / np.expm1(ex + ey + ez - beta_mu)))


def critical_number(trap: TrapSpec) -> float:
    """Semiclassical thermal capacity zeta(3) (kT)^3 / (hbar^3 w_x w_y w_z)."""
    return float(zeta(3) / np.prod(trap.beta_hbar_omega))


def solve_mu(trap: TrapSpec, threshold: float = 1e-3) -> ThermalReport:
    """Bisect beta mu on (-50, beta E_0 - 1e-9) so that N(beta mu) = n_total."""
    b = trap.beta_hbar_omega
    beta_e0 = trap.beta_e0
    lo, hi = -50.0, beta_e0 - 1e-9
    target = trap.n_total

    def resid(bm):
        # only the sign matters away from the root, so stop once past the target
        return math.log(bose_series(bm, b, stop_above=2 * target)[0] / target)

    if resid(lo) > 0:
        raise ValueError(f"n_total = {target} is too small for the bracket beta mu > -50")
    n_crit = critical_number(trap)
    try:
        r_hi = resid(hi)
    except SeriesConvergenceError as exc:
        # series too slow to settle the sign; fall back on the semiclassical capacity
        if target < n_crit:
            raise SeriesConvergenceError(
                f"n_total = {target:.4g} is within reach of the critical N ~ {n_crit:.4g}; "
                "the near-critical regime is not supported") from exc
        r_hi = -1.0
    if r_hi < 0:
        raise CondensedPhaseError(
            f"n_total = {target:.4g} exceeds the non-condensed capacity; the gas is condensed "
            f"(critical N ~ {n_crit:.4g})")
    beta_mu = bisect(resid, lo, hi, xtol=1e-14, rtol=4 * np.finfo(float).eps, maxiter=400)
    n_found, terms = bose_series(beta_mu, b)
    gap = beta_e0 - beta_mu
    ratio = math.exp(-gap)
    return ThermalReport(
        trap=trap,
        beta_mu=beta_mu,
        beta_e0=beta_e0,
        ground_occupation=1.0 / math.expm1(gap),
        max_double_occupancy_ratio=ratio,
        distinguishable=ratio < threshold,
        threshold=threshold,
        series_terms=int(terms),
        relative_residual=abs(n_found - target) / target,
    )


def occupation(report: ThermalReport, nx: int, ny: int, nz: int) -> float:
    """Mean Bose occupation 1 / (exp(beta (E_k - mu)) - 1) of one trap level."""
    if min(nx, ny, nz) < 0:
        raise ValueError("quantum numbers must be nonnegative")
    trap = report.trap
    x = trap.beta * trap.level_energy(nx, ny, nz) - report.beta_mu
    return 1.0 / math.expm1(x)
