"""First-quantization simulator for a few particles with internal and external levels.

A single particle lives in C^{d_in} (x) C^{d_ex}; its basis index is
i * d_ex + g for internal level i and external level g.  Internal level i is
the spin state m = j - i, so for qubits label 0 is spin up.  Collective spin
operators act on the internal levels of every particle.

Larger systems are handled by two compact types: ``CollectiveSpinState`` (one
irreducible collective spin, e.g. a permutation-symmetric qubit register) and
``BlockProductState`` (independent blocks).  Every state type answers
``axis_moments`` and ``distribution``, which is all that ``exact_moments`` and
``sample_shots`` need.
"""
from __future__ import annotations

import functools
import itertools
import math
from dataclasses import dataclass

import numpy as np

from .fj import minimal_variance_state
from .moments import AXES, MomentSummary, ShotRecords
from .spin import Spin, _check_density, _check_hermitian, as_axis, build_spin_operators, spin_along

MAX_AMPLITUDES = 2**20
NORM_TOL = 1e-12
PI_TOL = 1e-10


@functools.lru_cache(maxsize=64)
def _ops(two_j: int):
    return build_spin_operators(Spin(two_j))


def _half_keys(values, what="spin eigenvalue"):
    """Map half-integer values to integers 2 m, checking they really are half-integers."""
    twice = np.rint(2 * np.asarray(values, dtype=float))
    if np.max(np.abs(twice - 2 * np.asarray(values)), initial=0.0) > 1e-8:
        raise RuntimeError(f"{what} is not a multiple of 1/2")
    return twice.astype(np.int64)


def _collapse(keys, probs):
    """Combine equal outcomes; returns (values, probabilities) sorted by value."""
    keys = np.asarray(keys).ravel()
    lo = int(keys.min())
    p = np.bincount(keys - lo, weights=np.asarray(probs, dtype=float).ravel())
    idx = np.flatnonzero(p > 0)
    p = p[idx] / p.sum()
    return (idx + lo) / 2.0, p


# ---------------------------------------------------------------------------
# state types


@dataclass(frozen=True, eq=False)
class PureStateFQ:
    """n particles, amplitudes over (d_in d_ex)^n product labels."""

    n: int
    d_in: int
    d_ex: int
    amplitudes: np.ndarray

    def __post_init__(self):
        if self.n < 1 or self.d_in < 1 or self.d_ex < 1:
            raise ValueError("n, d_in and d_ex must be positive")
        size = (self.d_in * self.d_ex) ** self.n
        if size > MAX_AMPLITUDES:
            raise ValueError(f"{size} amplitudes exceed the cap of {MAX_AMPLITUDES}")
        amps = np.array(self.amplitudes, dtype=complex).ravel()
        if amps.size != size:
            raise ValueError(f"expected {size} amplitudes, got {amps.size}")
        norm = np.linalg.norm(amps)
        if abs(norm - 1) > NORM_TOL:
            raise ValueError(f"state norm is {norm}, expected 1")
        amps.setflags(write=False)
        object.__setattr__(self, "amplitudes", amps)

    @classmethod
    def normalized(cls, n, d_in, d_ex, amplitudes) -> "PureStateFQ":
        amps = np.asarray(amplitudes, dtype=complex).ravel()
        norm = np.linalg.norm(amps)
        if norm == 0:
            raise ValueError("zero vector")
        return cls(n, d_in, d_ex, amps / norm)

    @classmethod
    def product(cls, singles, d_in: int, d_ex: int = 1) -> "PureStateFQ":
        """Product of single-particle vectors of length d_in * d_ex."""
        out = np.ones(1, dtype=complex)
        for s in singles:
            s = np.asarray(s, dtype=complex)
            out = np.kron(out, s / np.linalg.norm(s))
        return cls(len(singles), d_in, d_ex, out)

    @classmethod
    def basis(cls, labels, d_in: int, d_ex: int = 1) -> "PureStateFQ":
        d = d_in * d_ex
        amps = np.zeros(d ** len(labels), dtype=complex)
        amps[_label_index(labels, d)] = 1
        return cls(len(labels), d_in, d_ex, amps)

    @property
    def d(self) -> int:
        return self.d_in * self.d_ex

    @property
    def spin(self) -> Spin:
        return Spin(self.d_in - 1)

    def tensor(self) -> np.ndarray:
        return self.amplitudes.reshape((self.d,) * self.n)

    def _collective(self, single: np.ndarray) -> np.ndarray:
        t = self.tensor()
        out = np.zeros_like(t)
        for p in range(self.n):
            out += np.moveaxis(np.tensordot(single, t, axes=([1], [p])), 0, p)
        return out.ravel()

    def apply_internal(self, op_in: np.ndarray) -> np.ndarray:
        """sum_p (op_in (x) 1_ex)^(p) applied to the state vector."""
        return self._collective(np.kron(op_in, np.eye(self.d_ex)))

    def axis_moments(self, axis):
        phi = self.apply_internal(spin_along(_ops(self.d_in - 1), axis))
        return float(np.vdot(self.amplitudes, phi).real), float(np.vdot(phi, phi).real)

    def distribution(self, axis):
        """Spectral distribution of J_axis: (outcomes, probabilities)."""
        m, u = np.linalg.eigh(spin_along(_ops(self.d_in - 1), axis))
        t = self.tensor()
        rot = np.kron(u.conj().T, np.eye(self.d_ex))
        for p in range(self.n):
            t = np.moveaxis(np.tensordot(rot, t, axes=([1], [p])), 0, p)
        probs = np.abs(t.reshape((self.d_in, self.d_ex) * self.n)) ** 2
        probs = probs.sum(axis=tuple(range(1, 2 * self.n, 2)))
        total = np.zeros((self.d_in,) * self.n)
        for p in range(self.n):
            shape = [1] * self.n
            shape[p] = self.d_in
            total = total + m.reshape(shape)
        return _collapse(_half_keys(total), probs)


@dataclass(frozen=True, eq=False)
class DensityFQ:
    """Mixed state of n particles; handled as its eigen-ensemble of pure states."""

    n: int
    d_in: int
    d_ex: int
    rho: np.ndarray

    def __post_init__(self):
        dim = (self.d_in * self.d_ex) ** self.n
        if dim * dim > MAX_AMPLITUDES * 16:
            raise ValueError("density matrix too large")
        rho = _check_density(np.asarray(self.rho, dtype=complex))
        if rho.shape != (dim, dim):
            raise ValueError(f"expected a {dim}x{dim} matrix, got {rho.shape}")
        object.__setattr__(self, "rho", rho)

    @property
    def spin(self) -> Spin:
        return Spin(self.d_in - 1)

    def ensemble(self):
        w, v = np.linalg.eigh(self.rho)
        keep = w > 1e-14
        w = w[keep] / w[keep].sum()
        return [(float(p), PureStateFQ.normalized(self.n, self.d_in, self.d_ex, v[:, k]))
                for p, k in zip(w, np.flatnonzero(keep))]


@dataclass(frozen=True, eq=False)
class CollectiveSpinState:
    """n spin-j particles confined to one collective spin-J irrep (J = two_J / 2)."""

    n: int
    spin: Spin
    two_J: int
    amplitudes: np.ndarray

    def __post_init__(self):
        spin = Spin.from_value(self.spin) if not isinstance(self.spin, Spin) else self.spin
        object.__setattr__(self, "spin", spin)
        if self.n < 1:
            raise ValueError("n must be positive")
        top = self.n * spin.two_j
        if not 0 <= self.two_J <= top or (top - self.two_J) % 2:
            raise ValueError(f"J = {self.two_J}/2 is not reachable by {self.n} spin-{spin} particles")
        amps = np.array(self.amplitudes, dtype=complex).ravel()
        if amps.size != self.two_J + 1:
            raise ValueError(f"expected {self.two_J + 1} amplitudes")
        if abs(np.linalg.norm(amps) - 1) > NORM_TOL:
            raise ValueError("state must be normalized")
        amps.setflags(write=False)
        object.__setattr__(self, "amplitudes", amps)

    def axis_moments(self, axis):
        phi = spin_along(_ops(self.two_J), axis) @ self.amplitudes
        return float(np.vdot(self.amplitudes, phi).real), float(np.vdot(phi, phi).real)

    def distribution(self, axis):
        m, u = np.linalg.eigh(spin_along(_ops(self.two_J), axis))
        return _collapse(_half_keys(m), np.abs(u.conj().T @ self.amplitudes) ** 2)

    def to_fq(self) -> PureStateFQ:
        """Embed the fully symmetric irrep (J = n j) in first quantization."""
        if self.two_J != self.n * self.spin.two_j:
            raise ValueError("only the fully symmetric irrep J = n j has a unique embedding")
        d_in = self.spin.dim
        ops = _ops(self.spin.two_j)
        lower = np.asarray(ops.jx - 1j * ops.jy)
        top = PureStateFQ.basis((0,) * self.n, d_in)
        amps = np.zeros(d_in**self.n, dtype=complex)
        vec = top.amplitudes
        for k, c in enumerate(self.amplitudes):
            # |J, J - k> is the normalized k-fold collective lowering of the top state
            if k:
                vec = PureStateFQ(self.n, d_in, 1, vec).apply_internal(lower)
                vec = vec / np.linalg.norm(vec)
            amps += c * vec
        return PureStateFQ.normalized(self.n, d_in, 1, amps)


@dataclass(frozen=True, eq=False)
class BlockProductState:
    """Tensor product of independent blocks, each a fixed-n state."""

    blocks: tuple

    def __post_init__(self):
        blocks = tuple(self.blocks)
        if not blocks:
            raise ValueError("need at least one block")
        spins = {b.spin for b in blocks}
        if len(spins) != 1:
            raise ValueError("all blocks must share the particle spin")
        object.__setattr__(self, "blocks", blocks)

    @property
    def n(self) -> int:
        return sum(b.n for b in self.blocks)

    @property
    def spin(self) -> Spin:
        return self.blocks[0].spin

    def axis_moments(self, axis):
        mean, var = 0.0, 0.0
        for b in self.blocks:
            m, s = b.axis_moments(axis)
            mean += m
            var += s - m * m
        return mean, var + mean * mean

    def distribution(self, axis):
        cache = {}
        keys, probs = np.zeros(1, dtype=np.int64), np.ones(1)
        for b in self.blocks:
            if id(b) not in cache:
                cache[id(b)] = b.distribution(axis)
            v, p = cache[id(b)]
            bk = _half_keys(v)
            lo = keys.min() + bk.min()
            dense_a = np.bincount(keys - keys.min(), weights=probs)
            dense_b = np.bincount(bk - bk.min(), weights=p)
            conv = np.convolve(dense_a, dense_b)
            keys = np.arange(conv.size) + lo
            probs = conv
        return _collapse(keys, np.clip(probs, 0.0, None))


@dataclass(frozen=True, eq=False)
class FluctuatingState:
    """Mixture sum_s q_s rho_s of states with (possibly) different particle numbers."""

    sectors: tuple

    def __post_init__(self):
        flat = []
        for q, st in self.sectors:
            q = float(q)
            if q < 0:
                raise ValueError("sector weights must be nonnegative")
            if isinstance(st, FluctuatingState):
                flat.extend((q * qq, s) for qq, s in st.sectors)
            elif isinstance(st, DensityFQ):
                flat.extend((q * qq, s) for qq, s in st.ensemble())
            else:
                flat.append((q, st))
        total = sum(q for q, _ in flat)
        if abs(total - 1) > 1e-12:
            raise ValueError(f"sector weights sum to {total}, expected 1")
        if len({s.spin for _, s in flat}) != 1:
            raise ValueError("all sectors must share the particle spin")
        object.__setattr__(self, "sectors", tuple((q, s) for q, s in flat if q > 0))

    @property
    def spin(self) -> Spin:
        return self.sectors[0][1].spin


def _as_mixture(state) -> FluctuatingState:
    if isinstance(state, FluctuatingState):
        return state
    return FluctuatingState(((1.0, state),))


# ---------------------------------------------------------------------------
# symmetrization and Dicke states


def _swap(t: np.ndarray, a: int, b: int) -> np.ndarray:
    return np.swapaxes(t, a, b)


def symmetrize(state: PureStateFQ) -> PureStateFQ:
    """Project onto the permutation-symmetric subspace and renormalize.

    Uses S_n = S_{n-1} (1 + sum_{i<n} T_{i n}) / n, which needs O(n^2)
    transpositions instead of n! permutations.
    """
    t = state.tensor()
    for k in range(state.n - 1, 0, -1):
        acc = t.copy()
        for i in range(k):
            acc = acc + _swap(t, i, k)
        t = acc / (k + 1)
    norm = np.linalg.norm(t)
    if norm < 1e-12:
        raise ValueError("state has no permutation-symmetric component (e.g. a singlet)")
    return PureStateFQ(state.n, state.d_in, state.d_ex, t.ravel() / norm)


def is_symmetric(state: PureStateFQ, tol: float = 1e-10) -> bool:
    t = state.tensor()
    return all(np.max(np.abs(_swap(t, i, i + 1) - t)) <= tol for i in range(state.n - 1))


@dataclass(frozen=True)
class OccupationPattern:
    """Occupation numbers N_{i,g} (internal level i, external level g)."""

    counts: np.ndarray
    n_ex: tuple | None = None

    def __post_init__(self):
        c = np.array(self.counts)
        if c.ndim == 1:
            c = c[:, None]
        if c.ndim != 2 or c.size == 0:
            raise ValueError("counts must be a d_in x d_ex array")
        if not np.all(c == np.round(c)) or np.any(c < 0):
            raise ValueError("occupations must be nonnegative integers")
        c = c.astype(int)
        c.setflags(write=False)
        object.__setattr__(self, "counts", c)
        cols = tuple(int(v) for v in c.sum(axis=0))
        if self.n_ex is not None and tuple(int(v) for v in self.n_ex) != cols:
            raise ValueError(f"inconsistent occupations: external totals {tuple(self.n_ex)} "
                             f"but internal occupations sum to {cols}")
        object.__setattr__(self, "n_ex", cols)
        if self.n < 1:
            raise ValueError("pattern has no particles")

    def __hash__(self):
        return hash((self.counts.shape, self.counts.tobytes()))

    def __eq__(self, other):
        return isinstance(other, OccupationPattern) and np.array_equal(self.counts, other.counts)

    @property
    def n(self) -> int:
        return int(self.counts.sum())

    @property
    def d_in(self) -> int:
        return self.counts.shape[0]

    @property
    def d_ex(self) -> int:
        return self.counts.shape[1]

    def level(self, g: int) -> np.ndarray:
        """N_g = (N_{1,g}, ..., N_{d_in,g})."""
        return self.counts[:, g]

    def labels(self) -> tuple:
        """Sorted multiset of single-particle indices i * d_ex + g."""
        out = []
        for i in range(self.d_in):
            for g in range(self.d_ex):
                out += [i * self.d_ex + g] * int(self.counts[i, g])
        return tuple(sorted(out))


def _label_index(labels, d):
    idx = 0
    for lab in labels:
        idx = idx * d + int(lab)
    return idx


def distinct_permutations(labels) -> list:
    return sorted(set(itertools.permutations(labels)))


def build_dicke_state(pattern: OccupationPattern) -> PureStateFQ:
    """Normalized sum over distinct orderings of the pattern's single-particle labels."""
    d = pattern.d_in * pattern.d_ex
    if d**pattern.n > MAX_AMPLITUDES:
        raise ValueError("pattern too large for a dense state")
    perms = np.array(distinct_permutations(pattern.labels()), dtype=np.int64)
    index = perms @ (d ** np.arange(pattern.n - 1, -1, -1, dtype=np.int64))
    amps = np.zeros(d**pattern.n, dtype=complex)
    amps[index] = 1 / math.sqrt(len(perms))
    return PureStateFQ(pattern.n, pattern.d_in, pattern.d_ex, amps)


def patterns_for(n_ex, d_in: int) -> list:
    """All occupation patterns with the given external occupations."""
    per_level = []
    for ng in n_ex:
        opts = []
        for combo in itertools.combinations_with_replacement(range(d_in), int(ng)):
            opts.append(np.bincount(np.array(combo, dtype=int), minlength=d_in))
        per_level.append(opts)
    return [OccupationPattern(np.stack(cols, axis=1)) for cols in itertools.product(*per_level)]


# ---------------------------------------------------------------------------
# permutation-invariant internal operators only see per-level symmetrized states


def permute_operator(a: np.ndarray, perm, n: int, d: int) -> np.ndarray:
    """P A P^dagger for the permutation of n particles with local dimension d."""
    t = np.asarray(a).reshape((d,) * (2 * n))
    order = list(perm) + [n + p for p in perm]
    return t.transpose(order).reshape(d**n, d**n)


def symmetrize_operator(a: np.ndarray, n: int, d: int) -> np.ndarray:
    """Average of P A P^dagger over all n! permutations."""
    perms = list(itertools.permutations(range(n)))
    return sum(permute_operator(a, p, n, d) for p in perms) / len(perms)


def check_permutation_invariant(a: np.ndarray, n: int, d: int, trials: int = 50,
                                seed: int = 0, tol: float = PI_TOL) -> None:
    rng = np.random.default_rng(seed)
    scale = max(1.0, float(np.max(np.abs(a))))
    for _ in range(trials):
        perm = rng.permutation(n)
        if np.max(np.abs(permute_operator(a, perm, n, d) - a)) > tol * scale:
            raise ValueError(f"operator is not permutation invariant (permutation {perm.tolist()})")


def _internal_state(pattern: OccupationPattern) -> np.ndarray:
    """prod_g |D(N_g)> on the internal levels, particles grouped by external level."""
    out = np.ones(1, dtype=complex)
    for g in range(pattern.d_ex):
        ng = pattern.level(g)
        if ng.sum() == 0:
            continue
        out = np.kron(out, build_dicke_state(OccupationPattern(ng[:, None])).amplitudes)
    return out


def _coefficient_items(coefficients):
    items = list(coefficients.items()) if isinstance(coefficients, dict) else list(coefficients)
    if not items:
        raise ValueError("no patterns given")
    return [(p if isinstance(p, OccupationPattern) else OccupationPattern(p), complex(c))
            for p, c in items]


def obs3_check(coefficients, a_in: np.ndarray, trials: int = 50, seed: int = 0):
    """Both sides of the per-level reduction for a PI internal operator.

    ``coefficients`` maps occupation patterns (sharing external occupations)
    to amplitudes.  Returns ``(lhs, rhs)``: lhs is <Psi_S| A_in (x) 1_ex |Psi_S>
    in the full space, rhs the same expectation on the internal state built
    from per-level symmetrized factors.
    """
    items = _coefficient_items(coefficients)
    first = items[0][0]
    for p, _ in items:
        if p.counts.shape != first.counts.shape:
            raise ValueError("patterns must share d_in and d_ex")
        if p.n_ex != first.n_ex:
            raise ValueError(f"mixed external occupations {first.n_ex} and {p.n_ex}")
    if len({p for p, _ in items}) != len(items):
        raise ValueError("duplicate patterns")
    n, d_in, d_ex = first.n, first.d_in, first.d_ex
    a_in = _check_hermitian(np.asarray(a_in, dtype=complex))
    if a_in.shape != (d_in**n, d_in**n):
        raise ValueError(f"A_in must be {d_in**n}x{d_in**n}")
    check_permutation_invariant(a_in, n, d_in, trials, seed)

    coeffs = np.array([c for _, c in items])
    norm = np.linalg.norm(coeffs)
    if norm == 0:
        raise ValueError("all coefficients vanish")
    coeffs = coeffs / norm

    full = sum(c * build_dicke_state(p).amplitudes for (p, _), c in zip(items, coeffs))
    t = full.reshape((d_in, d_ex) * n)
    t = t.transpose(list(range(0, 2 * n, 2)) + list(range(1, 2 * n, 2))).reshape(d_in**n, d_ex**n)
    lhs = float(np.vdot(t, a_in @ t).real)

    psi_in = sum(c * _internal_state(p) for (p, _), c in zip(items, coeffs))
    rhs = float(np.vdot(psi_in, a_in @ psi_in).real)
    return lhs, rhs


def collective_internal_operator(single: np.ndarray, n: int) -> np.ndarray:
    """sum_p single^(p) as a dense d^n x d^n matrix."""
    d = single.shape[0]
    out = np.zeros((d**n, d**n), dtype=complex)
    for p in range(n):
        out += np.kron(np.kron(np.eye(d**p), single), np.eye(d ** (n - p - 1)))
    return out


# ---------------------------------------------------------------------------
# position-resolved (site) operators


def two_site_state(psi_12, d_in: int, site_a: int, site_b: int, d_ex: int = 2) -> PureStateFQ:
    """(|psi_12>|a b> + |psi_21>|b a>) / sqrt(2): particle 1 at site a, particle 2 at b."""
    if site_a == site_b:
        raise ValueError("sites must differ")
    psi_12 = np.asarray(psi_12, dtype=complex).reshape(d_in, d_in)
    ea, eb = np.eye(d_ex)[site_a], np.eye(d_ex)[site_b]
    t = np.einsum("ij,g,h->igjh", psi_12, ea, eb).ravel()
    return symmetrize(PureStateFQ.normalized(2, d_in, d_ex, t))


def local_site_expectation(state: PureStateFQ, a: np.ndarray, site: int) -> float:
    """<M_site> with M_site = sum_p (a (x) |site><site|)^(p).

    For a symmetric state with exactly one particle at ``site`` this is the
    expectation of ``a`` on whichever particle sits there.
    """
    a = _check_hermitian(np.asarray(a, dtype=complex))
    if a.shape != (state.d_in, state.d_in):
        raise ValueError("a must act on one particle's internal levels")
    if not 0 <= site < state.d_ex:
        raise ValueError("site out of range")
    if not is_symmetric(state):
        raise ValueError("state is not permutation symmetric")
    proj = np.zeros((state.d_ex, state.d_ex))
    proj[site, site] = 1
    occ = state._collective(np.kron(np.eye(state.d_in), proj))
    occupancy = float(np.vdot(state.amplitudes, occ).real)
    if abs(occupancy - 1) > 1e-10:
        raise ValueError(f"site {site} holds {occupancy:.6g} particles on average; expected exactly 1")
    phi = state._collective(np.kron(a, proj))
    return float(np.vdot(state.amplitudes, phi).real)


# ---------------------------------------------------------------------------
# moments and sampling


def _axis_vectors(axes):
    return [as_axis(a) for a in axes]


def exact_moments(state, axes=("z", "x")) -> MomentSummary:
    """Exact moments of a (possibly fluctuating-number) state, sector by sector."""
    mix = _as_mixture(state)
    n_axis, p_axis = axes
    vec_n, vec_p = _axis_vectors(axes)
    q = np.array([w for w, _ in mix.sectors])
    ns = np.array([s.n for _, s in mix.sectors], dtype=float)
    per = {a: np.array([s.axis_moments(a) for _, s in mix.sectors]) for a in AXES}
    jn = np.array([s.axis_moments(vec_n)[0] for _, s in mix.sectors])
    jp = np.array([s.axis_moments(vec_p) for _, s in mix.sectors])

    means = {a: float(q @ per[a][:, 0]) for a in AXES}
    second = {a: float(q @ per[a][:, 1]) for a in AXES}
    var = {a: max(second[a] - means[a] ** 2, 0.0) for a in AXES}
    var_p = max(float(q @ jp[:, 1]) - float(q @ jp[:, 0]) ** 2, 0.0)
    weighted = {"inv_n": {a: float(q @ (per[a][:, 1] / ns)) for a in AXES}}
    min_n = int(ns.min())
    if min_n >= 2:
        weighted["inv_nm1"] = {a: float(q @ (per[a][:, 1] / (ns - 1))) for a in AXES}
        weighted["n_over_nm1"] = float(q @ (ns / (ns - 1)))
        weighted["n_nm2_over_nm1"] = float(q @ (ns * (ns - 2) / (ns - 1)))
    fixed = int(ns[0]) if np.all(ns == ns[0]) else None
    return MomentSummary(
        spin=mix.spin,
        mean_n=float(q @ ns),
        mean_n2=float(q @ ns**2),
        mean_j_n=float(q @ jn),
        var_j_perp=var_p,
        axes=(n_axis, p_axis),
        means=means,
        second_moments=second,
        variances=var,
        weighted=weighted,
        se={},
        fixed_n=fixed,
        n_shots=None,
        min_n=min_n,
    )


def xi2_state(state, n_axis="z", perp_axis="x") -> float:
    """Squeezing parameter <N> (Delta J_perp)^2 / <J_n>^2 computed exactly."""
    m = exact_moments(state, (n_axis, perp_axis))
    if abs(m.mean_j_n) < 1e-12 * max(1.0, m.mean_n):
        raise ValueError("<J_n> = 0 along the chosen axis, so xi^2 is undefined; states such "
                         "as twin-Fock states have zero mean spin in every direction")
    return m.mean_n * m.var_j_perp / m.mean_j_n**2


def sample_shots(state, axis, count: int, seed: int) -> ShotRecords:
    """Synthetic shots drawn from the exact distribution of J_axis, per sector.

    ``axis`` may be one label or a sequence of labels; each gets ``count``
    shots from its own child seed, and the records are concatenated.
    """
    if count < 1:
        raise ValueError("count must be >= 1")
    axes = (axis,) if isinstance(axis, str) else tuple(axis)
    for a in axes:
        if a not in AXES:
            raise ValueError(f"shot records support the axes x, y, z; got {a!r}")
    mix = _as_mixture(state)
    children = np.random.SeedSequence(seed).spawn(len(axes))
    out = None
    for a, child in zip(axes, children):
        rng = np.random.default_rng(child)
        q = np.array([w for w, _ in mix.sectors])
        counts = rng.multinomial(count, q / q.sum())
        ns, vals = [], []
        for (_, st), c in zip(mix.sectors, counts):
            if c == 0:
                continue
            v, p = st.distribution(a)
            vals.append(rng.choice(v, size=c, p=p))
            ns.append(np.full(c, st.n))
        order = rng.permutation(count)
        n_arr = np.concatenate(ns)[order]
        j_arr = np.concatenate(vals)[order]
        cols = {b: (j_arr if b == a else np.full(count, np.nan)) for b in AXES}
        rec = ShotRecords(mix.spin, n_arr, cols, {"seed": seed, "axis": a})
        out = rec if out is None else out + rec
    return out


# ---------------------------------------------------------------------------
# named states


def psi_alpha(alpha: float) -> PureStateFQ:
    """sqrt(alpha)|11> + sqrt(1-alpha)|01> for two qubits (label 0 = spin up)."""
    if not 0 <= alpha <= 1:
        raise ValueError("alpha must lie in [0, 1]")
    amps = np.zeros(4, dtype=complex)
    amps[0b11] = math.sqrt(alpha)
    amps[0b01] = math.sqrt(1 - alpha)
    return PureStateFQ.normalized(2, 2, 1, amps)


def beta_of_alpha(alpha):
    return 2 * alpha / (1 + alpha)


def psi_plus() -> PureStateFQ:
    """(|01> + |10>) / sqrt(2), the two-particle twin-Fock state."""
    return symmetrize(PureStateFQ.basis((0, 1), 2))


def css(n: int, axis="z", j=0.5) -> CollectiveSpinState:
    """Coherent spin state: all n spins fully polarized along ``axis``."""
    spin = Spin.from_value(j)
    two_J = n * spin.two_j
    _, v = np.linalg.eigh(spin_along(_ops(two_J), axis))
    return CollectiveSpinState(n, spin, two_J, v[:, -1])


def css_fq(n: int, axis="z", d_ex: int = 1) -> PureStateFQ:
    _, v = np.linalg.eigh(spin_along(_ops(1), axis))
    single = np.kron(v[:, -1], np.eye(d_ex)[0])
    return PureStateFQ.product([single] * n, 2, d_ex)


def twin_fock(n: int) -> CollectiveSpinState:
    """n/2 qubits in each of two modes: |J = n/2, m = 0>."""
    if n < 2 or n % 2:
        raise ValueError("twin-Fock needs an even n >= 2")
    amps = np.zeros(n + 1)
    amps[n // 2] = 1
    return CollectiveSpinState(n, Spin(1), n, amps)


def squeezed_block_state(n_blocks: int, block_size: int = 5, x: float = 0.8) -> BlockProductState:
    """Product of identical symmetric qubit blocks, each with the least (Delta J_x)^2 at <J_z> = x J."""
    psi, _, _ = minimal_variance_state(Spin(block_size), x)
    block = CollectiveSpinState(block_size, Spin(1), block_size, psi)
    return BlockProductState((block,) * n_blocks)


def random_pure_fq(n: int, d_in: int, d_ex: int, rng) -> PureStateFQ:
    size = (d_in * d_ex) ** n
    v = rng.normal(size=size) + 1j * rng.normal(size=size)
    return PureStateFQ.normalized(n, d_in, d_ex, v)
