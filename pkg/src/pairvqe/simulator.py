"""Exchange-gate ansatz simulation on the fixed-Hamming-weight pair basis.

Two backends cover the same circuit.  The workhorse evolves a real amplitude
vector over the C(N, n) weight-n bitstrings, applying each exchange gate as a
Givens mixing between basis states related by one pair hop.  A full 2**N
statevector backend applies the literal three-gate decomposition (CNOT,
controlled rotation, CNOT) for cross-validation; both conserve the pair
number exactly.

Bit conventions: qubit p <-> spatial orbital p, bit p of a basis integer is
``(b >> p) & 1``, and printable labels put orbital 0 leftmost so the
reference state with n pairs reads '11...100...0'.
"""

from __future__ import annotations

from dataclasses import dataclass
from itertools import combinations
from typing import NamedTuple, Sequence

import numpy as np

from .pairham import PairHamiltonian, PauliTermGroups

__all__ = [
    "PairBasis",
    "PairState",
    "ExchangeGate",
    "AnsatzCircuit",
    "build_ansatz_circuit",
    "exchange_gate_matrix",
    "evolve",
    "evolve_full",
    "expectation_exact",
    "expectation_from_groups",
    "SampledEnergy",
    "expectation_sampled",
    "OccupationMoments",
    "occupation_moments",
    "moments_from_counts",
    "sample_z_histogram",
    "pair_hop_expectations",
    "expectation_from_moments",
    "diagonal_energies",
    "state_to_csv",
]

_MAX_QUBITS = 20          # rank lookup table is 2**N entries
_MAX_FULL_QUBITS = 14     # dense 2**N backend guard


class PairBasis:
    """Rank/unrank bijection for the weight-n bitstrings of N qubits.

    States are ordered by increasing integer value (rank 0 is the reference
    state with the lowest n bits set).  Hop-pair index arrays are cached per
    (source, target) qubit pair since gates and expectation values keep
    reusing them.
    """

    def __init__(self, nqubits: int, npairs: int):
        if not 0 <= npairs <= nqubits:
            raise ValueError(f"npairs {npairs} outside [0, {nqubits}]")
        if nqubits > _MAX_QUBITS:
            raise ValueError(f"pair basis limited to {_MAX_QUBITS} qubits, got {nqubits}")
        self.nqubits = nqubits
        self.npairs = npairs
        states = sorted(sum(1 << p for p in combo)
                        for combo in combinations(range(nqubits), npairs))
        self.states = np.asarray(states, dtype=np.int64)
        self.size = len(states)
        self._rank = np.full(1 << nqubits, -1, dtype=np.int64)
        self._rank[self.states] = np.arange(self.size)
        # Occupancy matrix (size, N): bit p of each basis state.
        self.occupations = ((self.states[:, None] >> np.arange(nqubits)[None, :]) & 1).astype(np.float64)
        self._hops: dict[tuple[int, int], tuple[np.ndarray, np.ndarray]] = {}

    def rank(self, bits: int) -> int:
        r = int(self._rank[bits])
        if r < 0:
            raise ValueError(f"bitstring {bits:#b} has the wrong pair number")
        return r

    def unrank(self, index: int) -> int:
        return int(self.states[index])

    @property
    def reference_bits(self) -> int:
        return (1 << self.npairs) - 1

    def label(self, bits: int) -> str:
        """Render with orbital 0 leftmost, e.g. '1100' for two pairs of four."""
        return "".join("1" if (bits >> p) & 1 else "0" for p in range(self.nqubits))

    def hop_pairs(self, src: int, dst: int) -> tuple[np.ndarray, np.ndarray]:
        """Index arrays (at_src, at_dst) over basis states with src set and
        dst clear; ``at_dst[k]`` is ``at_src[k]`` with the pair moved."""
        key = (src, dst)
        if key not in self._hops:
            mask_src, mask_dst = 1 << src, 1 << dst
            sel = ((self.states & mask_src) != 0) & ((self.states & mask_dst) == 0)
            at_src = np.nonzero(sel)[0]
            moved = (self.states[at_src] ^ mask_src) | mask_dst
            at_dst = self._rank[moved]
            self._hops[key] = (at_src, at_dst)
        return self._hops[key]


@dataclass
class PairState:
    """Real amplitude vector over a :class:`PairBasis`."""

    basis: PairBasis
    amp: np.ndarray

    def __post_init__(self):
        self.amp = np.asarray(self.amp, dtype=float)
        if self.amp.shape != (self.basis.size,):
            raise ValueError("amplitude length does not match basis size")

    def norm(self) -> float:
        return float(np.linalg.norm(self.amp))

    def probabilities(self) -> np.ndarray:
        return self.amp ** 2


class ExchangeGate(NamedTuple):
    i: int      # occupied-block qubit
    a: int      # virtual-block qubit
    layer: int


@dataclass(frozen=True)
class AnsatzCircuit:
    """Ordered exchange gates over O occupied and V virtual qubits, D layers."""

    nocc: int
    nvir: int
    depth: int
    gates: tuple[ExchangeGate, ...]

    @property
    def nqubits(self) -> int:
        return self.nocc + self.nvir

    @property
    def n_parameters(self) -> int:
        return len(self.gates)

    @property
    def two_qubit_gate_count(self) -> int:
        return 3 * len(self.gates)


def build_ansatz_circuit(nocc: int, nvir: int, depth: int,
                         ordering: Sequence[tuple[int, int]] | None = None) -> AnsatzCircuit:
    """Lay out D identical layers of all O*V exchange gates.

    The default ordering walks the occupied index from highest to lowest and,
    for each, the virtual index from lowest to highest.  ``ordering`` may
    supply any other per-layer sequence of (occupied, virtual) qubit pairs;
    it must still cover every pair exactly once.
    """
    if nocc < 1 or nvir < 1 or depth < 1:
        raise ValueError("need nocc >= 1, nvir >= 1, depth >= 1")
    if ordering is None:
        ordering = [(i, a) for i in range(nocc - 1, -1, -1)
                    for a in range(nocc, nocc + nvir)]
    else:
        ordering = [(int(i), int(a)) for i, a in ordering]
        expected = {(i, a) for i in range(nocc) for a in range(nocc, nocc + nvir)}
        if set(ordering) != expected or len(ordering) != len(expected):
            raise ValueError("ordering must cover every (occupied, virtual) pair exactly once")
    gates = tuple(ExchangeGate(i, a, layer)
                  for layer in range(depth) for i, a in ordering)
    return AnsatzCircuit(nocc=nocc, nvir=nvir, depth=depth, gates=gates)


def exchange_gate_matrix(theta: float) -> np.ndarray:
    """4x4 exchange gate over a qubit pair, basis |00>, |01>, |10>, |11>.

    Particle conserving and real: identity on |00> and |11>, and the Givens
    rotation [[cos(t/2), -sin(t/2)], [sin(t/2), cos(t/2)]] on span{|01>,
    |10>}, so theta = pi transfers the pair completely (up to sign).
    """
    c, s = np.cos(theta / 2.0), np.sin(theta / 2.0)
    u = np.eye(4)
    u[1, 1] = c
    u[1, 2] = -s
    u[2, 1] = s
    u[2, 2] = c
    return u


def evolve(circuit: AnsatzCircuit, theta: Sequence[float], basis: PairBasis) -> PairState:
    """Apply the ansatz to the reference state on the pair basis.

    Each gate mixes every pair of basis states related by moving one set bit
    from qubit i to qubit a; the reference state with i set maps to
    cos(t/2) itself minus sin(t/2) times the excited partner.
    """
    theta = np.asarray(theta, dtype=float)
    if theta.shape != (circuit.n_parameters,):
        raise ValueError(f"expected {circuit.n_parameters} parameters, got {theta.shape}")
    if circuit.nqubits != basis.nqubits or circuit.nocc != basis.npairs:
        raise ValueError("circuit dimensions do not match the basis")

    amp = np.zeros(basis.size)
    amp[basis.rank(basis.reference_bits)] = 1.0
    for gate, t in zip(circuit.gates, theta):
        at_i, at_a = basis.hop_pairs(gate.i, gate.a)
        c, s = np.cos(t / 2.0), np.sin(t / 2.0)
        hi = amp[at_i]
        lo = amp[at_a]
        amp[at_i] = c * hi + s * lo
        amp[at_a] = -s * hi + c * lo
    return PairState(basis=basis, amp=amp)


def _apply_cnot(state: np.ndarray, control: int, target: int, n: int) -> None:
    idx = np.arange(1 << n)
    sel = (((idx >> control) & 1) == 1) & (((idx >> target) & 1) == 0)
    lo = idx[sel]
    hi = lo | (1 << target)
    state[lo], state[hi] = state[hi].copy(), state[lo].copy()


def _apply_cry(state: np.ndarray, control: int, target: int, theta: float, n: int) -> None:
    c, s = np.cos(theta / 2.0), np.sin(theta / 2.0)
    idx = np.arange(1 << n)
    sel = (((idx >> control) & 1) == 1) & (((idx >> target) & 1) == 0)
    lo = idx[sel]
    hi = lo | (1 << target)
    x0, x1 = state[lo].copy(), state[hi].copy()
    state[lo] = c * x0 - s * x1
    state[hi] = s * x0 + c * x1


def evolve_full(circuit: AnsatzCircuit, theta: Sequence[float]) -> np.ndarray:
    """Run the literal three-gate decomposition on a dense 2**N vector.

    Per exchange gate: CNOT from i to a, controlled rotation on i conditioned
    on a, CNOT from i to a, using the real rotation convention of
    :func:`exchange_gate_matrix`.  Support never leaves the weight-n sector.
    """
    n = circuit.nqubits
    if n > _MAX_FULL_QUBITS:
        raise ValueError(f"full backend limited to {_MAX_FULL_QUBITS} qubits, got {n}")
    theta = np.asarray(theta, dtype=float)
    if theta.shape != (circuit.n_parameters,):
        raise ValueError(f"expected {circuit.n_parameters} parameters, got {theta.shape}")

    state = np.zeros(1 << n)
    state[(1 << circuit.nocc) - 1] = 1.0
    for gate, t in zip(circuit.gates, theta):
        _apply_cnot(state, gate.i, gate.a, n)
        _apply_cry(state, gate.a, gate.i, t, n)
        _apply_cnot(state, gate.i, gate.a, n)
    return state


def diagonal_energies(basis: PairBasis, ph: PairHamiltonian) -> np.ndarray:
    """Z-diagonal energy of every basis bitstring (includes e_core)."""
    occ = basis.occupations
    c1 = ph.eps + 2.0 * np.diag(ph.jmat)  # the p = q Coulomb term gives 2 J_pp n_p
    w = 2.0 * ph.jmat - ph.kmat
    np.fill_diagonal(w, 0.0)
    return ph.e_core + occ @ c1 + np.einsum("bp,pq,bq->b", occ, w, occ, optimize=True)


def expectation_exact(state: PairState, ph: PairHamiltonian) -> float:
    """<H> via the diagonal plus single-pair-hop structure, O(C(N,n) N^2)."""
    basis = state.basis
    if basis.nqubits != ph.nqubits or basis.npairs != ph.npairs:
        raise ValueError("state and Hamiltonian dimensions do not match")
    amp = state.amp
    energy = float(amp @ (diagonal_energies(basis, ph) * amp))
    for p in range(ph.nqubits):
        for q in range(p + 1, ph.nqubits):
            at_q, at_p = basis.hop_pairs(q, p)
            if at_q.size:
                energy += 2.0 * ph.kmat[p, q] * float(amp[at_q] @ amp[at_p])
    return energy


def expectation_from_groups(state: PairState, groups: PauliTermGroups) -> float:
    """<H> summed group by group; must match :func:`expectation_exact`."""
    basis = state.basis
    occ = basis.occupations
    zsign = 1.0 - 2.0 * occ  # Z eigenvalue per qubit and basis state
    probs = state.probabilities()
    ez = groups.identity + zsign @ groups.z + np.einsum(
        "bp,pq,bq->b", zsign, groups.zz, zsign, optimize=True)
    energy = float(probs @ ez)
    amp = state.amp
    for p in range(groups.nqubits):
        for q in range(p + 1, groups.nqubits):
            at_q, at_p = basis.hop_pairs(q, p)
            if at_q.size:
                energy += 2.0 * groups.xxyy[p, q] * float(amp[at_q] @ amp[at_p])
    return energy


class SampledEnergy(NamedTuple):
    energy: float
    stderr: float


def sample_z_histogram(state: PairState, shots: int, seed) -> np.ndarray:
    """Simulate Z-basis measurements; returns counts per basis state."""
    if shots < 1:
        raise ValueError("shots must be >= 1")
    rng = np.random.default_rng(seed)
    probs = state.probabilities()
    probs = probs / probs.sum()
    return rng.multinomial(shots, probs)


def expectation_sampled(state: PairState, groups: PauliTermGroups,
                        shots: int, seed) -> SampledEnergy:
    """Finite-shot energy estimate with its standard error.

    Each commuting group is measured independently with ``shots`` shots: the
    Z group by sampling bitstrings from |amp|^2, each (X_p X_q + Y_p Y_q)/2
    pair group from its exact three-outcome (+1, -1, 0) statistics.  Group
    estimates add; standard errors combine in quadrature.  Bit-for-bit
    reproducible for a fixed (state, shots, seed).
    """
    if shots < 1:
        raise ValueError("shots must be >= 1")
    rng = np.random.default_rng(seed)
    basis = state.basis
    amp = state.amp

    probs = state.probabilities()
    probs = probs / probs.sum()
    # Z-diagonal group: eigenvalues are the diagonal energies themselves.
    ez = _z_group_values(basis, groups)
    counts = rng.multinomial(shots, probs)
    mean_z = float(counts @ ez) / shots
    var_z = float(counts @ (ez - mean_z) ** 2) / shots
    energy = mean_z
    variance = var_z / shots

    for p in range(groups.nqubits):
        for q in range(p + 1, groups.nqubits):
            at_q, at_p = basis.hop_pairs(q, p)
            if at_q.size:
                plus = 0.5 * float(((amp[at_q] + amp[at_p]) ** 2).sum())
                minus = 0.5 * float(((amp[at_q] - amp[at_p]) ** 2).sum())
            else:
                plus = minus = 0.0
            rest = max(1.0 - plus - minus, 0.0)
            c_plus, c_minus, _ = rng.multinomial(shots, _normalized3(plus, minus, rest))
            mean = (c_plus - c_minus) / shots
            var = (c_plus + c_minus) / shots - mean ** 2
            coeff = groups.xxyy[p, q]
            energy += coeff * mean
            variance += coeff ** 2 * max(var, 0.0) / shots

    return SampledEnergy(energy=energy, stderr=float(np.sqrt(variance)))


def _z_group_values(basis: PairBasis, groups: PauliTermGroups) -> np.ndarray:
    zsign = 1.0 - 2.0 * basis.occupations
    return groups.identity + zsign @ groups.z + np.einsum(
        "bp,pq,bq->b", zsign, groups.zz, zsign, optimize=True)


def _normalized3(a: float, b: float, c: float) -> list[float]:
    total = a + b + c
    return [a / total, b / total, c / total]


@dataclass(frozen=True)
class OccupationMoments:
    """Diagonal occupation moments of a pair state.

    ``n[p]`` is <n_p>, ``nn[p, q]`` is <n_p n_q> (diagonal equals ``n``), and
    ``transfer[p, r]`` is <(1 - n_r) n_p> = n[p] - nn[p, r], which vanishes
    exactly at p = r.
    """

    n: np.ndarray
    nn: np.ndarray
    transfer: np.ndarray


def occupation_moments(state: PairState) -> OccupationMoments:
    """Moments of the Z-diagonal observables n_p, n_p n_q, (1 - n_r) n_p."""
    probs = state.probabilities()
    return _moments_from_distribution(state.basis, probs / probs.sum())


def moments_from_counts(basis: PairBasis, counts: np.ndarray) -> OccupationMoments:
    """Moments estimated from a measured Z-basis histogram."""
    counts = np.asarray(counts, dtype=float)
    return _moments_from_distribution(basis, counts / counts.sum())


def _moments_from_distribution(basis: PairBasis, probs: np.ndarray) -> OccupationMoments:
    occ = basis.occupations
    n = probs @ occ
    nn = np.einsum("b,bp,bq->pq", probs, occ, occ, optimize=True)
    transfer = n[:, None] - nn
    np.fill_diagonal(transfer, 0.0)
    return OccupationMoments(n=n, nn=nn, transfer=transfer)


def pair_hop_expectations(state: PairState) -> np.ndarray:
    """Matrix of <d+_p d_q> (zero diagonal); symmetric for real amplitudes."""
    basis = state.basis
    amp = state.amp
    n = basis.nqubits
    hop = np.zeros((n, n))
    for p in range(n):
        for q in range(n):
            if p == q:
                continue
            at_q, at_p = basis.hop_pairs(q, p)
            if at_q.size:
                hop[p, q] = float(amp[at_p] @ amp[at_q])
    return hop


def expectation_from_moments(ph: PairHamiltonian, moments: OccupationMoments,
                             hops: np.ndarray) -> float:
    """<H> from precomputed state moments; the state itself is not needed.

    Useful when the same state is scored against many Hamiltonians, e.g.
    during orbital rotations.
    """
    koff = ph.kmat.copy()
    np.fill_diagonal(koff, 0.0)
    nn_off = moments.nn.copy()
    np.fill_diagonal(nn_off, 0.0)
    return float(
        ph.e_core
        + ph.eps @ moments.n
        + (koff * hops).sum()
        - (koff * nn_off).sum()
        + 2.0 * (ph.jmat * moments.nn).sum()
    )


def state_to_csv(state: PairState) -> str:
    """Dense amplitude dump as 'bitstring,amplitude' lines, for debugging."""
    lines = ["bitstring,amplitude"]
    for idx in range(state.basis.size):
        lines.append(f"{state.basis.label(state.basis.unrank(idx))},{float(state.amp[idx])!r}")
    return "\n".join(lines) + "\n"
