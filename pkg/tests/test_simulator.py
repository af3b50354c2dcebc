import numpy as np
import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

from pairvqe.oracles import fci_ground_state, pair_dense_matrix
from pairvqe.pairham import build_pair_hamiltonian, reference_energy, to_pauli_terms
from pairvqe.simulator import (
    AnsatzCircuit,
    PairBasis,
    PairState,
    build_ansatz_circuit,
    diagonal_energies,
    evolve,
    evolve_full,
    exchange_gate_matrix,
    expectation_exact,
    expectation_sampled,
    moments_from_counts,
    occupation_moments,
    sample_z_histogram,
    state_to_csv,
)

from conftest import random_integral_set


# --- basis -----------------------------------------------------------------

@settings(max_examples=30, deadline=None)
@given(st.integers(min_value=1, max_value=8), st.data())
def test_rank_unrank_bijection(nqubits, data):
    npairs = data.draw(st.integers(min_value=0, max_value=nqubits))
    basis = PairBasis(nqubits, npairs)
    values = [basis.unrank(i) for i in range(basis.size)]
    assert values == sorted(values)  # monotone in bitstring value
    assert all(bin(v).count("1") == npairs for v in values)
    assert [basis.rank(v) for v in values] == list(range(basis.size))


def test_reference_state_and_labels():
    basis = PairBasis(4, 2)
    assert basis.reference_bits == 0b0011
    assert basis.label(basis.reference_bits) == "1100"
    assert basis.rank(basis.reference_bits) == 0
    with pytest.raises(ValueError):
        basis.rank(0b0111)


# --- circuit layout ---------------------------------------------------------

@pytest.mark.parametrize("occ,vir,depth,params,gates", [
    (1, 1, 1, 1, 3),     # two-qubit molecule row
    (1, 2, 1, 2, 6),     # three-qubit row
    (4, 2, 1, 8, 24),    # six-qubit row
    (5, 3, 1, 15, 45),   # eight-qubit row
    (4, 8, 1, 32, 96),   # twelve-qubit row
    (4, 8, 2, 64, 192),  # doubled depth
])
def test_circuit_resource_counts(occ, vir, depth, params, gates):
    circuit = build_ansatz_circuit(occ, vir, depth)
    assert circuit.n_parameters == params
    assert circuit.two_qubit_gate_count == gates
    per_layer = {(g.i, g.a) for g in circuit.gates if g.layer == 0}
    assert per_layer == {(i, a) for i in range(occ) for a in range(occ, occ + vir)}


def test_circuit_default_ordering_is_occupied_major():
    circuit = build_ansatz_circuit(2, 2, 1)
    assert [(g.i, g.a) for g in circuit.gates] == [(1, 2), (1, 3), (0, 2), (0, 3)]


def test_circuit_custom_ordering_validated():
    with pytest.raises(ValueError):
        build_ansatz_circuit(2, 1, 1, ordering=[(0, 2), (0, 2)])
    circuit = build_ansatz_circuit(2, 1, 1, ordering=[(0, 2), (1, 2)])
    assert [(g.i, g.a) for g in circuit.gates] == [(0, 2), (1, 2)]


# --- exchange gate ----------------------------------------------------------

def test_exchange_gate_limits():
    assert np.allclose(exchange_gate_matrix(0.0), np.eye(4))
    u = exchange_gate_matrix(np.pi)
    swapped = np.zeros(4)
    swapped[2] = 1.0
    assert np.allclose(u @ np.eye(4)[1], swapped)  # |01> -> |10>
    assert np.allclose(u @ np.eye(4)[2], -np.eye(4)[1])  # |10> -> -|01>


def test_exchange_gate_unitary_and_particle_conserving():
    rng = np.random.default_rng(0)
    number = np.diag([0, 1, 1, 2])
    for theta in rng.uniform(-2 * np.pi, 2 * np.pi, size=100):
        u = exchange_gate_matrix(theta)
        assert np.allclose(u.T @ u, np.eye(4), atol=1e-14)
        assert np.allclose(u @ number - number @ u, 0.0, atol=1e-14)


# --- evolution --------------------------------------------------------------

def test_evolve_zero_angles_gives_reference():
    basis = PairBasis(5, 2)
    circuit = build_ansatz_circuit(2, 3, 1)
    state = evolve(circuit, np.zeros(circuit.n_parameters), basis)
    expected = np.zeros(basis.size)
    expected[basis.rank(basis.reference_bits)] = 1.0
    assert np.array_equal(state.amp, expected)


def test_evolve_single_gate_amplitudes():
    basis = PairBasis(2, 1)
    circuit = build_ansatz_circuit(1, 1, 1)
    t = 0.71
    state = evolve(circuit, [t], basis)
    assert state.amp[basis.rank(0b01)] == pytest.approx(np.cos(t / 2))
    assert state.amp[basis.rank(0b10)] == pytest.approx(-np.sin(t / 2))


def test_evolve_norm_preserved():
    basis = PairBasis(8, 4)
    circuit = build_ansatz_circuit(4, 4, 2)
    rng = np.random.default_rng(3)
    for _ in range(5):
        theta = rng.uniform(-np.pi, np.pi, circuit.n_parameters)
        assert evolve(circuit, theta, basis).norm() == pytest.approx(1.0, abs=1e-12)


def test_full_backend_stays_in_sector_and_matches_subspace():
    rng = np.random.default_rng(4)
    for trial in range(50):
        nocc = rng.integers(1, 4)
        nvir = rng.integers(1, 5)
        n = int(nocc + nvir)
        if n > 8:
            continue
        depth = int(rng.integers(1, 3))
        circuit = build_ansatz_circuit(int(nocc), int(nvir), depth)
        theta = rng.uniform(-np.pi, np.pi, circuit.n_parameters)
        basis = PairBasis(n, int(nocc))
        sub = evolve(circuit, theta, basis)
        full = evolve_full(circuit, theta)
        # No weight leaks out of the pair sector.
        outside = 0.0
        for bits in range(1 << n):
            if bin(bits).count("1") != nocc:
                outside += full[bits] ** 2
        assert outside < 1e-14
        gathered = np.array([full[basis.unrank(i)] for i in range(basis.size)])
        assert np.allclose(gathered, sub.amp, atol=1e-10)


def test_disjoint_gates_commute():
    # Swapping two adjacent gates on disjoint qubit pairs leaves the state
    # unchanged; the angle stays attached to its (i, a) pair.
    basis = PairBasis(4, 2)
    ordering_a = [(0, 2), (1, 3), (0, 3), (1, 2)]
    ordering_b = [(1, 3), (0, 2), (0, 3), (1, 2)]
    angles = {(0, 2): 0.4, (1, 3): -1.1, (0, 3): 0.9, (1, 2): 0.2}
    circ_a = build_ansatz_circuit(2, 2, 1, ordering=ordering_a)
    circ_b = build_ansatz_circuit(2, 2, 1, ordering=ordering_b)
    amp_a = evolve(circ_a, [angles[(g.i, g.a)] for g in circ_a.gates], basis).amp
    amp_b = evolve(circ_b, [angles[(g.i, g.a)] for g in circ_b.gates], basis).amp
    assert np.allclose(amp_a, amp_b, atol=1e-12)


def test_full_backend_size_guard():
    circuit = build_ansatz_circuit(8, 8, 1)
    with pytest.raises(ValueError, match="full backend"):
        evolve_full(circuit, np.zeros(circuit.n_parameters))


# --- expectations -----------------------------------------------------------

def test_expectation_reference_equals_reference_energy():
    s = random_integral_set(5, 4, seed=10)
    ph = build_pair_hamiltonian(s)
    basis = PairBasis(5, 2)
    circuit = build_ansatz_circuit(2, 3, 1)
    state = evolve(circuit, np.zeros(circuit.n_parameters), basis)
    assert expectation_exact(state, ph) == pytest.approx(reference_energy(ph), abs=1e-12)


def test_expectation_matches_dense_quadratic_form():
    s = random_integral_set(6, 6, seed=11)
    ph = build_pair_hamiltonian(s)
    basis = PairBasis(6, 3)
    mat = pair_dense_matrix(ph, basis)
    rng = np.random.default_rng(12)
    for _ in range(10):
        amp = rng.normal(size=basis.size)
        amp /= np.linalg.norm(amp)
        st_ = PairState(basis, amp)
        assert expectation_exact(st_, ph) == pytest.approx(float(amp @ mat @ amp), abs=1e-12)


def test_h2_minimum_reaches_fci(h2_fixture):
    from scipy.optimize import minimize_scalar

    ph = build_pair_hamiltonian(h2_fixture)
    basis = PairBasis(2, 1)
    circuit = build_ansatz_circuit(1, 1, 1)

    def energy(t):
        return expectation_exact(evolve(circuit, [t], basis), ph)

    thetas = np.linspace(-np.pi, np.pi, 101)
    best = thetas[int(np.argmin([energy(t) for t in thetas]))]
    step = thetas[1] - thetas[0]
    refined = minimize_scalar(energy, bounds=(best - step, best + step), method="bounded",
                              options={"xatol": 1e-10})
    e_fci = fci_ground_state(h2_fixture, method="dense").energy
    assert refined.fun == pytest.approx(e_fci, abs=1e-6)


# --- sampling ---------------------------------------------------------------

def _random_state(basis, seed):
    rng = np.random.default_rng(seed)
    amp = rng.normal(size=basis.size)
    return PairState(basis, amp / np.linalg.norm(amp))


def test_sampled_reference_z_group_is_point_mass():
    s = random_integral_set(4, 4, seed=13)
    ph = build_pair_hamiltonian(s)
    groups = to_pauli_terms(ph)
    basis = PairBasis(4, 2)
    circuit = build_ansatz_circuit(2, 2, 1)
    state = evolve(circuit, np.zeros(circuit.n_parameters), basis)
    # All xxyy couplings vanish on the reference only in expectation, so test
    # a Hamiltonian with zero exchange to isolate the Z group.
    zero_k = to_pauli_terms(build_pair_hamiltonian(s))
    zero_k.xxyy[:] = 0.0
    est = expectation_sampled(state, zero_k, shots=50, seed=0)
    assert est.energy == pytest.approx(reference_energy(ph), abs=1e-12)
    assert est.stderr == pytest.approx(0.0, abs=1e-12)


def test_sampled_reproducible_and_validates_shots():
    s = random_integral_set(4, 4, seed=14)
    ph = build_pair_hamiltonian(s)
    groups = to_pauli_terms(ph)
    state = _random_state(PairBasis(4, 2), 15)
    a = expectation_sampled(state, groups, shots=1000, seed=42)
    b = expectation_sampled(state, groups, shots=1000, seed=42)
    assert a == b
    with pytest.raises(ValueError):
        expectation_sampled(state, groups, shots=0, seed=1)


def test_sampled_estimator_consistent_with_exact():
    s = random_integral_set(5, 4, seed=16)
    ph = build_pair_hamiltonian(s)
    groups = to_pauli_terms(ph)
    basis = PairBasis(5, 2)
    state = _random_state(basis, 17)
    exact = expectation_exact(state, ph)
    hits = 0
    trials = 100
    for seed in range(trials):
        est = expectation_sampled(state, groups, shots=100_000, seed=seed)
        if abs(est.energy - exact) < 5 * est.stderr:
            hits += 1
    assert hits >= 99


def test_sampled_stderr_scales_with_shots():
    s = random_integral_set(5, 4, seed=18)
    ph = build_pair_hamiltonian(s)
    groups = to_pauli_terms(ph)
    state = _random_state(PairBasis(5, 2), 19)
    lo = np.mean([expectation_sampled(state, groups, 1_000, seed=k).stderr for k in range(20)])
    hi = np.mean([expectation_sampled(state, groups, 100_000, seed=k).stderr for k in range(20)])
    ratio = lo / hi
    assert 10.0 / 1.5 < ratio < 10.0 * 1.5


# --- moments ----------------------------------------------------------------

def test_moments_of_reference_state():
    basis = PairBasis(5, 2)
    circuit = build_ansatz_circuit(2, 3, 1)
    state = evolve(circuit, np.zeros(circuit.n_parameters), basis)
    m = occupation_moments(state)
    assert np.allclose(m.n, [1, 1, 0, 0, 0])
    for i in range(2):
        for a in range(2, 5):
            assert m.transfer[i, a] == pytest.approx(1.0)
            assert m.transfer[a, i] == pytest.approx(0.0)
    assert np.allclose(np.diag(m.transfer), 0.0)


def test_moments_two_level_state():
    basis = PairBasis(2, 1)
    c, s_ = np.cos(0.3), -np.sin(0.3)
    state = PairState(basis, np.array([c, s_]))
    m = occupation_moments(state)
    assert m.transfer[0, 1] == pytest.approx(c ** 2)
    assert m.transfer[1, 0] == pytest.approx(s_ ** 2)


def test_moments_match_dense_operators():
    basis = PairBasis(6, 3)
    state = _random_state(basis, 20)
    m = occupation_moments(state)
    probs = state.probabilities()
    occ = np.array([[(basis.unrank(idx) >> p) & 1 for p in range(6)]
                    for idx in range(basis.size)], dtype=float)
    for p in range(6):
        assert m.n[p] == pytest.approx(float(probs @ occ[:, p]), abs=1e-12)
        for q in range(6):
            npq = float(probs @ (occ[:, p] * occ[:, q]))
            assert m.nn[p, q] == pytest.approx(npq, abs=1e-12)
            assert m.transfer[p, q] == pytest.approx(m.n[p] - npq, abs=1e-12)


def test_moments_from_sampled_histogram():
    basis = PairBasis(4, 2)
    state = _random_state(basis, 21)
    counts = sample_z_histogram(state, shots=200_000, seed=3)
    sampled = moments_from_counts(basis, counts)
    exact = occupation_moments(state)
    assert np.allclose(sampled.n, exact.n, atol=0.01)
    assert np.allclose(sampled.nn, exact.nn, atol=0.01)


def test_state_csv_dump():
    basis = PairBasis(2, 1)
    state = PairState(basis, np.array([1.0, 0.0]))
    text = state_to_csv(state)
    assert text.splitlines()[0] == "bitstring,amplitude"
    assert "10,1.0" in text
