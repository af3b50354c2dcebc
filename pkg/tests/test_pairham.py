import numpy as np
import pytest

from pairvqe.integrals import apply_sign_flips, freeze_core, load_fcidump, parse_fcidump
from pairvqe.oracles import (
    doci_ground_state,
    fci_dense_matrix,
    pair_dense_matrix,
    rhf_energy,
)
from pairvqe.pairham import build_pair_hamiltonian, format_tables, reference_energy, to_pauli_terms
from pairvqe.simulator import PairBasis, PairState, expectation_exact, expectation_from_groups

from conftest import ONE_ORBITAL_TOY, fixture_path, fixture_point, random_integral_set


@pytest.fixture(scope="module")
def toy():
    return parse_fcidump(ONE_ORBITAL_TOY)


def test_one_orbital_energy(toy):
    ph = build_pair_hamiltonian(toy)
    # e_core + eps_1 + 2 J_11 = 0.5 - 2.625 + 1.25 = closed-shell 2h + J + e_core
    assert ph.eps[0] == pytest.approx(-2.625, abs=1e-14)
    assert reference_energy(ph) == pytest.approx(-0.875, abs=1e-14)
    assert rhf_energy(toy) == pytest.approx(-0.875, abs=1e-14)


def test_reference_equals_rhf_identity_everywhere():
    cases = [
        parse_fcidump(ONE_ORBITAL_TOY),
        random_integral_set(4, 4, seed=1),
        random_integral_set(5, 6, seed=2),
        load_fcidump(fixture_path("h2", "0.735")),
        freeze_core(load_fcidump(fixture_path("h2o", "0.95")), [0]),
    ]
    for s in cases:
        ph = build_pair_hamiltonian(s)
        assert reference_energy(ph) == pytest.approx(rhf_energy(s), abs=1e-12)


def test_h2_reference_matches_fixture_rhf(h2_fixture, h2_rhf_reference):
    ph = build_pair_hamiltonian(h2_fixture)
    assert reference_energy(ph) == pytest.approx(h2_rhf_reference, abs=1e-8)


def test_reference_invariant_under_sign_flips():
    s = random_integral_set(5, 6, seed=3)
    e0 = reference_energy(build_pair_hamiltonian(s))
    for signs in ([1, -1, 1, -1, 1], [-1, -1, 1, 1, -1]):
        e1 = reference_energy(build_pair_hamiltonian(apply_sign_flips(s, signs)))
        assert e1 == pytest.approx(e0, abs=1e-12)


def _seniority_zero_fci_energy(s):
    """Independent check: full determinant FCI matrix restricted to rows and
    columns whose alpha and beta strings coincide."""
    mat, strings = fci_dense_matrix(s)
    ns = len(strings)
    keep = [ia * ns + ia for ia in range(ns)]
    block = mat[np.ix_(keep, keep)]
    return float(np.linalg.eigh(block)[0][0])


def test_pair_ground_state_equals_seniority_restricted_fci():
    s = freeze_core(load_fcidump(fixture_path("h2o", "0.95")), [0])
    ph = build_pair_hamiltonian(s)
    e_pair = doci_ground_state(ph).energy
    e_restricted = _seniority_zero_fci_energy(s)
    assert e_pair == pytest.approx(e_restricted, abs=1e-9)


def test_dense_pair_matrix_structure():
    s = random_integral_set(5, 4, seed=4)
    ph = build_pair_hamiltonian(s)
    basis = PairBasis(5, 2)
    mat = pair_dense_matrix(ph, basis)
    assert np.allclose(mat, mat.T, atol=1e-14)
    for col in range(basis.size):
        b = basis.unrank(col)
        for row in range(basis.size):
            if row == col:
                continue
            bp = basis.unrank(row)
            diff = b ^ bp
            if bin(diff).count("1") == 2 and bin(b).count("1") == bin(bp).count("1"):
                q = (diff & b).bit_length() - 1
                p = (diff & bp).bit_length() - 1
                assert mat[row, col] == pytest.approx(ph.kmat[p, q], abs=1e-14)
            else:
                assert mat[row, col] == 0.0


def test_pauli_terms_single_qubit():
    ph = build_pair_hamiltonian(parse_fcidump(ONE_ORBITAL_TOY))
    groups = to_pauli_terms(ph)
    assert groups.xxyy.shape == (1, 1)
    assert groups.xxyy[0, 0] == 0.0
    assert groups.zz[0, 0] == 0.0
    # identity + Z reproduce both basis energies: occupied and empty.
    assert groups.identity - groups.z[0] == pytest.approx(-0.875, abs=1e-12)
    assert groups.identity + groups.z[0] == pytest.approx(ph.e_core, abs=1e-12)


def test_pauli_xxyy_coefficient_is_exchange():
    s = random_integral_set(4, 4, seed=5)
    ph = build_pair_hamiltonian(s)
    groups = to_pauli_terms(ph)
    for p in range(4):
        for q in range(p + 1, 4):
            assert groups.xxyy[p, q] == pytest.approx(ph.kmat[p, q], abs=1e-14)


def test_group_sum_matches_dense_on_random_states():
    s = random_integral_set(4, 4, seed=6)
    ph = build_pair_hamiltonian(s)
    groups = to_pauli_terms(ph)
    basis = PairBasis(4, 2)
    mat = pair_dense_matrix(ph, basis)
    rng = np.random.default_rng(7)
    for _ in range(20):
        amp = rng.normal(size=basis.size)
        amp /= np.linalg.norm(amp)
        st = PairState(basis, amp)
        expected = float(amp @ mat @ amp)
        assert expectation_from_groups(st, groups) == pytest.approx(expected, abs=1e-12)
        assert expectation_exact(st, ph) == pytest.approx(expected, abs=1e-12)


def test_diagonal_matches_brute_force_bitstrings():
    s = random_integral_set(6, 6, seed=8)
    ph = build_pair_hamiltonian(s)
    basis = PairBasis(6, 3)
    mat = pair_dense_matrix(ph, basis)
    for idx in range(basis.size):
        bits = basis.unrank(idx)
        occ = [p for p in range(6) if (bits >> p) & 1]
        energy = ph.e_core
        for p in occ:
            energy += ph.eps[p] + 2 * ph.jmat[p, p]
        for p in occ:
            for q in occ:
                if p != q:
                    energy += 2 * ph.jmat[p, q] - ph.kmat[p, q]
        assert mat[idx, idx] == pytest.approx(energy, abs=1e-12)


def test_format_tables_mentions_dimensions():
    ph = build_pair_hamiltonian(random_integral_set(3, 4, seed=9))
    text = format_tables(ph)
    assert "3 qubits" in text and "J:" in text and "K:" in text
