import io

import numpy as np
import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

from pairvqe.integrals import (
    EriTable,
    FcidumpError,
    IntegralSet,
    apply_sign_flips,
    freeze_core,
    load_fcidump,
    parse_fcidump,
    rotate_orbitals,
    write_fcidump,
)
from pairvqe.oracles import fci_ground_state
from pairvqe.pairham import build_pair_hamiltonian, reference_energy

from conftest import ONE_ORBITAL_TOY, fixture_path, fixture_point, random_integral_set


def test_parse_one_orbital_toy():
    s = parse_fcidump(ONE_ORBITAL_TOY)
    assert s.norb == 1
    assert s.nelec == 2
    assert s.ms2 == 0
    assert s.e_core == 0.5
    assert s.h[0, 0] == -1.0
    assert s.eri.get(0, 0, 0, 0) == 0.625
    assert s.orbsym == (1,)
    assert s.isym == 1


def test_parse_fills_eightfold_symmetry():
    text = "&FCI NORB=2,NELEC=2,MS2=0 &END\n0.3 1 2 1 1\n"
    s = parse_fcidump(text)
    for idx in [(0, 1, 0, 0), (1, 0, 0, 0), (0, 0, 0, 1), (0, 0, 1, 0)]:
        assert s.eri.get(*idx) == 0.3


def test_parse_accepts_slash_terminator_and_stream():
    text = "&FCI NORB=1,NELEC=2,MS2=0\n/\n-1.0 1 1 0 0\n"
    s = parse_fcidump(io.StringIO(text))
    assert s.h[0, 0] == -1.0


@pytest.mark.parametrize("text,fragment", [
    ("NORB=2\n", "&FCI"),
    ("&FCI NORB=2,NELEC=3,MS2=0 &END\n", "NELEC"),
    ("&FCI NORB=2,NELEC=2,MS2=1 &END\n", "MS2"),
    ("&FCI NORB=2,NELEC=2,MS2=0 &END\n1.0 3 1 0 0\n", "line 2"),
    ("&FCI NORB=2,NELEC=2,MS2=0 &END\n1.0 1 1 0\n", "line 2"),
    ("&FCI NORB=2,NELEC=2,MS2=0 &END\n1.0 1 0 1 1\n", "line 2"),
])
def test_parse_rejects_malformed_input(text, fragment):
    with pytest.raises(FcidumpError, match=fragment):
        parse_fcidump(text)


def test_h2_fixture_reproduces_recorded_rhf(h2_fixture, h2_rhf_reference):
    assert h2_fixture.norb == 2
    assert h2_fixture.nelec == 2
    e_ref = reference_energy(build_pair_hamiltonian(h2_fixture))
    assert abs(e_ref - h2_rhf_reference) < 1e-8


def test_roundtrip_parse_write_parse(h2_fixture):
    s2 = parse_fcidump(write_fcidump(h2_fixture))
    assert s2 == h2_fixture
    s3 = parse_fcidump(write_fcidump(random_integral_set(4, 4, seed=11)))
    assert s3 == random_integral_set(4, 4, seed=11)


def test_write_to_stream_and_path(tmp_path, h2_fixture):
    buf = io.StringIO()
    write_fcidump(h2_fixture, buf)
    assert parse_fcidump(buf.getvalue()) == h2_fixture
    path = tmp_path / "dump.fcidump"
    write_fcidump(h2_fixture, str(path))
    assert load_fcidump(path) == h2_fixture


def test_freeze_core_empty_is_identity(h2_fixture):
    assert freeze_core(h2_fixture, []) == h2_fixture


def test_freeze_core_h2o_matches_resource_table():
    s = load_fcidump(fixture_path("h2o", "0.95"))
    assert (s.norb, s.nelec) == (7, 10)
    active = freeze_core(s, [0])
    assert (active.norb, active.nelec) == (6, 8)
    assert (active.npairs, active.norb - active.npairs) == (4, 2)


def _decoupled_core_toy() -> IntegralSet:
    """3-orbital system whose lowest orbital is exactly decoupled."""
    rng = np.random.default_rng(5)
    h = rng.normal(size=(3, 3))
    h = 0.5 * (h + h.T)
    h[0, :] = 0.0
    h[:, 0] = 0.0
    h[0, 0] = -20.0
    g = rng.normal(scale=0.2, size=(3, 3, 3, 3))
    g = (g + g.transpose(1, 0, 2, 3) + g.transpose(0, 1, 3, 2) + g.transpose(1, 0, 3, 2)
         + g.transpose(2, 3, 0, 1) + g.transpose(3, 2, 0, 1) + g.transpose(2, 3, 1, 0)
         + g.transpose(3, 2, 1, 0)) / 8.0
    # Zero every ERI with a lone core index on either electron side; those are
    # the only terms (besides h) that change the core occupancy.
    for idx in np.ndindex(3, 3, 3, 3):
        side1 = (idx[0] == 0) + (idx[1] == 0)
        side2 = (idx[2] == 0) + (idx[3] == 0)
        if side1 == 1 or side2 == 1:
            g[idx] = 0.0
    g[0, 0, 0, 0] = 0.8
    return IntegralSet(norb=3, nelec=4, ms2=0, e_core=0.1, h=h, eri=EriTable.from_dense(g))


def test_freeze_core_preserves_fci_for_decoupled_core():
    s = _decoupled_core_toy()
    folded = freeze_core(s, [0])
    assert (folded.norb, folded.nelec) == (2, 2)
    e_full = fci_ground_state(s, method="dense").energy
    e_folded = fci_ground_state(folded, method="dense").energy
    assert abs(e_full - e_folded) < 1e-9


def test_freeze_core_validates_input(h2_fixture):
    with pytest.raises(ValueError):
        freeze_core(h2_fixture, [5])
    with pytest.raises(ValueError):
        freeze_core(h2_fixture, [0, 1])  # would freeze all electrons and more


def test_rotate_identity_is_exact(h2_fixture):
    assert rotate_orbitals(h2_fixture, np.eye(2)) == h2_fixture


def test_rotate_rejects_non_orthogonal(h2_fixture):
    with pytest.raises(ValueError, match="orthogonal"):
        rotate_orbitals(h2_fixture, np.array([[1.0, 0.1], [0.0, 1.0]]))


def _random_orthogonal(n, seed):
    q, r = np.linalg.qr(np.random.default_rng(seed).normal(size=(n, n)))
    return q @ np.diag(np.sign(np.diag(r)))


def test_rotate_permutation_preserves_fci():
    s = random_integral_set(4, 4, seed=2)
    perm = np.eye(4)[[2, 0, 3, 1]]
    e0 = fci_ground_state(s, method="dense").energy
    e1 = fci_ground_state(rotate_orbitals(s, perm), method="dense").energy
    assert abs(e0 - e1) < 1e-9


def test_rotate_preserves_fci_but_not_reference(h2_fixture):
    u = _random_orthogonal(2, seed=3)
    rotated = rotate_orbitals(h2_fixture, u)
    e0 = fci_ground_state(h2_fixture, method="dense").energy
    e1 = fci_ground_state(rotated, method="dense").energy
    assert abs(e0 - e1) < 1e-9
    ref0 = reference_energy(build_pair_hamiltonian(h2_fixture))
    ref1 = reference_energy(build_pair_hamiltonian(rotated))
    assert abs(ref0 - ref1) > 1e-4  # the pair ansatz feels the orbital choice


def test_rotate_composes():
    s = random_integral_set(4, 4, seed=7)
    u1 = _random_orthogonal(4, seed=8)
    u2 = _random_orthogonal(4, seed=9)
    a = rotate_orbitals(rotate_orbitals(s, u1), u2)
    b = rotate_orbitals(s, u1 @ u2)
    assert np.allclose(a.h, b.h, atol=1e-9)
    assert np.allclose(a.eri.data, b.eri.data, atol=1e-9)


def test_sign_flips_trivial_cases(h2_fixture):
    assert apply_sign_flips(h2_fixture, [1, 1]) == h2_fixture
    flipped_all = apply_sign_flips(h2_fixture, [-1, -1])
    assert np.allclose(flipped_all.h, h2_fixture.h)
    assert np.allclose(flipped_all.eri.data, h2_fixture.eri.data)


def test_sign_flips_preserve_invariant_tables_and_fci():
    s = random_integral_set(4, 4, seed=13)
    flipped = apply_sign_flips(s, [1, -1, 1, -1])
    ph0 = build_pair_hamiltonian(s)
    ph1 = build_pair_hamiltonian(flipped)
    assert np.allclose(ph0.jmat, ph1.jmat, atol=1e-14)
    assert np.allclose(ph0.kmat, ph1.kmat, atol=1e-14)
    assert np.allclose(np.diag(s.h), np.diag(flipped.h), atol=1e-14)
    e0 = fci_ground_state(s, method="dense").energy
    e1 = fci_ground_state(flipped, method="dense").energy
    assert abs(e0 - e1) < 1e-9


@settings(max_examples=20, deadline=None)
@given(st.lists(st.sampled_from([-1, 1]), min_size=4, max_size=4))
def test_sign_flip_involution(signs):
    s = random_integral_set(4, 4, seed=21)
    twice = apply_sign_flips(apply_sign_flips(s, signs), signs)
    assert twice == s


def test_eri_table_dense_roundtrip():
    s = random_integral_set(5, 6, seed=31)
    dense = s.eri.to_dense()
    # 8-fold symmetry holds exactly in the expanded tensor.
    assert np.array_equal(dense, dense.transpose(1, 0, 2, 3))
    assert np.array_equal(dense, dense.transpose(0, 1, 3, 2))
    assert np.array_equal(dense, dense.transpose(2, 3, 0, 1))
    assert EriTable.from_dense(dense) == s.eri


def test_integral_set_validation():
    h_bad = np.array([[0.0, 1.0], [0.5, 0.0]])
    with pytest.raises(ValueError, match="symmetric"):
        IntegralSet(norb=2, nelec=2, ms2=0, e_core=0.0, h=h_bad, eri=EriTable(2))
    with pytest.raises(ValueError, match="even"):
        IntegralSet(norb=2, nelec=3, ms2=0, e_core=0.0, h=np.zeros((2, 2)), eri=EriTable(2))
    with pytest.raises(ValueError, match="MS2"):
        IntegralSet(norb=2, nelec=2, ms2=2, e_core=0.0, h=np.zeros((2, 2)), eri=EriTable(2))
