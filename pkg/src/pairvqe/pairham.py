"""Reduction of the electronic Hamiltonian to its seniority-zero pair form.

With every spatial orbital either doubly occupied or empty, the Hamiltonian
closes on hard-core boson operators: pair hops d+_p d_q with exchange
coefficients K_pq = (pq|qp), plus a diagonal built from eps_p = 2 h_pp - J_pp
and the Coulomb matrix J_pq = (pp|qq),

    H = e_core + sum_p eps_p n_p + sum_{p!=q} K_pq d+_p d_q
        - sum_{p!=q} K_pq n_p n_q + sum_{p,q} 2 J_pq n_p n_q

where n_p counts pairs (n_p^2 = n_p, so the p = q Coulomb term contributes
2 J_pp n_p).  The same operator content is exposed as qubit measurement
groups: Z-diagonal terms and one (X_p X_q + Y_p Y_q)/2 group per orbital
pair.  No parity strings appear because hard-core bosons on distinct sites
commute.
"""

from __future__ import annotations

import io
from dataclasses import dataclass

import numpy as np

from .integrals import IntegralSet

__all__ = [
    "PairHamiltonian",
    "PauliTermGroups",
    "build_pair_hamiltonian",
    "reference_energy",
    "to_pauli_terms",
    "format_tables",
]


@dataclass(frozen=True)
class PairHamiltonian:
    """Coefficient tables of the pair Hamiltonian over N qubits."""

    nqubits: int
    npairs: int
    e_core: float
    eps: np.ndarray   # (N,)   eps_p = 2 h_pp - J_pp
    jmat: np.ndarray  # (N, N) J_pq = (pp|qq)
    kmat: np.ndarray  # (N, N) K_pq = (pq|qp)

    def __post_init__(self):
        n = self.nqubits
        for name in ("eps", "jmat", "kmat"):
            arr = np.asarray(getattr(self, name), dtype=float)
            object.__setattr__(self, name, arr)
            if not np.all(np.isfinite(arr)):
                raise ValueError(f"{name} contains non-finite entries")
        if self.eps.shape != (n,) or self.jmat.shape != (n, n) or self.kmat.shape != (n, n):
            raise ValueError("coefficient table shapes inconsistent with nqubits")
        if not np.allclose(self.jmat, self.jmat.T, atol=1e-12):
            raise ValueError("J must be symmetric")
        if not np.allclose(self.kmat, self.kmat.T, atol=1e-12):
            raise ValueError("K must be symmetric")
        if not np.allclose(np.diag(self.jmat), np.diag(self.kmat), atol=1e-12):
            raise ValueError("J_pp and K_pp must agree")
        for name in ("eps", "jmat", "kmat"):
            getattr(self, name).setflags(write=False)


@dataclass(frozen=True)
class PauliTermGroups:
    """Commuting measurement groups equivalent to a :class:`PairHamiltonian`.

    ``identity``, ``z`` and ``zz`` make up the single Z-diagonal group
    (``zz`` is upper triangular, coefficient of Z_p Z_q for p < q); ``xxyy``
    holds, per unordered pair, the coefficient of (X_p X_q + Y_p Y_q)/2.
    """

    nqubits: int
    identity: float
    z: np.ndarray      # (N,)
    zz: np.ndarray     # (N, N), upper triangle
    xxyy: np.ndarray   # (N, N), upper triangle


def build_pair_hamiltonian(s: IntegralSet) -> PairHamiltonian:
    """Contract integrals down to the (eps, J, K) tables of the pair form."""
    g = s.eri.to_dense()
    jmat = np.einsum("ppqq->pq", g)
    kmat = np.einsum("pqqp->pq", g)
    eps = 2.0 * np.diag(s.h) - np.diag(jmat)
    return PairHamiltonian(
        nqubits=s.norb,
        npairs=s.npairs,
        e_core=s.e_core,
        eps=eps,
        jmat=0.5 * (jmat + jmat.T),
        kmat=0.5 * (kmat + kmat.T),
    )


def reference_energy(ph: PairHamiltonian) -> float:
    """Energy of the reference bitstring with the first n qubits set.

    Equals e_core + sum_i eps_i - sum_{i!=j} K_ij + sum_{ij} 2 J_ij over the
    occupied block, i.e. the closed-shell RHF energy when the orbitals are
    canonical RHF orbitals.
    """
    n = ph.npairs
    if n > ph.nqubits:
        raise ValueError("more pairs than qubits")
    jocc = ph.jmat[:n, :n]
    kocc = ph.kmat[:n, :n]
    return float(
        ph.e_core
        + ph.eps[:n].sum()
        - (kocc.sum() - np.trace(kocc))
        + 2.0 * jocc.sum()
    )


def to_pauli_terms(ph: PairHamiltonian) -> PauliTermGroups:
    """Map the pair Hamiltonian onto qubit operators.

    Uses n_p = (1 - Z_p)/2 and d+_p d_q + d+_q d_p = (X_p X_q + Y_p Y_q)/2;
    the group sum reproduces the pair-Hamiltonian expectation on every pair
    state.
    """
    n = ph.nqubits
    # Two-body diagonal weight per ordered pair p != q, then folded to p < q.
    w = 2.0 * ph.jmat - ph.kmat
    np.fill_diagonal(w, 0.0)
    # One-body diagonal weight, including the p = q Coulomb term 2 J_pp n_p.
    c1 = ph.eps + 2.0 * np.diag(ph.jmat)

    identity = ph.e_core + 0.5 * c1.sum() + 0.5 * np.triu(w, 1).sum()
    z = -0.5 * c1 - 0.5 * w.sum(axis=1)
    zz = 0.5 * np.triu(w, 1)
    xxyy = np.triu(ph.kmat, 1)
    return PauliTermGroups(nqubits=n, identity=float(identity), z=z, zz=zz, xxyy=xxyy)


def format_tables(ph: PairHamiltonian) -> str:
    """Plain-text dump of (eps, J, K) for eyeball debugging; format unstable."""
    out = io.StringIO()
    out.write(f"pair hamiltonian: {ph.nqubits} qubits, {ph.npairs} pairs, "
              f"e_core = {ph.e_core:.10f}\n")
    out.write("p    eps_p\n")
    for p in range(ph.nqubits):
        out.write(f"{p:<4d} {ph.eps[p]: .10f}\n")
    for name, mat in (("J", ph.jmat), ("K", ph.kmat)):
        out.write(f"{name}:\n")
        for row in mat:
            out.write("  " + " ".join(f"{v: .10f}" for v in row) + "\n")
    return out.getvalue()
