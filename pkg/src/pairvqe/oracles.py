"""Brute-force reference solvers: DOCI, determinant-space FCI, RHF identity.

Everything here is deliberately independent of the fast simulation paths so
it can serve as an oracle for them.  The pair-basis matrix is assembled by
walking operator rules state by state; FCI offers two routes, an elementwise
Slater-Condon dense build for small spaces and a string-driven sigma with a
Davidson eigensolver for larger ones, which are cross-checked against each
other in the test suite.
"""

from __future__ import annotations

from dataclasses import dataclass, field
from functools import cached_property
from typing import Callable, NamedTuple

import numpy as np
import scipy.sparse as sp

from .integrals import IntegralSet
from .pairham import PairHamiltonian
from .simulator import PairBasis, PairState

__all__ = [
    "DociResult",
    "FciResult",
    "PopulationReport",
    "doci_ground_state",
    "fci_ground_state",
    "rhf_energy",
    "seniority_zero_populations",
    "pair_dense_matrix",
    "spin_squared",
    "davidson",
]

_DOCI_MAX_DIM = 100_000
_FCI_MAX_DIM = 1_000_000
_FCI_DENSE_MAX = 300_000  # determinant count squared for the dense route


def rhf_energy(s: IntegralSet, npairs: int | None = None) -> float:
    """Closed-shell reference energy straight from the integral tables.

    e_core + 2 sum_i h_ii + sum_ij (2 (ii|jj) - (ij|ji)) over the first
    ``npairs`` orbitals; an independent code path for the identity that the
    pair-Hamiltonian reference energy must reproduce.
    """
    n = s.npairs if npairs is None else int(npairs)
    if n > s.norb:
        raise ValueError("more pairs than orbitals")
    e = s.e_core
    for i in range(n):
        e += 2.0 * s.h[i, i]
    for i in range(n):
        for j in range(n):
            e += 2.0 * s.eri.get(i, i, j, j) - s.eri.get(i, j, j, i)
    return float(e)


def pair_dense_matrix(ph: PairHamiltonian, basis: PairBasis | None = None) -> np.ndarray:
    """Dense pair-basis matrix built by brute-force operator application."""
    if basis is None:
        basis = PairBasis(ph.nqubits, ph.npairs)
    dim = basis.size
    mat = np.zeros((dim, dim))
    for col in range(dim):
        bits = basis.unrank(col)
        occ = [p for p in range(ph.nqubits) if (bits >> p) & 1]
        diag = ph.e_core
        for p in occ:
            diag += ph.eps[p] + 2.0 * ph.jmat[p, p]
        for p in occ:
            for q in occ:
                if p != q:
                    diag += 2.0 * ph.jmat[p, q] - ph.kmat[p, q]
        mat[col, col] = diag
        for q in occ:
            for p in range(ph.nqubits):
                if (bits >> p) & 1:
                    continue
                moved = (bits ^ (1 << q)) | (1 << p)
                mat[basis.rank(moved), col] += ph.kmat[p, q]
    return mat


class DociResult(NamedTuple):
    energy: float
    state: PairState


def doci_ground_state(ph: PairHamiltonian) -> DociResult:
    """Exact ground state of the pair Hamiltonian (seniority-zero CI).

    Dense diagonalization for small bases, sparse matrix plus Davidson above
    that; spaces beyond 1e5 states are rejected.  The eigenvector sign gauge
    makes the first nonzero amplitude positive.
    """
    basis = PairBasis(ph.nqubits, ph.npairs)
    if basis.size > _DOCI_MAX_DIM:
        raise ValueError(f"pair basis of {basis.size} states exceeds the {_DOCI_MAX_DIM} limit")
    if basis.size <= 1500:
        mat = pair_dense_matrix(ph, basis)
        evals, evecs = np.linalg.eigh(mat)
        energy, vec = float(evals[0]), evecs[:, 0]
    else:
        mat = sp.csr_matrix(_pair_sparse_matrix(ph, basis))
        diag = mat.diagonal()
        energy, vec = davidson(lambda x: mat @ x, diag)
    vec = _fix_gauge(vec)
    return DociResult(energy=energy, state=PairState(basis=basis, amp=vec))


def _pair_sparse_matrix(ph: PairHamiltonian, basis: PairBasis) -> sp.coo_matrix:
    rows, cols, vals = [], [], []
    for col in range(basis.size):
        bits = basis.unrank(col)
        occ = [p for p in range(ph.nqubits) if (bits >> p) & 1]
        diag = ph.e_core
        for p in occ:
            diag += ph.eps[p] + 2.0 * ph.jmat[p, p]
        for p in occ:
            for q in occ:
                if p != q:
                    diag += 2.0 * ph.jmat[p, q] - ph.kmat[p, q]
        rows.append(col)
        cols.append(col)
        vals.append(diag)
        for q in occ:
            for p in range(ph.nqubits):
                if not (bits >> p) & 1:
                    moved = (bits ^ (1 << q)) | (1 << p)
                    rows.append(basis.rank(moved))
                    cols.append(col)
                    vals.append(ph.kmat[p, q])
    return sp.coo_matrix((vals, (rows, cols)), shape=(basis.size, basis.size))


def _fix_gauge(vec: np.ndarray, tol: float = 1e-12) -> np.ndarray:
    for v in vec:
        if abs(v) > tol:
            return vec if v > 0 else -vec
    return vec


# ---------------------------------------------------------------------------
# Determinant-space FCI
# ---------------------------------------------------------------------------

@dataclass
class FciResult:
    """Ground state in the Ms = 0 determinant basis.

    ``coefficients[ia, ib]`` belongs to the determinant whose alpha (beta)
    occupation bitstring is ``alpha_strings[ia]`` (``beta_strings[ib]``).
    """

    energy: float
    coefficients: np.ndarray
    alpha_strings: np.ndarray
    beta_strings: np.ndarray
    method: str

    @property
    def dimension(self) -> int:
        return self.coefficients.size

    @cached_property
    def amplitudes(self) -> dict[tuple[int, int], float]:
        """Map (alpha bitstring, beta bitstring) -> coefficient."""
        out = {}
        for ia, astr in enumerate(self.alpha_strings):
            for ib, bstr in enumerate(self.beta_strings):
                out[(int(astr), int(bstr))] = float(self.coefficients[ia, ib])
        return out

    def amplitude(self, alpha_bits: int, beta_bits: int) -> float:
        ia = int(np.searchsorted(self.alpha_strings, alpha_bits))
        ib = int(np.searchsorted(self.beta_strings, beta_bits))
        if (ia >= len(self.alpha_strings) or self.alpha_strings[ia] != alpha_bits
                or ib >= len(self.beta_strings) or self.beta_strings[ib] != beta_bits):
            raise ValueError("determinant not in the Ms = 0 basis")
        return float(self.coefficients[ia, ib])


def _occupied(bits: int, norb: int) -> list[int]:
    return [p for p in range(norb) if (bits >> p) & 1]


def _phase_between(bits: int, p: int, q: int) -> float:
    """Parity of occupied orbitals strictly between p and q."""
    lo, hi = (p, q) if p < q else (q, p)
    mask = ((1 << hi) - 1) & ~((1 << (lo + 1)) - 1)
    return -1.0 if bin(bits & mask).count("1") % 2 else 1.0


def _diagonal_element(aocc, bocc, h, g) -> float:
    e = 0.0
    for p in aocc:
        e += h[p, p]
    for p in bocc:
        e += h[p, p]
    for occ in (aocc, bocc):
        for p in occ:
            for q in occ:
                e += 0.5 * (g[p, p, q, q] - g[p, q, q, p])
    for p in aocc:
        for q in bocc:
            e += g[p, p, q, q]
    return e


def _single_element(i, a, occ_same, occ_other, h, g) -> float:
    v = h[i, a]
    for j in occ_same:
        v += g[i, a, j, j] - g[i, j, j, a]
    for j in occ_other:
        v += g[i, a, j, j]
    return v


def _double_same_spin(bits, jbits, norb, g) -> float:
    """Element between same-spin determinants differing by two orbitals."""
    holes = _occupied(bits & ~jbits, norb)
    parts = _occupied(jbits & ~bits, norb)
    i, j = holes
    a, b = parts
    # Sequential phases: i -> a on bits, then j -> b on the intermediate.
    phase = _phase_between(bits, i, a)
    inter = (bits ^ (1 << i)) | (1 << a)
    phase *= _phase_between(inter, j, b)
    return phase * (g[i, a, j, b] - g[i, b, j, a])


def fci_dense_matrix(s: IntegralSet) -> tuple[np.ndarray, np.ndarray]:
    """Slater-Condon Hamiltonian over all Ms = 0 determinants.

    Returns (matrix, strings); row/column index is ia * len(strings) + ib.
    Elementwise and unvectorized on purpose: this is the slow, obviously
    correct route.
    """
    n = s.npairs
    strings = PairBasis(s.norb, n).states
    g = s.eri.to_dense()
    h = s.h
    ns = len(strings)
    dim = ns * ns
    mat = np.zeros((dim, dim))
    occs = [_occupied(int(b), s.norb) for b in strings]

    for ia, astr in enumerate(strings):
        for ib, bstr in enumerate(strings):
            row = ia * ns + ib
            for ja, jastr in enumerate(strings):
                diff_a = bin(astr ^ jastr).count("1")
                if diff_a > 4:
                    continue
                for jb, jbstr in enumerate(strings):
                    diff_b = bin(bstr ^ jbstr).count("1")
                    if diff_a + diff_b > 4:
                        continue
                    col = ja * ns + jb
                    if diff_a == 0 and diff_b == 0:
                        mat[row, col] = s.e_core + _diagonal_element(occs[ia], occs[ib], h, g)
                    elif diff_a == 2 and diff_b == 0:
                        i = _occupied(astr & ~jastr, s.norb)[0]
                        a = _occupied(jastr & ~astr, s.norb)[0]
                        v = _single_element(i, a, occs[ia], occs[ib], h, g)
                        mat[row, col] = _phase_between(astr, i, a) * v
                    elif diff_a == 0 and diff_b == 2:
                        i = _occupied(bstr & ~jbstr, s.norb)[0]
                        a = _occupied(jbstr & ~bstr, s.norb)[0]
                        v = _single_element(i, a, occs[ib], occs[ia], h, g)
                        mat[row, col] = _phase_between(bstr, i, a) * v
                    elif diff_a == 4 and diff_b == 0:
                        mat[row, col] = _double_same_spin(astr, jastr, s.norb, g)
                    elif diff_a == 0 and diff_b == 4:
                        mat[row, col] = _double_same_spin(bstr, jbstr, s.norb, g)
                    else:  # one alpha single and one beta single
                        i = _occupied(astr & ~jastr, s.norb)[0]
                        a = _occupied(jastr & ~astr, s.norb)[0]
                        j = _occupied(bstr & ~jbstr, s.norb)[0]
                        b = _occupied(jbstr & ~bstr, s.norb)[0]
                        phase = _phase_between(astr, i, a) * _phase_between(bstr, j, b)
                        mat[row, col] = phase * g[i, a, j, b]
    return mat, strings


class _SigmaEngine:
    """String-driven H application: sigma = H C over (alpha, beta) strings.

    Uses the spin-summed form H = e_core + sum k_pq E_pq
    + 1/2 sum (pq|rs) E_pq E_rs with k_pq = h_pq - 1/2 sum_r (pr|rq), where
    E_pq acts on alpha strings from the left and beta strings from the
    right.  Operators are grouped over unordered index pairs.
    """

    def __init__(self, s: IntegralSet):
        self.norb = s.norb
        self.e_core = s.e_core
        self.basis = PairBasis(s.norb, s.npairs)
        self.strings = self.basis.states
        self.ns = self.basis.size
        g = s.eri.to_dense()
        kmod = s.h - 0.5 * np.einsum("prrq->pq", g)

        pairs = [(p, q) for p in range(s.norb) for q in range(p, s.norb)]
        self.pairs = pairs
        npair = len(pairs)
        self.kvec = np.array([kmod[p, q] for p, q in pairs])
        self.w = np.empty((npair, npair))
        for m, (p, q) in enumerate(pairs):
            for mm, (r, t) in enumerate(pairs):
                self.w[m, mm] = g[p, q, r, t]
        self.ops = [self._pair_operator(p, q) for p, q in pairs]
        self._diag = self._build_diagonal(s, g)

    def _pair_operator(self, p: int, q: int) -> sp.csr_matrix:
        """E_pq + E_qp (just E_pp on the diagonal pair) over strings."""
        states = self.strings
        rows, cols, vals = [], [], []
        if p == q:
            sel = np.nonzero((states >> p) & 1)[0]
            rows.extend(sel)
            cols.extend(sel)
            vals.extend(np.ones(len(sel)))
        else:
            for src, dst in ((q, p), (p, q)):
                mask_src, mask_dst = 1 << src, 1 << dst
                sel = np.nonzero(((states & mask_src) != 0) & ((states & mask_dst) == 0))[0]
                moved = (states[sel] ^ mask_src) | mask_dst
                lo, hi = (src, dst) if src < dst else (dst, src)
                between = ((1 << hi) - 1) & ~((1 << (lo + 1)) - 1)
                phase = 1.0 - 2.0 * (np.bitwise_count(states[sel] & between) % 2)
                rows.extend(self.basis._rank[moved])
                cols.extend(sel)
                vals.extend(phase)
        return sp.csr_matrix((vals, (rows, cols)), shape=(self.ns, self.ns))

    def _build_diagonal(self, s: IntegralSet, g: np.ndarray) -> np.ndarray:
        occ = self.basis.occupations
        hdiag = np.diag(s.h)
        jmat = np.einsum("ppqq->pq", g)
        kex = np.einsum("pqqp->pq", g)
        one = occ @ hdiag
        same = 0.5 * np.einsum("bp,pq,bq->b", occ, jmat - kex, occ, optimize=True)
        cross = occ @ jmat @ occ.T
        return (s.e_core + one[:, None] + one[None, :]
                + same[:, None] + same[None, :] + cross)

    @property
    def diagonal(self) -> np.ndarray:
        return self._diag

    def sigma(self, c: np.ndarray) -> np.ndarray:
        c = c.reshape(self.ns, self.ns)
        npair = len(self.pairs)
        d = np.empty((npair, self.ns, self.ns))
        for m, op in enumerate(self.ops):
            d[m] = op @ c
            d[m] += (op @ c.T).T
        out = self.e_core * c + np.tensordot(self.kvec, d, axes=(0, 0))
        gmat = np.tensordot(self.w, d.reshape(npair, -1), axes=(1, 0)).reshape(npair, self.ns, self.ns)
        del d
        for m, op in enumerate(self.ops):
            out += 0.5 * (op @ gmat[m])
            out += 0.5 * (op @ gmat[m].T).T
        return out.reshape(-1)


def davidson(matvec: Callable[[np.ndarray], np.ndarray], diag: np.ndarray, *,
             v0: np.ndarray | None = None, tol: float = 1e-8,
             max_iter: int = 300, max_subspace: int = 30) -> tuple[float, np.ndarray]:
    """Lowest eigenpair by Davidson iteration with a diagonal preconditioner.

    Converges on the residual norm; raises RuntimeError if the subspace
    stalls past ``max_iter`` expansions.
    """
    dim = len(diag)
    if v0 is None:
        v0 = np.zeros(dim)
        v0[int(np.argmin(diag))] = 1.0
    v = v0 / np.linalg.norm(v0)
    basis = [v]
    sigmas = [matvec(v)]
    theta, x = None, None
    for _ in range(max_iter):
        k = len(basis)
        vmat = np.stack(basis, axis=1)
        smat = np.stack(sigmas, axis=1)
        tmat = vmat.T @ smat
        tmat = 0.5 * (tmat + tmat.T)
        evals, evecs = np.linalg.eigh(tmat)
        theta = float(evals[0])
        y = evecs[:, 0]
        x = vmat @ y
        residual = smat @ y - theta * x
        rnorm = float(np.linalg.norm(residual))
        if rnorm < tol:
            return theta, x
        denom = diag - theta
        denom = np.where(np.abs(denom) < 1e-8, np.copysign(1e-8, denom), denom)
        t = -residual / denom
        if k + 1 > max_subspace:
            basis, sigmas = [x], [smat @ y]
            vmat = np.stack(basis, axis=1)
        # Orthogonalize twice against the current subspace.
        for _ in range(2):
            t = t - vmat @ (vmat.T @ t)
        tnorm = np.linalg.norm(t)
        if tnorm < 1e-12:
            t = np.random.default_rng(k).standard_normal(dim)
            t = t - vmat @ (vmat.T @ t)
            tnorm = np.linalg.norm(t)
        basis.append(t / tnorm)
        sigmas.append(matvec(basis[-1]))
    raise RuntimeError(f"Davidson failed to reach residual {tol} in {max_iter} iterations "
                       f"(last residual {rnorm:.3e})")


def fci_ground_state(s: IntegralSet, method: str = "auto", tol: float = 1e-8) -> FciResult:
    """Ground state of the full Hamiltonian in the Ms = 0 determinant basis.

    ``method`` is ``auto`` (dense for small spaces, iterative otherwise),
    ``dense`` or ``iterative``.  Spaces beyond 1e6 determinants are
    rejected.
    """
    ns = PairBasis(s.norb, s.npairs).size
    dim = ns * ns
    if dim > _FCI_MAX_DIM:
        raise ValueError(f"{dim} determinants exceed the {_FCI_MAX_DIM} limit")
    if method == "auto":
        method = "dense" if dim * dim <= _FCI_DENSE_MAX else "iterative"
    if method == "dense":
        mat, strings = fci_dense_matrix(s)
        evals, evecs = np.linalg.eigh(mat)
        energy, vec = float(evals[0]), evecs[:, 0]
    elif method == "iterative":
        engine = _SigmaEngine(s)
        strings = engine.strings
        diag = engine.diagonal.reshape(-1)
        energy, vec = davidson(engine.sigma, diag, tol=tol)
    else:
        raise ValueError(f"unknown FCI method {method!r}")
    vec = _fix_gauge(vec)
    coeff = vec.reshape(ns, ns)
    return FciResult(energy=energy, coefficients=coeff,
                     alpha_strings=strings, beta_strings=strings.copy(), method=method)


def spin_squared(f: FciResult) -> float:
    """<S^2> of an Ms = 0 CI vector, via the norm of S+ applied to it."""
    norb = int(f.alpha_strings.max()).bit_length()
    na = bin(int(f.alpha_strings[0])).count("1")
    nb = bin(int(f.beta_strings[0])).count("1")
    if nb == 0:
        return 0.0
    abasis = PairBasis(norb, na)
    bbasis = PairBasis(norb, nb)
    up_a = PairBasis(norb, na + 1)
    up_b = PairBasis(norb, nb - 1)
    phi = np.zeros((up_a.size, up_b.size))
    c = f.coefficients
    for p in range(norb):
        mask = 1 << p
        sel_a = np.nonzero((abasis.states & mask) == 0)[0]
        sel_b = np.nonzero((bbasis.states & mask) != 0)[0]
        if not (len(sel_a) and len(sel_b)):
            continue
        below = mask - 1
        sign_a = 1.0 - 2.0 * (np.bitwise_count(abasis.states[sel_a] & below) % 2)
        sign_b = 1.0 - 2.0 * (np.bitwise_count(bbasis.states[sel_b] & below) % 2)
        tgt_a = up_a._rank[abasis.states[sel_a] | mask]
        tgt_b = up_b._rank[bbasis.states[sel_b] ^ mask]
        phi[np.ix_(tgt_a, tgt_b)] += np.outer(sign_a, sign_b) * c[np.ix_(sel_a, sel_b)]
    return float((phi ** 2).sum())


@dataclass(frozen=True)
class PopulationReport:
    """Aligned seniority-zero configuration populations, FCI vs pair state.

    Entries are (configuration label, fci population, pair population),
    ranked by descending FCI population; the union of each side's top-k
    survives.
    """

    entries: tuple[tuple[str, float, float], ...]
    k: int

    def to_csv(self) -> str:
        lines = ["configuration,fci_population,vqe_population"]
        for label, fci_pop, vqe_pop in self.entries:
            lines.append(f"{label},{fci_pop:.10f},{vqe_pop:.10f}")
        return "\n".join(lines) + "\n"


def seniority_zero_populations(f: FciResult, st: PairState, k: int) -> PopulationReport:
    """Compare populations of doubly-occupied configurations.

    For every weight-n bitstring b the FCI population is the squared
    coefficient of the determinant (b, b) and the pair population is the
    squared amplitude of b; the top-k of each side are kept, aligned by
    configuration.
    """
    basis = st.basis
    if len(f.alpha_strings) != basis.size or not np.array_equal(f.alpha_strings, basis.states):
        raise ValueError("FCI result and pair state live in different orbital spaces")
    fci_pops = np.diag(f.coefficients) ** 2
    pair_pops = st.probabilities()
    k = min(int(k), basis.size)
    top_fci = set(np.argsort(fci_pops)[::-1][:k])
    top_pair = set(np.argsort(pair_pops)[::-1][:k])
    keep = sorted(top_fci | top_pair, key=lambda i: (-fci_pops[i], basis.label(basis.unrank(i))))
    entries = tuple(
        (basis.label(basis.unrank(i)), float(fci_pops[i]), float(pair_pops[i]))
        for i in keep
    )
    return PopulationReport(entries=entries, k=k)
