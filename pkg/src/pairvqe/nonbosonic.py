"""Classical correction for pair-broken excitations, with orbital sign fixing.

The pair ansatz never populates configurations with singly occupied
orbitals.  Their energy contribution is estimated after the fact from
antisymmetrized repulsion integrals weighted by geometric means of
occupation-transfer moments,

    E_nB = - sum'_{pqrs} [(pr|qs) - (ps|qr)]
             * <(1-n_r) n_p>^(1/2) * <(1-n_s) n_q>^(1/2),

the primed sum dropping p = q, r = s items (those belong to the paired
sector).  E_nB is the only quantity here that feels orbital sign
conventions, so signs are fixed first: anchor the highest occupied and
lowest virtual orbitals at +1, order each block by one-electron-integral
proximity, then walk the chains making the linking repulsion integrals
positive.
"""

from __future__ import annotations

import logging
from dataclasses import dataclass
from typing import IO

import numpy as np

from .integrals import IntegralSet, apply_sign_flips
from .simulator import OccupationMoments, PairState, occupation_moments

__all__ = [
    "SignAssignment",
    "build_proximity_chains",
    "fix_orbital_signs",
    "nonbosonic_correction",
    "corrected_energy",
    "correction_for_state",
]

log = logging.getLogger(__name__)

_DEGENERATE_ERI = 1e-8    # below this, the sign walk is ill defined; keep +1
_MOMENT_CLAMP = -1e-10    # moments below this signal a broken state


@dataclass(frozen=True)
class SignAssignment:
    """Per-orbital signs (0-based) and the proximity chains that fixed them.

    The two anchors, the highest occupied orbital (index n-1) and the lowest
    virtual one (index n), always carry +1.
    """

    signs: tuple[int, ...]
    occupied_chain: tuple[int, ...]
    virtual_chain: tuple[int, ...]


def _greedy_chain(h: np.ndarray, start: int, block: list[int], prefer_high: bool) -> list[int]:
    """Greedy walk maximizing |h| to the previous link; ties fall back to
    index order (descending through the occupied block, ascending through
    the virtual one)."""
    chain = [start]
    remaining = [p for p in block if p != start]
    while remaining:
        remaining.sort(reverse=prefer_high)
        scores = [abs(h[chain[-1], p]) for p in remaining]
        nxt = remaining[int(np.argmax(scores))]
        chain.append(nxt)
        remaining.remove(nxt)
    return chain


def build_proximity_chains(s: IntegralSet, npairs: int) -> tuple[tuple[int, ...], tuple[int, ...]]:
    """Orbital visit orders for the sign walk, from one-electron proximity.

    The occupied chain starts at orbital n-1 and greedily appends the
    unvisited occupied orbital with the largest |h| coupling to the current
    link; the virtual chain does the same from orbital n.  Both cover their
    whole block.
    """
    n = int(npairs)
    if not 1 <= n < s.norb:
        raise ValueError(f"need 1 <= npairs < norb, got npairs={n}, norb={s.norb}")
    occ = _greedy_chain(s.h, n - 1, list(range(n)), prefer_high=True)
    vir = _greedy_chain(s.h, n, list(range(n, s.norb)), prefer_high=False)
    return tuple(occ), tuple(vir)


def fix_orbital_signs(s: IntegralSet, npairs: int) -> SignAssignment:
    """Choose orbital signs that make the chain-linking ERIs positive.

    Walking the occupied chain away from its anchor with the virtual anchor
    a = n held fixed, each sign satisfies s_prev * s_cur * (prev a|cur a) > 0;
    the virtual walk uses (o prev|o cur) with the occupied anchor o = n-1.
    Linking integrals below 1e-8 leave the sign at +1 with a logged warning.
    """
    occ_chain, vir_chain = build_proximity_chains(s, npairs)
    n = int(npairs)
    anchor_occ, anchor_vir = n - 1, n
    signs = np.ones(s.norb, dtype=int)

    for prev, cur in zip(occ_chain, occ_chain[1:]):
        link = s.eri.get(prev, anchor_vir, cur, anchor_vir)
        if abs(link) < _DEGENERATE_ERI:
            log.warning("sign walk degenerate at occupied orbital %d (|(%d %d|%d %d)| = %.2e); keeping +1",
                        cur, prev, anchor_vir, cur, anchor_vir, abs(link))
            continue
        signs[cur] = 1 if signs[prev] * link > 0 else -1

    for prev, cur in zip(vir_chain, vir_chain[1:]):
        link = s.eri.get(anchor_occ, prev, anchor_occ, cur)
        if abs(link) < _DEGENERATE_ERI:
            log.warning("sign walk degenerate at virtual orbital %d (|(%d %d|%d %d)| = %.2e); keeping +1",
                        cur, anchor_occ, prev, anchor_occ, cur, abs(link))
            continue
        signs[cur] = 1 if signs[prev] * link > 0 else -1

    return SignAssignment(signs=tuple(int(x) for x in signs),
                          occupied_chain=occ_chain, virtual_chain=vir_chain)


def _sqrt_moments(transfer: np.ndarray) -> np.ndarray:
    worst = float(transfer.min())
    if worst < _MOMENT_CLAMP:
        raise ValueError(f"occupation moment {worst:.3e} below {_MOMENT_CLAMP}; state is broken")
    return np.sqrt(np.clip(transfer, 0.0, None))


def nonbosonic_correction(s_fixed: IntegralSet, moments: OccupationMoments,
                          term_dump: IO[str] | None = None) -> float:
    """Evaluate E_nB from sign-fixed integrals and state moments.

    ``term_dump``, when given, receives one CSV line per surviving term:
    p, q, r, s (0-based), antisymmetrized ERI, amplitude factor,
    contribution.
    """
    n = s_fixed.norb
    if moments.transfer.shape != (n, n):
        raise ValueError("moment table size does not match the integrals")
    amp = _sqrt_moments(moments.transfer)
    g = s_fixed.eri.to_dense()
    if term_dump is not None:
        term_dump.write("p,q,r,s,eri_antisym,amplitude,contribution\n")
    total = 0.0
    for p in range(n):
        for q in range(n):
            for r in range(n):
                for t in range(n):
                    if p == q and r == t:
                        continue  # paired excitation, excluded by the primed sum
                    weight = amp[p, r] * amp[q, t]
                    if weight == 0.0:
                        continue
                    eri = g[p, r, q, t] - g[p, t, q, r]
                    contribution = -eri * weight
                    total += contribution
                    if term_dump is not None and contribution != 0.0:
                        term_dump.write(f"{p},{q},{r},{t},{eri!r},{weight!r},{contribution!r}\n")
    return total


def corrected_energy(pair_energy: float, e_nb: float) -> float:
    """Total energy with the non-bosonic term added."""
    if not (np.isfinite(pair_energy) and np.isfinite(e_nb)):
        raise ValueError("energies must be finite")
    return float(pair_energy) + float(e_nb)


def correction_for_state(s: IntegralSet, state: PairState) -> tuple[float, SignAssignment]:
    """Sign-fix ``s``, then evaluate E_nB with the state's exact moments."""
    assignment = fix_orbital_signs(s, s.npairs)
    fixed = apply_sign_flips(s, assignment.signs)
    e_nb = nonbosonic_correction(fixed, occupation_moments(state))
    return e_nb, assignment
