"""Molecular integral handling: FCIDUMP I/O and integral-table transforms.

One- and two-electron integrals live in a real spatial-orbital basis with the
two-electron table (pq|rs) kept in chemists' notation under full 8-fold
permutational symmetry.  Orbital indices are 1-based in FCIDUMP files and
0-based everywhere else; the parser/serializer is the only place the
convention changes.
"""

from __future__ import annotations

import io
import re
from dataclasses import dataclass, field
from typing import IO, Iterable, Sequence

import numpy as np

__all__ = [
    "FcidumpError",
    "EriTable",
    "IntegralSet",
    "parse_fcidump",
    "load_fcidump",
    "write_fcidump",
    "freeze_core",
    "rotate_orbitals",
    "apply_sign_flips",
]


class FcidumpError(ValueError):
    """Malformed FCIDUMP content; message carries the offending line number."""


def _pair_index(i: int, j: int) -> int:
    """Triangular compound index for an unordered pair."""
    if i < j:
        i, j = j, i
    return i * (i + 1) // 2 + j


_CANONICAL_CACHE: dict[int, tuple[np.ndarray, np.ndarray, np.ndarray, np.ndarray]] = {}


def _canonical_quadruples(norb: int):
    """Index arrays (p, q, r, s) of the canonical quadruples, cached per size."""
    if norb not in _CANONICAL_CACHE:
        ps, qs, rs, ss = [], [], [], []
        for p in range(norb):
            for q in range(p + 1):
                for r in range(p + 1):
                    smax = q if r == p else r
                    for s in range(smax + 1):
                        ps.append(p)
                        qs.append(q)
                        rs.append(r)
                        ss.append(s)
        _CANONICAL_CACHE[norb] = tuple(np.asarray(x) for x in (ps, qs, rs, ss))
    return _CANONICAL_CACHE[norb]


class EriTable:
    """Two-electron integrals (pq|rs), chemists' notation, 8-fold symmetric.

    Stores one value per canonical quadruple (memory ~ N**4 / 8).  All eight
    permutationally equivalent index patterns read and write the same slot,
    so the symmetry invariant holds by construction.
    """

    __slots__ = ("norb", "data")

    def __init__(self, norb: int, data: np.ndarray | None = None):
        self.norb = int(norb)
        npair = self.norb * (self.norb + 1) // 2
        size = npair * (npair + 1) // 2
        if data is None:
            self.data = np.zeros(size)
        else:
            data = np.asarray(data, dtype=float)
            if data.shape != (size,):
                raise ValueError(f"expected flat ERI storage of size {size}, got {data.shape}")
            self.data = data

    def _index(self, p: int, q: int, r: int, s: int) -> int:
        return _pair_index(_pair_index(p, q), _pair_index(r, s))

    def get(self, p: int, q: int, r: int, s: int) -> float:
        return float(self.data[self._index(p, q, r, s)])

    def set(self, p: int, q: int, r: int, s: int, value: float) -> None:
        self.data[self._index(p, q, r, s)] = value

    def to_dense(self) -> np.ndarray:
        """Expand to a full (N, N, N, N) array."""
        n = self.norb
        idx = np.arange(n)
        lo = np.minimum.outer(idx, idx)
        hi = np.maximum.outer(idx, idx)
        pq = hi * (hi + 1) // 2 + lo  # (N, N) pair indices
        a = pq[:, :, None, None]
        b = pq[None, None, :, :]
        compound = np.maximum(a, b) * (np.maximum(a, b) + 1) // 2 + np.minimum(a, b)
        return self.data[compound]

    @classmethod
    def from_dense(cls, dense: np.ndarray) -> "EriTable":
        """Pack a full array, averaging over the 8 symmetry images.

        Averaging removes round-off asymmetry left by basis transforms; exact
        symmetric input passes through unchanged.
        """
        dense = np.asarray(dense, dtype=float)
        n = dense.shape[0]
        if dense.shape != (n, n, n, n):
            raise ValueError("dense ERI array must be 4-index and square")
        # Pairwise sums keep exactly symmetric input bit-identical.
        sym = (
            (dense + dense.transpose(1, 0, 2, 3))
            + (dense.transpose(0, 1, 3, 2) + dense.transpose(1, 0, 3, 2))
        ) + (
            (dense.transpose(2, 3, 0, 1) + dense.transpose(3, 2, 0, 1))
            + (dense.transpose(2, 3, 1, 0) + dense.transpose(3, 2, 1, 0))
        )
        sym /= 8.0
        table = cls(n)
        ps, qs, rs, ss = _canonical_quadruples(n)
        table.data[:] = sym[ps, qs, rs, ss]
        return table

    def unique_entries(self) -> Iterable[tuple[int, int, int, int, float]]:
        """Canonical quadruples (p >= q, pq >= rs) with their values."""
        n = self.norb
        for p in range(n):
            for q in range(p + 1):
                for r in range(p + 1):
                    smax = q if r == p else r
                    for s in range(smax + 1):
                        yield p, q, r, s, self.get(p, q, r, s)

    def copy(self) -> "EriTable":
        return EriTable(self.norb, self.data.copy())

    def __eq__(self, other: object) -> bool:
        if not isinstance(other, EriTable):
            return NotImplemented
        return self.norb == other.norb and np.array_equal(self.data, other.data)


@dataclass(frozen=True)
class IntegralSet:
    """Immutable molecular integrals for a closed-shell system.

    Attributes:
        norb: number of spatial orbitals N.
        nelec: number of electrons (even).
        ms2: 2*Ms spin tag, must be 0.
        e_core: scalar energy offset in Hartree (nuclear repulsion plus any
            frozen-core energy).
        h: symmetric (N, N) one-electron integrals, Hartree.
        eri: two-electron integrals, chemists' notation.
        orbsym: orbital symmetry labels from the FCIDUMP header, retained but
            unused.
        isym: state symmetry label, retained but unused.
    """

    norb: int
    nelec: int
    ms2: int
    e_core: float
    h: np.ndarray
    eri: EriTable
    orbsym: tuple[int, ...] | None = None
    isym: int | None = None

    def __post_init__(self):
        if self.ms2 != 0:
            raise ValueError(f"only closed-shell systems supported, got MS2={self.ms2}")
        if self.nelec % 2 != 0:
            raise ValueError(f"NELEC must be even, got {self.nelec}")
        if self.nelec // 2 > self.norb:
            raise ValueError(f"{self.nelec} electrons do not fit in {self.norb} orbitals")
        h = np.asarray(self.h, dtype=float)
        if h.shape != (self.norb, self.norb):
            raise ValueError(f"h must be ({self.norb}, {self.norb}), got {h.shape}")
        if not np.allclose(h, h.T, atol=1e-10):
            raise ValueError("one-electron integrals must be symmetric")
        h = 0.5 * (h + h.T)
        h.setflags(write=False)
        object.__setattr__(self, "h", h)
        if self.eri.norb != self.norb:
            raise ValueError("ERI table size does not match norb")
        self.eri.data.setflags(write=False)

    @property
    def npairs(self) -> int:
        return self.nelec // 2

    def __eq__(self, other: object) -> bool:
        if not isinstance(other, IntegralSet):
            return NotImplemented
        return (
            self.norb == other.norb
            and self.nelec == other.nelec
            and self.ms2 == other.ms2
            and self.e_core == other.e_core
            and np.array_equal(self.h, other.h)
            and self.eri == other.eri
        )


_HEADER_KEY = re.compile(r"([A-Z0-9]+)\s*=\s*([^=]*?)(?=(?:,?\s*[A-Z0-9]+\s*=)|$)", re.IGNORECASE)


def parse_fcidump(text: str | IO[str]) -> IntegralSet:
    """Parse FCIDUMP content from a string or text stream.

    The namelist header must define NORB, NELEC and MS2 and may span several
    lines; both ``&END`` and ``/`` terminate it.  Body records are free-format
    ``value i j k l`` with 1-based indices: ``k = l = 0`` lines fill the
    one-electron table, the all-zero line sets the core energy, and every
    other record fills all eight symmetry images of (ij|kl).

    Raises:
        FcidumpError: malformed header or records, indices out of range,
            odd NELEC or nonzero MS2; the message names the line.
    """
    if hasattr(text, "read"):
        text = text.read()
    lines = text.splitlines()

    header_parts: list[str] = []
    body_start = None
    in_header = False
    for ln, raw in enumerate(lines, start=1):
        line = raw.strip()
        if not in_header:
            if not line:
                continue
            if not line.upper().startswith("&FCI"):
                raise FcidumpError(f"line {ln}: expected '&FCI' namelist header")
            in_header = True
            line = line[4:]
        stop = None
        upper = line.upper()
        if "&END" in upper:
            stop = upper.index("&END")
        elif "/" in line:
            stop = line.index("/")
        if stop is not None:
            header_parts.append(line[:stop])
            body_start = ln  # 0-based index of the next line is ln
            break
        header_parts.append(line)
    else:
        raise FcidumpError(f"line {len(lines)}: header never terminated with '&END' or '/'")

    header = " ".join(header_parts)
    fields = {m.group(1).upper(): m.group(2).strip().rstrip(",") for m in _HEADER_KEY.finditer(header)}
    try:
        norb = int(fields["NORB"])
        nelec = int(fields["NELEC"])
        ms2 = int(fields.get("MS2", "0"))
    except (KeyError, ValueError) as exc:
        raise FcidumpError(f"line 1: invalid or missing NORB/NELEC/MS2 in header ({exc})") from exc
    if norb < 1:
        raise FcidumpError(f"line 1: NORB must be positive, got {norb}")
    if nelec % 2 != 0:
        raise FcidumpError(f"line 1: NELEC must be even for a closed shell, got {nelec}")
    if ms2 != 0:
        raise FcidumpError(f"line 1: MS2 must be 0 for a closed shell, got {ms2}")

    orbsym = None
    if "ORBSYM" in fields:
        entries = [tok for tok in fields["ORBSYM"].replace(",", " ").split() if tok]
        try:
            orbsym = tuple(int(tok) for tok in entries)
        except ValueError as exc:
            raise FcidumpError(f"line 1: bad ORBSYM entry ({exc})") from exc
    isym = None
    if "ISYM" in fields:
        try:
            isym = int(fields["ISYM"])
        except ValueError as exc:
            raise FcidumpError(f"line 1: bad ISYM entry ({exc})") from exc

    h = np.zeros((norb, norb))
    eri = EriTable(norb)
    e_core = 0.0

    for ln in range(body_start, len(lines)):
        line = lines[ln].strip()
        lineno = ln + 1
        if not line:
            continue
        tokens = line.split()
        if len(tokens) != 5:
            raise FcidumpError(f"line {lineno}: expected 'value i j k l', got {len(tokens)} fields")
        try:
            value = float(tokens[0].replace("D", "E").replace("d", "e"))
            i, j, k, l = (int(t) for t in tokens[1:])
        except ValueError as exc:
            raise FcidumpError(f"line {lineno}: unparsable record ({exc})") from exc
        for idx in (i, j, k, l):
            if idx < 0 or idx > norb:
                raise FcidumpError(f"line {lineno}: orbital index {idx} outside [0, {norb}]")
        if i == j == k == l == 0:
            e_core = value
        elif k == 0 and l == 0:
            if i == 0 or j == 0:
                raise FcidumpError(f"line {lineno}: one-electron record needs both i and j nonzero")
            h[i - 1, j - 1] = value
            h[j - 1, i - 1] = value
        elif min(i, j, k, l) == 0:
            raise FcidumpError(f"line {lineno}: two-electron record with a zero index")
        else:
            eri.set(i - 1, j - 1, k - 1, l - 1, value)

    return IntegralSet(norb=norb, nelec=nelec, ms2=ms2, e_core=e_core, h=h, eri=eri,
                       orbsym=orbsym, isym=isym)


def load_fcidump(path) -> IntegralSet:
    """Parse an FCIDUMP file from disk."""
    with open(path, "r", encoding="ascii") as fh:
        return parse_fcidump(fh)


def write_fcidump(s: IntegralSet, dest: str | IO[str] | None = None) -> str | None:
    """Serialize to the FCIDUMP format.

    Writes one record per nonzero canonical ERI, then nonzero h elements,
    then the core energy.  Values keep full double precision so that
    parse -> write -> parse reproduces the original tables exactly.

    Returns the text when ``dest`` is None, otherwise writes to the path or
    stream and returns None.
    """
    orbsym = s.orbsym if s.orbsym is not None else (1,) * s.norb
    isym = s.isym if s.isym is not None else 1
    out = io.StringIO()
    out.write(f"&FCI NORB={s.norb},NELEC={s.nelec},MS2={s.ms2},\n")
    out.write("  ORBSYM=" + ",".join(str(x) for x in orbsym) + ",\n")
    out.write(f"  ISYM={isym},\n")
    out.write("&END\n")
    for p, q, r, t, value in s.eri.unique_entries():
        if value != 0.0:
            out.write(f"{float(value)!r:>24} {p + 1:3d} {q + 1:3d} {r + 1:3d} {t + 1:3d}\n")
    for p in range(s.norb):
        for q in range(p + 1):
            if s.h[p, q] != 0.0:
                out.write(f"{float(s.h[p, q])!r:>24} {p + 1:3d} {q + 1:3d}   0   0\n")
    out.write(f"{float(s.e_core)!r:>24}   0   0   0   0\n")
    payload = out.getvalue()
    if dest is None:
        return payload
    if hasattr(dest, "write"):
        dest.write(payload)
        return None
    with open(dest, "w", encoding="ascii") as fh:
        fh.write(payload)
    return None


def freeze_core(s: IntegralSet, frozen: Sequence[int]) -> IntegralSet:
    """Fold doubly occupied core orbitals into an effective active space.

    ``frozen`` holds 0-based orbital indices that stay doubly occupied.  The
    returned set has those orbitals removed, the electron count reduced by
    two per frozen orbital, the frozen-core energy absorbed into ``e_core``
    and the one-electron table dressed with the frozen Coulomb/exchange
    field.
    """
    frozen = sorted(set(int(i) for i in frozen))
    if not frozen:
        return s
    for i in frozen:
        if i < 0 or i >= s.norb:
            raise ValueError(f"frozen orbital index {i} outside [0, {s.norb})")
    if 2 * len(frozen) > s.nelec:
        raise ValueError(f"cannot freeze {len(frozen)} orbitals with only {s.nelec} electrons")

    active = [p for p in range(s.norb) if p not in frozen]
    g = s.eri.to_dense()

    e_core = s.e_core
    for i in frozen:
        e_core += 2.0 * s.h[i, i]
    for i in frozen:
        for j in frozen:
            e_core += 2.0 * g[i, i, j, j] - g[i, j, j, i]

    nact = len(active)
    h_eff = np.empty((nact, nact))
    for a, p in enumerate(active):
        for b, q in enumerate(active):
            v = s.h[p, q]
            for i in frozen:
                v += 2.0 * g[p, q, i, i] - g[p, i, i, q]
            h_eff[a, b] = v

    g_act = g[np.ix_(active, active, active, active)]
    orbsym = tuple(s.orbsym[p] for p in active) if s.orbsym is not None else None
    return IntegralSet(
        norb=nact,
        nelec=s.nelec - 2 * len(frozen),
        ms2=s.ms2,
        e_core=e_core,
        h=h_eff,
        eri=EriTable.from_dense(g_act),
        orbsym=orbsym,
        isym=s.isym,
    )


def rotate_orbitals(s: IntegralSet, u: np.ndarray) -> IntegralSet:
    """Transform all integrals by a real orthogonal orbital rotation.

    New orbitals are columns of ``u`` expanded in the old ones:
    h' = u.T @ h @ u and (p'q'|r's') contracts one factor of u onto each
    index (four sequential quarter transforms, O(N^5)).
    """
    u = np.asarray(u, dtype=float)
    if u.shape != (s.norb, s.norb):
        raise ValueError(f"rotation must be ({s.norb}, {s.norb}), got {u.shape}")
    if not np.allclose(u.T @ u, np.eye(s.norb), atol=1e-10):
        raise ValueError("rotation matrix is not orthogonal to 1e-10")

    h_new = u.T @ s.h @ u
    g = s.eri.to_dense()
    g = np.einsum("pa,pqrs->aqrs", u, g, optimize=True)
    g = np.einsum("qb,aqrs->abrs", u, g, optimize=True)
    g = np.einsum("rc,abrs->abcs", u, g, optimize=True)
    g = np.einsum("sd,abcs->abcd", u, g, optimize=True)

    return IntegralSet(
        norb=s.norb,
        nelec=s.nelec,
        ms2=s.ms2,
        e_core=s.e_core,
        h=0.5 * (h_new + h_new.T),
        eri=EriTable.from_dense(g),
        orbsym=None,
        isym=s.isym,
    )


def apply_sign_flips(s: IntegralSet, signs: Sequence[int]) -> IntegralSet:
    """Flip orbital phases: h'_pq = s_p s_q h_pq, (pq|rs)' likewise.

    An involution for any fixed sign vector; the core energy is untouched.
    """
    signs = np.asarray(signs, dtype=float)
    if signs.shape != (s.norb,):
        raise ValueError(f"need one sign per orbital, got shape {signs.shape}")
    if not np.all(np.abs(signs) == 1.0):
        raise ValueError("signs must be +1 or -1")

    h_new = s.h * np.outer(signs, signs)
    g = s.eri.to_dense() * np.einsum("p,q,r,s->pqrs", signs, signs, signs, signs)
    return IntegralSet(
        norb=s.norb,
        nelec=s.nelec,
        ms2=s.ms2,
        e_core=s.e_core,
        h=h_new,
        eri=EriTable.from_dense(g),
        orbsym=s.orbsym,
        isym=s.isym,
    )
