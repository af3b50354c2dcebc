"""Scan driver: run method sets over FCIDUMP manifests, emit plot-ready CSV.

A manifest is a TOML file with one ``[[points]]`` table per geometry
(label, fcidump path, 1-based frozen-orbital list) plus the method set and
solver options.  Each geometry runs every requested method; failures are
recorded per row and the scan continues.  The CSV column order is fixed:

    label,hf,vqe,vqe_nb,oo_vqe,oo_vqe_nb,doci,fci,e_nb,stderr,status

Energies are printed with 10 decimal digits; absent methods leave empty
fields.  With identical manifest and seeds the CSV is byte-identical across
runs.
"""

from __future__ import annotations

import concurrent.futures
import logging
import time
from dataclasses import dataclass, field, replace
from pathlib import Path
from typing import NamedTuple

try:
    import tomllib
except ModuleNotFoundError:  # python < 3.11
    import tomli as tomllib

from .integrals import IntegralSet, freeze_core, load_fcidump
from .nonbosonic import correction_for_state, corrected_energy
from .oracles import PopulationReport, doci_ground_state, fci_ground_state, seniority_zero_populations
from .orbital_opt import OoOptions, oo_vqe
from .pairham import build_pair_hamiltonian, reference_energy
from .simulator import PairBasis, build_ansatz_circuit, evolve
from .vqe import VqeOptions, minimize_energy

__all__ = [
    "METHODS",
    "ScanPoint",
    "ScanManifest",
    "GeometryResult",
    "ScanReport",
    "ResourceCounts",
    "load_manifest",
    "resource_counts",
    "run_scan",
    "report_populations",
]

log = logging.getLogger(__name__)

METHODS = ("hf", "vqe", "vqe-nB", "oo-vqe", "oo-vqe-nB", "doci", "fci")
_CSV_HEADER = "label,hf,vqe,vqe_nb,oo_vqe,oo_vqe_nb,doci,fci,e_nb,stderr,status"
_CSV_METHOD_ORDER = ("hf", "vqe", "vqe-nB", "oo-vqe", "oo-vqe-nB", "doci", "fci")


@dataclass(frozen=True)
class ScanPoint:
    label: str
    fcidump: str
    frozen: tuple[int, ...] = ()  # 0-based active-space fold


@dataclass
class ScanManifest:
    points: tuple[ScanPoint, ...]
    methods: tuple[str, ...]
    vqe: VqeOptions = field(default_factory=VqeOptions)
    oo: OoOptions = field(default_factory=OoOptions)
    depth: int = 1
    output: str | None = None
    workers: int = 1

    def __post_init__(self):
        if not self.methods:
            raise ValueError("method set is empty")
        unknown = [m for m in self.methods if m not in METHODS]
        if unknown:
            raise ValueError(f"unknown methods {unknown}; choose from {METHODS}")
        if "vqe-nB" in self.methods and "vqe" not in self.methods:
            raise ValueError("vqe-nB requires vqe in the method set")
        if "oo-vqe-nB" in self.methods and "oo-vqe" not in self.methods:
            raise ValueError("oo-vqe-nB requires oo-vqe in the method set")
        labels = [p.label for p in self.points]
        if len(set(labels)) != len(labels):
            raise ValueError("geometry labels must be unique")
        if not self.points:
            raise ValueError("manifest has no scan points")
        for p in self.points:
            if not Path(p.fcidump).is_file():
                raise ValueError(f"fcidump not readable: {p.fcidump}")
        if self.depth < 1:
            raise ValueError("depth must be >= 1")
        if self.workers < 1:
            raise ValueError("workers must be >= 1")


def load_manifest(path) -> ScanManifest:
    """Read a TOML manifest; fcidump paths resolve against its directory.

    Frozen orbital lists use the 1-based FCIDUMP convention in the file and
    are converted to 0-based indices here.
    """
    path = Path(path)
    with open(path, "rb") as fh:
        raw = tomllib.load(fh)
    scan = raw.get("scan", {})
    points = []
    for entry in raw.get("points", []):
        fcidump = Path(entry["fcidump"])
        if not fcidump.is_absolute():
            fcidump = path.parent / fcidump
        frozen = tuple(int(i) - 1 for i in entry.get("frozen", []))
        points.append(ScanPoint(label=str(entry["label"]), fcidump=str(fcidump), frozen=frozen))
    vqe_opts = VqeOptions(**raw.get("vqe", {}))
    oo_opts = OoOptions(**raw.get("oo", {}))
    return ScanManifest(
        points=tuple(points),
        methods=tuple(scan.get("methods", [])),
        vqe=vqe_opts,
        oo=oo_opts,
        depth=int(scan.get("depth", 1)),
        output=scan.get("output"),
        workers=int(scan.get("workers", 1)),
    )


class ResourceCounts(NamedTuple):
    qubits: int
    parameters: int
    two_qubit_gates: int


def resource_counts(occ: int, vir: int, depth: int) -> ResourceCounts:
    """Circuit budget: O+V qubits, D*O*V parameters, 3*D*O*V two-qubit gates."""
    if occ < 1 or vir < 1 or depth < 1:
        raise ValueError("counts must be positive")
    return ResourceCounts(qubits=occ + vir, parameters=depth * occ * vir,
                          two_qubit_gates=3 * depth * occ * vir)


@dataclass
class GeometryResult:
    label: str
    energies: dict[str, float] = field(default_factory=dict)
    e_nb: float | None = None
    stderr: float | None = None
    wall_time: float = 0.0
    converged: dict[str, bool] = field(default_factory=dict)
    error: str | None = None


@dataclass
class ScanReport:
    manifest: ScanManifest
    rows: list[GeometryResult]

    @property
    def ok(self) -> bool:
        return all(r.error is None for r in self.rows)

    def to_csv(self) -> str:
        lines = [_CSV_HEADER]
        for row in self.rows:
            cells = [row.label]
            for method in _CSV_METHOD_ORDER:
                value = row.energies.get(method)
                cells.append("" if value is None else f"{value:.10f}")
            cells.append("" if row.e_nb is None else f"{row.e_nb:.10f}")
            cells.append("" if row.stderr is None else f"{row.stderr:.10f}")
            cells.append("ok" if row.error is None else f"error: {row.error}")
            lines.append(",".join(cells))
        return "\n".join(lines) + "\n"


def _load_active_space(point: ScanPoint) -> IntegralSet:
    return freeze_core(load_fcidump(point.fcidump), point.frozen)


def run_geometry(point: ScanPoint, manifest: ScanManifest) -> GeometryResult:
    """All requested methods for one scan point; errors are captured."""
    result = GeometryResult(label=point.label)
    start = time.perf_counter()
    try:
        s = _load_active_space(point)
        methods = manifest.methods
        ph = build_pair_hamiltonian(s)
        npairs, nvir = s.npairs, s.norb - s.npairs
        basis = PairBasis(s.norb, npairs)
        circuit = build_ansatz_circuit(npairs, nvir, manifest.depth)

        if "hf" in methods:
            result.energies["hf"] = reference_energy(ph)

        vqe_res = None
        if "vqe" in methods:
            vqe_res = minimize_energy(ph, circuit, manifest.vqe)
            result.energies["vqe"] = vqe_res.energy
            result.converged["vqe"] = vqe_res.converged
            result.stderr = vqe_res.stderr
            if "vqe-nB" in methods:
                state = evolve(circuit, vqe_res.theta, basis)
                e_nb, _ = correction_for_state(s, state)
                result.energies["vqe-nB"] = corrected_energy(vqe_res.energy, e_nb)
                result.e_nb = e_nb

        if "oo-vqe" in methods:
            oo_res = oo_vqe(s, manifest.vqe, manifest.oo, depth=manifest.depth)
            result.energies["oo-vqe"] = oo_res.energy
            result.converged["oo-vqe"] = oo_res.converged
            if oo_res.vqe.stderr is not None:
                result.stderr = oo_res.vqe.stderr
            if "oo-vqe-nB" in methods:
                state = evolve(circuit, oo_res.vqe.theta, basis)
                e_nb, _ = correction_for_state(oo_res.rotated_integrals, state)
                result.energies["oo-vqe-nB"] = corrected_energy(oo_res.energy, e_nb)
                result.e_nb = e_nb  # the oo value wins the shared column

        if "doci" in methods:
            result.energies["doci"] = doci_ground_state(ph).energy
        if "fci" in methods:
            result.energies["fci"] = fci_ground_state(s).energy
    except Exception as exc:  # recorded per row; the scan continues
        log.exception("geometry %s failed", point.label)
        result.error = str(exc)
    result.wall_time = time.perf_counter() - start
    return result


def run_scan(manifest: ScanManifest) -> ScanReport:
    """Execute every geometry, assemble rows in manifest order, write CSV."""
    if manifest.workers > 1 and len(manifest.points) > 1:
        with concurrent.futures.ProcessPoolExecutor(max_workers=manifest.workers) as pool:
            rows = list(pool.map(run_geometry, manifest.points,
                                 [manifest] * len(manifest.points)))
    else:
        rows = [run_geometry(p, manifest) for p in manifest.points]
    report = ScanReport(manifest=manifest, rows=rows)
    if manifest.output:
        Path(manifest.output).write_text(report.to_csv(), encoding="ascii")
        log.info("wrote %s", manifest.output)
    return report


def report_populations(manifest: ScanManifest, label: str, k: int) -> PopulationReport:
    """Top-k seniority-zero populations, converged pair state vs FCI.

    Uses the plain vqe state (FCI in the same orbitals) when vqe is in the
    method set, otherwise the oo-vqe state with FCI rerun in the rotated
    orbitals so both sides share a basis.
    """
    if "fci" not in manifest.methods:
        raise ValueError("populations need fci in the method set")
    if "vqe" not in manifest.methods and "oo-vqe" not in manifest.methods:
        raise ValueError("populations need a vqe-family method in the set")
    point = next((p for p in manifest.points if p.label == label), None)
    if point is None:
        raise ValueError(f"no scan point labelled {label!r}")

    s = _load_active_space(point)
    npairs, nvir = s.npairs, s.norb - s.npairs
    basis = PairBasis(s.norb, npairs)
    circuit = build_ansatz_circuit(npairs, nvir, manifest.depth)
    if "vqe" in manifest.methods:
        res = minimize_energy(build_pair_hamiltonian(s), circuit, manifest.vqe)
        state = evolve(circuit, res.theta, basis)
        fci = fci_ground_state(s)
    else:
        oo_res = oo_vqe(s, manifest.vqe, manifest.oo, depth=manifest.depth)
        state = evolve(circuit, oo_res.vqe.theta, basis)
        fci = fci_ground_state(oo_res.rotated_integrals)
    return seniority_zero_populations(fci, state, k)
