"""Pair-correlated (seniority-zero) VQE engine with DOCI/FCI oracles."""

from .integrals import (
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
from .pairham import PairHamiltonian, PauliTermGroups, build_pair_hamiltonian, reference_energy, to_pauli_terms
from .simulator import (
    AnsatzCircuit,
    PairBasis,
    PairState,
    build_ansatz_circuit,
    evolve,
    evolve_full,
    exchange_gate_matrix,
    expectation_exact,
    expectation_sampled,
    occupation_moments,
)
from .vqe import VqeOptions, VqeResult, minimize_energy, run_vqe
from .orbital_opt import OoOptions, OoResult, OrbitalRotation, kappa_to_unitary, oo_vqe
from .nonbosonic import (
    SignAssignment,
    build_proximity_chains,
    corrected_energy,
    correction_for_state,
    fix_orbital_signs,
    nonbosonic_correction,
)
from .oracles import (
    DociResult,
    FciResult,
    PopulationReport,
    doci_ground_state,
    fci_ground_state,
    rhf_energy,
    seniority_zero_populations,
)
from .harness import (
    ScanManifest,
    ScanPoint,
    ScanReport,
    load_manifest,
    report_populations,
    resource_counts,
    run_scan,
)

__version__ = "0.1.0"
