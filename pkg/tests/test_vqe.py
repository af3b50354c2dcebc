import numpy as np
import pytest
from scipy.optimize import minimize_scalar

from pairvqe.integrals import freeze_core, load_fcidump
from pairvqe.oracles import doci_ground_state, fci_ground_state
from pairvqe.pairham import build_pair_hamiltonian, reference_energy
from pairvqe.simulator import PairBasis, build_ansatz_circuit, evolve, expectation_exact
from pairvqe.vqe import VqeOptions, minimize_energy, run_vqe

from conftest import fixture_path


@pytest.fixture(scope="module")
def h2o_active():
    return freeze_core(load_fcidump(fixture_path("h2o", "0.95")), [0])


@pytest.fixture(scope="module")
def lih_active():
    return freeze_core(load_fcidump(fixture_path("lih", "1.60")), [0])


def _grid_refine_minimum(ph):
    """Independent 1-parameter oracle: grid scan plus bounded refinement."""
    basis = PairBasis(ph.nqubits, ph.npairs)
    circuit = build_ansatz_circuit(1, 1, 1)

    def energy(t):
        return expectation_exact(evolve(circuit, [t], basis), ph)

    grid = np.linspace(-np.pi, np.pi, 101)
    best = grid[int(np.argmin([energy(t) for t in grid]))]
    step = grid[1] - grid[0]
    res = minimize_scalar(energy, bounds=(best - step, best + step), method="bounded",
                          options={"xatol": 1e-12})
    return float(res.fun)


def test_h2_minimum_matches_grid_oracle(h2_fixture):
    ph = build_pair_hamiltonian(h2_fixture)
    circuit = build_ansatz_circuit(1, 1, 1)
    result = minimize_energy(ph, circuit, VqeOptions(mode="exact", seed=0))
    assert result.converged
    assert result.energy == pytest.approx(_grid_refine_minimum(ph), abs=1e-8)


def test_disabled_optimizer_reports_reference(h2o_active):
    ph = build_pair_hamiltonian(h2o_active)
    circuit = build_ansatz_circuit(4, 2, 1)
    result = minimize_energy(ph, circuit, VqeOptions(mode="exact", max_iterations=0))
    assert result.energy == pytest.approx(reference_energy(ph), abs=1e-12)
    assert result.iterations == 0
    assert np.array_equal(result.theta, np.zeros(8))


def test_variational_ordering_h2o(h2o_active):
    opts = VqeOptions(mode="exact", optimizer="bfgs", seed=1)
    res = run_vqe(h2o_active, opts)
    e_doci = doci_ground_state(build_pair_hamiltonian(h2o_active)).energy
    e_fci = fci_ground_state(h2o_active, method="dense").energy
    assert res.energy >= e_doci - 1e-9
    assert e_doci >= e_fci - 1e-9
    assert res.energy - e_fci < 0.2  # sanity scale: well below 0.2 Ha of FCI


def test_run_vqe_h2_reaches_fci(h2_fixture):
    res = run_vqe(h2_fixture, VqeOptions(mode="exact", seed=2))
    e_fci = fci_ground_state(h2_fixture, method="dense").energy
    assert abs(res.energy - e_fci) < 1e-3


def test_lih_gap_grows_at_long_separation():
    opts = VqeOptions(mode="exact", optimizer="bfgs", seed=3)
    near = freeze_core(load_fcidump(fixture_path("lih", "1.60")), [0])
    far = freeze_core(load_fcidump(fixture_path("lih", "2.40")), [0])
    gap_near = run_vqe(near, opts).energy - fci_ground_state(near, method="dense").energy
    gap_far = run_vqe(far, opts).energy - fci_ground_state(far, method="dense").energy
    assert gap_near > -1e-9
    assert gap_far > 5 * max(gap_near, 1e-4)  # large and positive when stretched


def test_deeper_ansatz_never_worse(lih_active):
    opts = VqeOptions(mode="exact", optimizer="bfgs", seed=4, restarts=2)
    e1 = run_vqe(lih_active, opts, depth=1).energy
    e2 = run_vqe(lih_active, opts, depth=2).energy
    assert e2 <= e1 + 1e-9


def test_exact_mode_seed_invariance(lih_active):
    ph = build_pair_hamiltonian(lih_active)
    circuit = build_ansatz_circuit(1, 4, 1)
    energies = [
        minimize_energy(ph, circuit, VqeOptions(mode="exact", seed=seed, restarts=3)).energy
        for seed in (0, 1)
    ]
    assert energies[0] == pytest.approx(energies[1], abs=1e-8)


def test_reported_energy_is_fresh_evaluation(h2o_active):
    ph = build_pair_hamiltonian(h2o_active)
    circuit = build_ansatz_circuit(4, 2, 1)
    res = minimize_energy(ph, circuit, VqeOptions(mode="exact", optimizer="bfgs", seed=5))
    basis = PairBasis(6, 4)
    fresh = expectation_exact(evolve(circuit, res.theta, basis), ph)
    assert res.energy == pytest.approx(fresh, abs=1e-12)


def test_sampled_mode_consistent_with_exact(h2_fixture):
    ph = build_pair_hamiltonian(h2_fixture)
    circuit = build_ansatz_circuit(1, 1, 1)
    exact = minimize_energy(ph, circuit, VqeOptions(mode="exact", seed=6))
    sampled = minimize_energy(ph, circuit,
                              VqeOptions(mode="sampled", shots=100_000, seed=6,
                                         max_iterations=300))
    basis = PairBasis(2, 1)
    e_at_sampled_theta = expectation_exact(evolve(circuit, sampled.theta, basis), ph)
    assert sampled.stderr is not None
    assert abs(sampled.energy - e_at_sampled_theta) < 5 * sampled.stderr
    assert sampled.energy < reference_energy(ph)  # made real progress
    assert exact.energy <= e_at_sampled_theta + 1e-9


def test_trace_is_monotone_best_so_far(h2o_active):
    ph = build_pair_hamiltonian(h2o_active)
    circuit = build_ansatz_circuit(4, 2, 1)
    res = minimize_energy(ph, circuit, VqeOptions(mode="exact", optimizer="bfgs", seed=7))
    energies = [e for _, e in res.trace]
    assert all(b < a for a, b in zip(energies, energies[1:]))


def test_option_validation():
    with pytest.raises(ValueError):
        VqeOptions(mode="approximate")
    with pytest.raises(ValueError):
        VqeOptions(mode="sampled", optimizer="bfgs")
    with pytest.raises(ValueError):
        VqeOptions(mode="sampled", shots=0)
    with pytest.raises(ValueError):
        VqeOptions(restarts=0)
    opts = VqeOptions(mode="sampled")
    assert opts.optimizer == "spsa"
    assert opts.energy_tolerance == 1e-4
