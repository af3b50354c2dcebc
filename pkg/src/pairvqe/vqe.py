"""Classical outer loop: minimize the ansatz energy over the gate angles.

Exact mode scores candidate angles with the subspace expectation value;
sampled mode simulates finite-shot measurement of the Pauli groups with a
fresh sub-seed per evaluation.  Optimizers: ``simplex`` (Nelder-Mead,
default for exact mode), ``bfgs`` (BFGS on central finite differences,
exact mode only) and ``spsa`` (default for sampled mode).
"""

from __future__ import annotations

import logging
from dataclasses import dataclass, field, replace

import numpy as np
from scipy import optimize as sciopt

from .integrals import IntegralSet
from .pairham import PairHamiltonian, build_pair_hamiltonian, to_pauli_terms
from .simulator import (
    AnsatzCircuit,
    PairBasis,
    build_ansatz_circuit,
    evolve,
    expectation_exact,
    expectation_sampled,
)

__all__ = ["VqeOptions", "VqeResult", "minimize_energy", "run_vqe"]

log = logging.getLogger(__name__)

_OPTIMIZERS = ("simplex", "bfgs", "spsa")
_FD_STEP = 1e-5  # central-difference step for bfgs gradients


@dataclass
class VqeOptions:
    """Knobs of the classical minimization.

    ``optimizer`` and ``energy_tolerance`` default per mode when left None:
    simplex / 1e-8 in exact mode, spsa / 1e-4 in sampled mode.
    """

    mode: str = "exact"
    shots: int = 100_000
    optimizer: str | None = None
    max_iterations: int | None = None
    energy_tolerance: float | None = None
    restarts: int = 1
    seed: int = 0

    def __post_init__(self):
        if self.mode not in ("exact", "sampled"):
            raise ValueError(f"mode must be 'exact' or 'sampled', got {self.mode!r}")
        if self.optimizer is None:
            self.optimizer = "simplex" if self.mode == "exact" else "spsa"
        if self.optimizer not in _OPTIMIZERS:
            raise ValueError(f"optimizer must be one of {_OPTIMIZERS}, got {self.optimizer!r}")
        if self.optimizer == "bfgs" and self.mode == "sampled":
            raise ValueError("finite-difference bfgs is only offered in exact mode")
        if self.energy_tolerance is None:
            self.energy_tolerance = 1e-8 if self.mode == "exact" else 1e-4
        if self.energy_tolerance <= 0:
            raise ValueError("energy tolerance must be positive")
        if self.mode == "sampled" and self.shots < 1:
            raise ValueError("sampled mode needs at least one shot")
        if self.restarts < 1:
            raise ValueError("restarts must be >= 1")


@dataclass
class VqeResult:
    theta: np.ndarray
    energy: float
    stderr: float | None
    iterations: int
    evaluations: int
    mode: str
    shots_used: int
    converged: bool
    trace: list[tuple[int, float]] = field(default_factory=list)


class _Objective:
    """Energy evaluation with best-so-far bookkeeping."""

    def __init__(self, ph: PairHamiltonian, circuit: AnsatzCircuit, opts: VqeOptions):
        self.ph = ph
        self.circuit = circuit
        self.opts = opts
        self.basis = PairBasis(ph.nqubits, ph.npairs)
        self.groups = to_pauli_terms(ph) if opts.mode == "sampled" else None
        self.evaluations = 0
        self.shots_used = 0
        self.best_energy = np.inf
        self.best_theta: np.ndarray | None = None
        self.trace: list[tuple[int, float]] = []

    def __call__(self, theta: np.ndarray) -> float:
        state = evolve(self.circuit, theta, self.basis)
        if self.opts.mode == "exact":
            value = expectation_exact(state, self.ph)
        else:
            est = expectation_sampled(state, self.groups, self.opts.shots,
                                      seed=[self.opts.seed, self.evaluations])
            self.shots_used += self.opts.shots
            value = est.energy
        self.evaluations += 1
        if value < self.best_energy:
            self.best_energy = value
            self.best_theta = np.array(theta, dtype=float)
            self.trace.append((self.evaluations, value))
        return value

    def final_estimate(self, theta: np.ndarray) -> tuple[float, float | None]:
        """Fresh re-evaluation at the chosen point; never a stale cache."""
        state = evolve(self.circuit, theta, self.basis)
        if self.opts.mode == "exact":
            return expectation_exact(state, self.ph), None
        est = expectation_sampled(state, self.groups, self.opts.shots,
                                  seed=[self.opts.seed, self.evaluations + 1])
        self.shots_used += self.opts.shots
        return est.energy, est.stderr


def _central_difference(fun, theta: np.ndarray, step: float) -> np.ndarray:
    grad = np.empty_like(theta)
    for k in range(len(theta)):
        probe = theta.copy()
        probe[k] = theta[k] + step
        up = fun(probe)
        probe[k] = theta[k] - step
        down = fun(probe)
        grad[k] = (up - down) / (2.0 * step)
    return grad


def _spsa(fun, x0: np.ndarray, iterations: int, rng: np.random.Generator) -> tuple[np.ndarray, int]:
    """Simultaneous-perturbation descent with standard gain schedules."""
    alpha, gamma = 0.602, 0.101
    big_a = 0.1 * iterations
    c0 = 0.1
    # Calibrate the step scale from a few gradient probes at the start.
    probes = []
    for _ in range(5):
        delta = rng.choice((-1.0, 1.0), size=x0.shape)
        gk = (fun(x0 + c0 * delta) - fun(x0 - c0 * delta)) / (2.0 * c0)
        probes.append(np.abs(gk))
    gbar = max(float(np.mean(probes)), 1e-6)
    a0 = 0.1 * (big_a + 1.0) ** alpha / gbar

    x = x0.copy()
    for k in range(iterations):
        ak = a0 / (k + 1.0 + big_a) ** alpha
        ck = c0 / (k + 1.0) ** gamma
        delta = rng.choice((-1.0, 1.0), size=x.shape)
        gk = (fun(x + ck * delta) - fun(x - ck * delta)) / (2.0 * ck)
        x = x - ak * gk * delta
    return x, iterations


def _default_max_iterations(optimizer: str, nparams: int) -> int:
    if optimizer == "simplex":
        return 2000 + 400 * nparams
    if optimizer == "bfgs":
        return 500
    return 2000  # spsa


def minimize_energy(ph: PairHamiltonian, circuit: AnsatzCircuit, opts: VqeOptions,
                    initial_theta: np.ndarray | None = None) -> VqeResult:
    """Best (theta, energy) over all restarts.

    The first restart starts from ``initial_theta`` (all zeros, i.e. the
    reference state, when not given); later restarts perturb it uniformly in
    [-0.1, 0.1].  ``max_iterations = 0`` disables optimization and just
    scores the starting point.  The reported energy is always a fresh
    re-evaluation at the returned angles.
    """
    if circuit.nqubits != ph.nqubits or circuit.nocc != ph.npairs:
        raise ValueError("circuit dimensions inconsistent with the Hamiltonian")
    nparams = circuit.n_parameters
    x_init = np.zeros(nparams) if initial_theta is None else np.asarray(initial_theta, dtype=float)
    if x_init.shape != (nparams,):
        raise ValueError(f"initial theta must have {nparams} entries")

    objective = _Objective(ph, circuit, opts)
    max_iter = opts.max_iterations
    if max_iter is None:
        max_iter = _default_max_iterations(opts.optimizer, nparams)

    if max_iter == 0:
        energy, stderr = objective.final_estimate(x_init)
        return VqeResult(theta=x_init.copy(), energy=energy, stderr=stderr,
                         iterations=0, evaluations=objective.evaluations,
                         mode=opts.mode, shots_used=objective.shots_used,
                         converged=True, trace=[(0, energy)])

    rng = np.random.default_rng(opts.seed)
    iterations = 0
    converged = False
    for restart in range(opts.restarts):
        x0 = x_init if restart == 0 else x_init + rng.uniform(-0.1, 0.1, size=nparams)
        if opts.optimizer == "simplex":
            res = sciopt.minimize(objective, x0, method="Nelder-Mead",
                                  options={"maxiter": max_iter,
                                           "fatol": opts.energy_tolerance,
                                           "xatol": 1e-6})
            iterations += int(res.nit)
            converged = converged or bool(res.success)
        elif opts.optimizer == "bfgs":
            res = sciopt.minimize(objective, x0, method="BFGS",
                                  jac=lambda x: _central_difference(objective, x, _FD_STEP),
                                  options={"maxiter": max_iter, "gtol": 1e-7})
            iterations += int(res.nit)
            # BFGS often stops on gradient precision right at the minimum;
            # accept if the line search stalled below our energy tolerance.
            converged = converged or bool(res.success) or res.status == 2
        else:  # spsa
            _, nit = _spsa(objective, x0, max_iter, rng)
            iterations += nit
            converged = True

    if not converged:
        log.warning("vqe optimizer did not converge within %d iterations", max_iter)

    best_theta = objective.best_theta if objective.best_theta is not None else x_init
    energy, stderr = objective.final_estimate(best_theta)
    return VqeResult(theta=best_theta, energy=energy, stderr=stderr,
                     iterations=iterations, evaluations=objective.evaluations,
                     mode=opts.mode, shots_used=objective.shots_used,
                     converged=converged, trace=objective.trace)


def run_vqe(s: IntegralSet, opts: VqeOptions, depth: int = 1) -> VqeResult:
    """Pipeline: integrals -> pair Hamiltonian -> ansatz -> minimization."""
    ph = build_pair_hamiltonian(s)
    nvir = s.norb - s.npairs
    circuit = build_ansatz_circuit(s.npairs, nvir, depth)
    return minimize_energy(ph, circuit, opts)
