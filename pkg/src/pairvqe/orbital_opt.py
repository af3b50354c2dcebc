"""Joint minimization over gate angles and an orthogonal orbital rotation.

Alternates two blocks until the macro energy settles: (a) the usual angle
optimization at fixed orbitals, (b) a quasi-Newton search over the
N(N-1)/2 antisymmetric rotation parameters with the angles (and hence the
state's occupation/hop moments) held fixed, re-transforming the integrals
for every trial rotation.  After each accepted rotation the integrals are
replaced by their rotated form and kappa re-centered at zero so the matrix
exponentials stay small.
"""

from __future__ import annotations

import logging
from dataclasses import dataclass, replace

import numpy as np
from scipy import linalg as sla
from scipy import optimize as sciopt

from .integrals import IntegralSet, rotate_orbitals
from .pairham import build_pair_hamiltonian
from .simulator import (
    PairBasis,
    build_ansatz_circuit,
    evolve,
    expectation_from_moments,
    occupation_moments,
    pair_hop_expectations,
)
from .vqe import VqeOptions, VqeResult, minimize_energy

__all__ = ["OrbitalRotation", "OoOptions", "OoResult", "kappa_to_unitary", "oo_vqe", "oo_doci"]

log = logging.getLogger(__name__)

_FD_STEP = 1e-5


def kappa_to_unitary(kappa: np.ndarray) -> np.ndarray:
    """Orthogonal exponential of an antisymmetric parameter matrix."""
    kappa = np.asarray(kappa, dtype=float)
    if kappa.ndim != 2 or kappa.shape[0] != kappa.shape[1]:
        raise ValueError("kappa must be square")
    if not np.allclose(kappa, -kappa.T, atol=1e-12):
        raise ValueError("kappa must be antisymmetric to 1e-12")
    u = sla.expm(kappa)
    if not np.allclose(u.T @ u, np.eye(len(u)), atol=1e-12):
        raise ValueError("exponential lost orthogonality")  # pragma: no cover
    return u


@dataclass(frozen=True)
class OrbitalRotation:
    """Antisymmetric parameters with their cached orthogonal exponential."""

    kappa: np.ndarray
    u: np.ndarray

    def __post_init__(self):
        kappa = np.asarray(self.kappa, dtype=float)
        u = np.asarray(self.u, dtype=float)
        n = kappa.shape[0]
        if not np.allclose(kappa, -kappa.T, atol=1e-12):
            raise ValueError("kappa must be antisymmetric")
        if not np.allclose(u.T @ u, np.eye(n), atol=1e-10):
            raise ValueError("u must be orthogonal to 1e-10")
        if abs(np.linalg.det(u) - 1.0) > 1e-8:
            raise ValueError("u must be a proper rotation (det +1)")
        kappa.setflags(write=False)
        u.setflags(write=False)
        object.__setattr__(self, "kappa", kappa)
        object.__setattr__(self, "u", u)

    @classmethod
    def from_kappa(cls, kappa: np.ndarray) -> "OrbitalRotation":
        return cls(kappa=np.asarray(kappa, dtype=float), u=kappa_to_unitary(kappa))

    @classmethod
    def from_unitary(cls, u: np.ndarray) -> "OrbitalRotation":
        """Recover kappa = log(u); valid for rotations away from angle pi."""
        u = np.asarray(u, dtype=float)
        kappa = sla.logm(u)
        if np.abs(kappa.imag).max() > 1e-8:
            raise ValueError("rotation has no real antisymmetric logarithm")
        kappa = 0.5 * (kappa.real - kappa.real.T)
        if not np.allclose(sla.expm(kappa), u, atol=1e-8):
            raise ValueError("logarithm does not reproduce the rotation")
        return cls(kappa=kappa, u=u)


@dataclass
class OoOptions:
    macro_max: int = 30
    macro_tolerance: float = 1e-7
    kappa_max_iterations: int = 200
    # Symmetric orbitals sit on saddle points of the rotation surface where
    # the kappa gradient vanishes; extra seeded random starts break out.
    kappa_restarts: int = 2
    kappa_kick: float = 0.08


@dataclass
class OoResult:
    rotation: OrbitalRotation
    vqe: VqeResult
    rotated_integrals: IntegralSet
    macro_iterations: int
    energy_trace: list[float]
    converged: bool

    @property
    def energy(self) -> float:
        return self.vqe.energy


def _skew_from_vector(x: np.ndarray, n: int) -> np.ndarray:
    m = np.zeros((n, n))
    m[np.tril_indices(n, -1)] = x
    return m - m.T


def _central_difference(fun, x: np.ndarray, step: float) -> np.ndarray:
    grad = np.empty_like(x)
    for k in range(len(x)):
        probe = x.copy()
        probe[k] = x[k] + step
        up = fun(probe)
        probe[k] = x[k] - step
        down = fun(probe)
        grad[k] = (up - down) / (2.0 * step)
    return grad


def oo_vqe(s: IntegralSet, opts: VqeOptions, oo_opts: OoOptions | None = None,
           depth: int = 1) -> OoResult:
    """Orbital-optimized VQE by alternating angle and rotation blocks.

    Returns the best joint point found; the macro energy trace is
    non-increasing by construction (each block starts from the incumbent),
    and a rise beyond tolerance in exact mode aborts with a diagnostic since
    it can only come from an optimizer fault.
    """
    oo_opts = oo_opts or OoOptions()
    n = s.norb
    nvir = n - s.npairs
    circuit = build_ansatz_circuit(s.npairs, nvir, depth)
    basis = PairBasis(n, s.npairs)
    nkappa = n * (n - 1) // 2

    current = s
    u_total = np.eye(n)
    theta = None
    vqe_res: VqeResult | None = None
    trace: list[float] = []
    best_energy = np.inf
    best_point: tuple[np.ndarray, IntegralSet, np.ndarray] | None = None
    prev_energy = None
    converged = False
    macro = 0
    rng = np.random.default_rng(opts.seed)

    for macro in range(1, oo_opts.macro_max + 1):
        macro_opts = opts if macro == 1 else replace(opts, restarts=1)
        vqe_res = minimize_energy(build_pair_hamiltonian(current), circuit, macro_opts,
                                  initial_theta=theta)
        theta = vqe_res.theta
        energy = vqe_res.energy

        state = evolve(circuit, theta, basis)
        moments = occupation_moments(state)
        hops = pair_hop_expectations(state)

        def kappa_energy(x):
            u = kappa_to_unitary(_skew_from_vector(x, n))
            ph = build_pair_hamiltonian(rotate_orbitals(current, u))
            return expectation_from_moments(ph, moments, hops)

        # Random kicks break symmetry saddles; only the first macro needs them
        # (later macros start from an already asymmetric point).
        starts = [np.zeros(nkappa)]
        if macro == 1:
            starts += [rng.uniform(-oo_opts.kappa_kick, oo_opts.kappa_kick, size=nkappa)
                       for _ in range(oo_opts.kappa_restarts)]
        best_kappa = None
        for x0 in starts:
            res = sciopt.minimize(kappa_energy, x0, method="L-BFGS-B",
                                  jac=lambda x: _central_difference(kappa_energy, x, _FD_STEP),
                                  options={"maxiter": oo_opts.kappa_max_iterations,
                                           "ftol": 1e-12, "gtol": 3e-6})
            if best_kappa is None or res.fun < best_kappa.fun:
                best_kappa = res
        if best_kappa.fun < energy:
            u_step = kappa_to_unitary(_skew_from_vector(best_kappa.x, n))
            current = rotate_orbitals(current, u_step)
            u_total = u_total @ u_step
            energy = float(best_kappa.fun)

        trace.append(energy)
        if energy < best_energy:
            best_energy = energy
            best_point = (theta.copy(), current, u_total.copy())
        if prev_energy is not None:
            if opts.mode == "exact" and energy > prev_energy + 100 * oo_opts.macro_tolerance:
                raise RuntimeError(
                    f"macro energy rose from {prev_energy:.10f} to {energy:.10f} "
                    f"at iteration {macro}; optimizer fault")
            if abs(prev_energy - energy) < oo_opts.macro_tolerance:
                converged = True
                break
        prev_energy = energy

    if not converged:
        log.warning("oo-vqe stopped at macro_max=%d without meeting %.1e",
                    oo_opts.macro_max, oo_opts.macro_tolerance)

    theta_best, integrals_best, u_best = best_point
    # Final angle polish at the winning orbitals, warm started.
    final_vqe = minimize_energy(build_pair_hamiltonian(integrals_best), circuit,
                                replace(opts, restarts=1), initial_theta=theta_best)
    if final_vqe.energy > best_energy + 1e-12 and opts.mode == "exact":
        # The polish cannot make things worse from a warm start; keep whichever won.
        final_vqe.theta = theta_best
        final_vqe.energy = best_energy
    trace.append(final_vqe.energy)

    rotation = _rotation_from_unitary(u_best)
    return OoResult(rotation=rotation, vqe=final_vqe, rotated_integrals=integrals_best,
                    macro_iterations=macro, energy_trace=trace, converged=converged)


def _rotation_from_unitary(u: np.ndarray) -> OrbitalRotation:
    try:
        return OrbitalRotation.from_unitary(u)
    except ValueError:  # rotation angle at the logarithm branch cut
        log.warning("storing rotation with kappa = 0 placeholder; log(u) ill-defined")
        return OrbitalRotation(kappa=np.zeros_like(u), u=u)


def oo_doci(s: IntegralSet, oo_opts: OoOptions | None = None,
            initial_u: np.ndarray | None = None) -> tuple[float, IntegralSet]:
    """Minimize the exact seniority-zero energy over the same rotations.

    Oracle counterpart of :func:`oo_vqe`: the inner solver is the DOCI
    ground eigenvalue.  Returns the best energy and the rotated integrals.
    Intended for small systems; every trial rotation costs a dense
    diagonalization.
    """
    from .oracles import doci_ground_state

    oo_opts = oo_opts or OoOptions()
    n = s.norb
    nkappa = n * (n - 1) // 2
    current = s if initial_u is None else rotate_orbitals(s, initial_u)
    prev = doci_ground_state(build_pair_hamiltonian(current)).energy
    for _ in range(oo_opts.macro_max):
        def objective(x):
            u = kappa_to_unitary(_skew_from_vector(x, n))
            ph = build_pair_hamiltonian(rotate_orbitals(current, u))
            return doci_ground_state(ph).energy

        res = sciopt.minimize(objective, np.zeros(nkappa), method="L-BFGS-B",
                              jac=lambda x: _central_difference(objective, x, _FD_STEP),
                              options={"maxiter": oo_opts.kappa_max_iterations,
                                       "ftol": 1e-12, "gtol": 1e-7})
        if res.fun < prev - oo_opts.macro_tolerance:
            current = rotate_orbitals(current, kappa_to_unitary(_skew_from_vector(res.x, n)))
            prev = float(res.fun)
        else:
            break
    return prev, current
