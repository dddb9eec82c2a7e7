"""Adaptive ansatz construction driven by residual gradients.

Two ansatz flavors share the selection loop:

* ``adapt``  builds a product of unitaries exp(theta * g) layer by layer;
* ``adaft``  replaces each exponential by its first-order expansion
  (1 + sum_u theta_u g_u), which is non-unitary, so energies become
  Rayleigh quotients.

Each iteration appends the d pool generators with the largest residual
gradients <psi|[H, g]|psi| and re-optimizes every parameter from a warm
start with BFGS using analytic gradients (adjoint state sweeps).  The
stopping rule is the energy uncertainty delta_H = sqrt(<H^2> - <H>^2).
"""

from __future__ import annotations

from concurrent.futures import ThreadPoolExecutor
from dataclasses import dataclass
from typing import Sequence

import numpy as np
import scipy.optimize

from .fermion import OperatorPool
from .pauli import PauliSum
from .statevector import (
    ReferenceState,
    StateVector,
    _apply_raw,
    apply_exp,
    delta_h,
)

__all__ = [
    "AnsatzState",
    "SolverConfig",
    "IterationRecord",
    "RunResult",
    "residual_gradients",
    "energy_and_gradient",
    "run",
]


@dataclass(frozen=True)
class SolverConfig:
    """Knobs for the adaptive loop; energies in Hartree."""

    epsilon: float = 1e-3          # convergence threshold (Hartree)
    d: int = 1                     # generators appended per iteration
    max_iterations: int = 200
    gradient_norm_tol: float = 1e-8
    max_evaluations: int = 20000   # optimizer iteration cap per refresh
    pool_flavor: str = "fermionic"
    mu: float = 0.5                # spin penalty (caller composes H_s)
    stall_threshold: float = 1e-12
    threads: int = 1               # workers for the residual-gradient sweep
    # stopping rule: "delta_h" (energy uncertainty) or "residual_norm"
    # (the residual-gradient 2-norm); both are logged either way
    convergence_metric: str = "delta_h"

    def __post_init__(self):
        if self.epsilon <= 0:
            raise ValueError("epsilon must be positive")
        if self.d < 1:
            raise ValueError("d must be >= 1")
        if self.mu < 0:
            raise ValueError("mu must be non-negative")
        if self.convergence_metric not in ("delta_h", "residual_norm"):
            raise ValueError(f"unknown convergence metric {self.convergence_metric!r}")


@dataclass(frozen=True)
class IterationRecord:
    iteration: int
    selected_labels: tuple[str, ...]
    energy: float
    delta_h: float
    n_params: int
    residual_norm: float


@dataclass
class AnsatzState:
    """Ordered layers of (pool index, parameter) on top of a reference."""

    flavor: str  # "adapt" | "adaft"
    layers: list[list[tuple[int, float]]]
    reference: ReferenceState
    pool: OperatorPool

    def __post_init__(self):
        if self.flavor not in ("adapt", "adaft"):
            raise ValueError(f"unknown ansatz flavor {self.flavor!r}")

    @property
    def n_parameters(self) -> int:
        return sum(len(layer) for layer in self.layers)

    def parameters(self) -> np.ndarray:
        return np.array([theta for layer in self.layers for _, theta in layer])

    def with_parameters(self, params: Sequence[float]) -> "AnsatzState":
        params = np.asarray(params, dtype=float)
        if params.size != self.n_parameters:
            raise ValueError("parameter count mismatch")
        layers = []
        pos = 0
        for layer in self.layers:
            layers.append([(idx, float(params[pos + i])) for i, (idx, _) in enumerate(layer)])
            pos += len(layer)
        return AnsatzState(self.flavor, layers, self.reference, self.pool)

    def construct(self, params: Sequence[float] | None = None) -> StateVector:
        """Build the ansatz state; unnormalized for the adaft flavor."""
        if params is not None:
            return self.with_parameters(params).construct()
        n = self.pool.n_qubits
        state = self.reference.to_statevector(n)
        gens = self.pool.generators
        if self.flavor == "adapt":
            for layer in self.layers:
                for idx, theta in layer:
                    state = apply_exp(theta, gens[idx], state)
            return state
        amps = state.amplitudes
        for layer in self.layers:
            out = amps.copy()
            for idx, theta in layer:
                if theta != 0.0:
                    out += theta * _apply_raw(gens[idx], amps)
            amps = out
        return StateVector(n, amps)


def residual_gradients(
    hamiltonian: PauliSum,
    state: StateVector,
    pool: OperatorPool,
    threads: int = 1,
) -> np.ndarray:
    """R_u = <psi|[H, g_u]|psi> = 2 Re <H psi|g_u psi> for each generator.

    Real for Hermitian H and anti-Hermitian g_u; the state must be
    normalized.
    """
    amps = state.amplitudes
    w = _apply_raw(hamiltonian, amps)

    def one(gen: PauliSum) -> float:
        return 2.0 * float(np.vdot(w, _apply_raw(gen, amps)).real)

    if threads > 1 and len(pool) > 64:
        with ThreadPoolExecutor(max_workers=threads) as ex:
            return np.fromiter(ex.map(one, pool.generators), dtype=float, count=len(pool))
    return np.fromiter((one(g) for g in pool.generators), dtype=float, count=len(pool))


def _flat_layers(ansatz: AnsatzState, params: np.ndarray):
    out = []
    pos = 0
    for layer in ansatz.layers:
        out.append([(idx, params[pos + i]) for i, (idx, _) in enumerate(layer)])
        pos += len(layer)
    return out


def _adapt_energy_gradient(params, ansatz, hamiltonian):
    gens = ansatz.pool.generators
    n = ansatz.pool.n_qubits
    seq = [pair for layer in _flat_layers(ansatz, params) for pair in layer]
    states = [ansatz.reference.to_statevector(n).amplitudes]
    for idx, theta in seq:
        states.append(
            apply_exp(theta, gens[idx], StateVector(n, states[-1])).amplitudes
        )
    psi = states[-1]
    w = _apply_raw(hamiltonian, psi)
    energy = float(np.vdot(psi, w).real)
    grad = np.empty(len(seq))
    b = w
    for l in range(len(seq) - 1, -1, -1):
        idx, theta = seq[l]
        grad[l] = 2.0 * float(np.vdot(b, _apply_raw(gens[idx], states[l + 1])).real)
        if l:
            b = apply_exp(-theta, gens[idx], StateVector(n, b)).amplitudes
    return energy, grad


def _adaft_energy_gradient(params, ansatz, hamiltonian):
    gens = ansatz.pool.generators
    n = ansatz.pool.n_qubits
    layers = _flat_layers(ansatz, params)
    pre = [ansatz.reference.to_statevector(n).amplitudes]
    for layer in layers:
        amps = pre[-1]
        out = amps.copy()
        for idx, theta in layer:
            if theta != 0.0:
                out += theta * _apply_raw(gens[idx], amps)
        pre.append(out)
    psi = pre[-1]
    nrm2 = float(np.vdot(psi, psi).real)
    if nrm2 < 1e-300:
        raise ZeroDivisionError("adaft state collapsed to zero norm")
    w = _apply_raw(hamiltonian, psi)
    a_val = float(np.vdot(psi, w).real)
    energy = a_val / nrm2
    grad = np.empty(sum(len(l) for l in layers))
    c = w
    dvec = psi.copy()
    pos = grad.size
    for l in range(len(layers) - 1, -1, -1):
        layer = layers[l]
        base = pre[l]
        pos -= len(layer)
        for i, (idx, _) in enumerate(layer):
            v = _apply_raw(gens[idx], base)
            ga = 2.0 * float(np.vdot(c, v).real)
            gn = 2.0 * float(np.vdot(dvec, v).real)
            grad[pos + i] = (ga - energy * gn) / nrm2
        if l:
            # L^dag = 1 - sum theta * g  (generators are anti-Hermitian)
            c_new = c.copy()
            d_new = dvec.copy()
            for idx, theta in layer:
                if theta != 0.0:
                    c_new -= theta * _apply_raw(gens[idx], c)
                    d_new -= theta * _apply_raw(gens[idx], dvec)
            c, dvec = c_new, d_new
    return energy, grad


def energy_and_gradient(params, ansatz: AnsatzState, hamiltonian: PauliSum):
    """Energy and its exact parameter gradient for either flavor.

    adapt: E = <psi|H|psi> (unitary layers keep the norm at 1);
    adaft: the Rayleigh quotient with the exact quotient-rule gradient.
    A zero-norm adaft state raises ZeroDivisionError.
    """
    params = np.asarray(params, dtype=float)
    if params.size != ansatz.n_parameters:
        raise ValueError("parameter count mismatch")
    if ansatz.flavor == "adapt":
        return _adapt_energy_gradient(params, ansatz, hamiltonian)
    return _adaft_energy_gradient(params, ansatz, hamiltonian)


def _optimize(ansatz: AnsatzState, params: np.ndarray, hamiltonian: PauliSum, config: SolverConfig):
    def objective(x):
        try:
            return energy_and_gradient(x, ansatz, hamiltonian)
        except ZeroDivisionError:
            return np.inf, np.zeros_like(x)

    result = scipy.optimize.minimize(
        objective,
        params,
        jac=True,
        method="BFGS",
        options={
            "gtol": config.gradient_norm_tol,
            "maxiter": config.max_evaluations,
        },
    )
    if not np.isfinite(result.fun):
        raise RuntimeError("optimizer diverged to a non-finite energy")
    return np.asarray(result.x, dtype=float), float(result.fun)


@dataclass(frozen=True)
class RunResult:
    ansatz: AnsatzState
    records: tuple[IterationRecord, ...]
    status: str  # converged | stalled | max_iterations

    @property
    def energy(self) -> float:
        return self.records[-1].energy if self.records else np.nan

    @property
    def converged(self) -> bool:
        return self.status == "converged"


def select_top(residuals: np.ndarray, d: int) -> list[int]:
    """Indices of the d largest |R|, ties broken by lowest pool index."""
    order = sorted(range(residuals.size), key=lambda i: (-abs(residuals[i]), i))
    return order[:d]


def run(
    hamiltonian: PauliSum,
    pool: OperatorPool,
    reference: ReferenceState,
    config: SolverConfig,
    flavor: str = "adaft",
) -> RunResult:
    """The adaptive loop on a (possibly spin-penalized) Hamiltonian.

    Stops when delta_H < epsilon, when every residual gradient falls
    below the stall threshold, or at the iteration cap.  Records carry
    the post-optimization energy and delta_H of every iteration.
    """
    ansatz = AnsatzState(flavor, [], reference, pool)
    params = np.zeros(0)
    records: list[IterationRecord] = []

    state = ansatz.construct(params)
    dh = delta_h(hamiltonian, state)
    status = "max_iterations"
    for iteration in range(1, config.max_iterations + 1):
        if config.convergence_metric == "delta_h" and dh < config.epsilon:
            status = "converged"
            break
        normalized = state.normalized()
        residuals = residual_gradients(hamiltonian, normalized, pool, config.threads)
        if (
            config.convergence_metric == "residual_norm"
            and float(np.linalg.norm(residuals)) < config.epsilon
        ):
            status = "converged"
            break
        if np.abs(residuals).max() < config.stall_threshold:
            status = "stalled"
            break
        chosen = select_top(residuals, config.d)
        ansatz.layers.append([(idx, 0.0) for idx in chosen])
        params = np.concatenate([params, np.zeros(len(chosen))])
        params, energy = _optimize(ansatz, params, hamiltonian, config)
        ansatz = ansatz.with_parameters(params)
        state = ansatz.construct(params)
        dh = delta_h(hamiltonian, state)
        records.append(
            IterationRecord(
                iteration=iteration,
                selected_labels=tuple(pool.labels[i] for i in chosen),
                energy=energy,
                delta_h=dh,
                n_params=params.size,
                residual_norm=float(np.linalg.norm(residuals)),
            )
        )
    else:
        status = "max_iterations"
    return RunResult(ansatz=ansatz, records=tuple(records), status=status)
