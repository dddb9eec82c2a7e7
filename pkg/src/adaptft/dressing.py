"""Effective-Hamiltonian construction from linear-combination transformations.

Each dressing step picks the d pool generators with the largest residual
gradients, jointly optimizes the fixed-size ansatz parameters and the
transformation amplitudes of D = 1 + sum_u theta_u g_u under the
Rayleigh quotient <psi|D^dag H' D|psi> / <psi|D^dag D|psi>, then bakes
the optimized transformation into the Hamiltonian:

    H'_next = (D^dag H' D) simplified at the configured threshold.

The ansatz circuit never grows past its initial k parameters; correlation
beyond it accumulates in H'.
"""

from __future__ import annotations

from dataclasses import dataclass, field
from typing import Sequence

import numpy as np
import scipy.optimize

from .fermion import OperatorPool
from .pauli import PauliSum
from .solver import (
    AnsatzState,
    RunResult,
    SolverConfig,
    run as run_adaptive,
    select_top,
)
from .statevector import ReferenceState, StateVector, _apply_raw, apply_exp

__all__ = [
    "FtConfig",
    "FtRecord",
    "DressedHamiltonian",
    "TermCapExceeded",
    "dress",
    "run_adapt_ft",
    "FtResult",
]


class TermCapExceeded(RuntimeError):
    pass


@dataclass(frozen=True)
class FtConfig:
    """ADAPT-FT(k, d, m) settings plus inherited solver knobs."""

    k: int = 5                     # fixed ansatz parameter budget
    d: int = 5                     # generators per dressing transformation
    m: int = 1                     # dressing iterations
    pool_flavor: str = "qubit_excitation"
    simplify_threshold: float = 1e-12
    term_cap: int = 200_000
    solver: SolverConfig = field(default_factory=SolverConfig)
    theta_rule: str = "optimized"  # or "gradient_step"
    # skip the symbolic H' expansion (keep only transformation provenance);
    # energies and selection are exact either way, term counts are not
    # tracked when disabled
    bake_symbolic: bool = True

    def __post_init__(self):
        if self.k < 0 or self.d < 1 or self.m < 0:
            raise ValueError("require k >= 0, d >= 1, m >= 0")
        if self.theta_rule not in ("optimized", "gradient_step"):
            raise ValueError(f"unknown theta_rule {self.theta_rule!r}")


@dataclass(frozen=True)
class FtRecord:
    iteration: int                  # dressing iteration, 1-based
    selected_labels: tuple[str, ...]
    thetas: tuple[float, ...]       # baked transformation amplitudes
    ansatz_thetas: tuple[float, ...]  # ansatz parameters at this iteration
    energy: float                   # Rayleigh quotient after optimization
    delta_h: float
    term_count: int                 # terms of H' after baking
    growth_factor: float


@dataclass
class DressedHamiltonian:
    """H' with the provenance of every baked transformation."""

    base: PauliSum
    current: PauliSum
    transformations: list[tuple[tuple[str, ...], tuple[float, ...]]]
    term_counts: list[int]

    @property
    def growth_factor(self) -> float:
        base_terms = self.base.term_count()
        return self.current.term_count() / base_terms if base_terms else 0.0


def dress(
    hamiltonian: PauliSum,
    generators: Sequence[PauliSum],
    thetas: Sequence[float],
    threshold: float = 1e-12,
) -> PauliSum:
    """(1 + sum theta g)^dag H (1 + sum theta g), exactly expanded.

    The result is re-Hermitized (exact symmetrization) before the
    threshold prune so roundoff never leaves a skew component.
    """
    if len(generators) != len(thetas):
        raise ValueError("generators/thetas length mismatch")
    d_op = PauliSum.identity(hamiltonian.n_qubits)
    for g, theta in zip(generators, thetas):
        if g.n_qubits != hamiltonian.n_qubits:
            raise ValueError("generator qubit count differs from Hamiltonian")
        d_op = d_op + g.scale(theta)
    dressed = d_op.adjoint().mul(hamiltonian).mul(d_op)
    dressed = (dressed + dressed.adjoint()).scale(0.5)
    return dressed.simplify(threshold)


class _FrozenChain:
    """Baked transformations L_1 .. L_{i-1} with D = L_{i-1} ... L_1.

    The transformation grows outward: each new factor multiplies on the
    left, acting on the already-dressed state, so applying the chain to
    a vector runs in bake order (L_1 first)."""

    def __init__(self, n_qubits: int):
        self.n_qubits = n_qubits
        self.steps: list[tuple[tuple[PauliSum, ...], tuple[float, ...]]] = []

    def append(self, gens, thetas):
        self.steps.append((tuple(gens), tuple(float(t) for t in thetas)))

    def apply(self, amps: np.ndarray) -> np.ndarray:
        for gens, thetas in self.steps:
            out = amps.copy()
            for g, t in zip(gens, thetas):
                if t != 0.0:
                    out += t * _apply_raw(g, amps)
            amps = out
        return amps

    def apply_adjoint(self, amps: np.ndarray) -> np.ndarray:
        # C^dag = L_1^dag ... L_{i-1}^dag applied newest-first;
        # L^dag = 1 - sum theta g for anti-Hermitian generators
        for gens, thetas in reversed(self.steps):
            out = amps.copy()
            for g, t in zip(gens, thetas):
                if t != 0.0:
                    out -= t * _apply_raw(g, amps)
            amps = out
        return amps


def _joint_energy_gradient(
    x, ansatz: AnsatzState, gens, hamiltonian: PauliSum, chain: _FrozenChain
):
    """True Rayleigh quotient over [ansatz thetas | dressing thetas].

    The full (unnormalized) state is phi = D(theta_d) C Psi(theta_a):
    the fresh transformation acts on the chain-dressed state, matching
    the outward growth D_m = (1 + sum theta tau) D_{m-1}.  The objective
    equals the pencil quotient of the symbolically dressed pair
    (H', M = D_tot^dag D_tot) while only ever applying the bare
    Hamiltonian.
    """
    pool_gens = ansatz.pool.generators
    n = ansatz.pool.n_qubits
    k = ansatz.n_parameters
    theta_a = x[:k]
    theta_d = x[k:]

    seq = []
    pos = 0
    for layer in ansatz.layers:
        for idx, _ in layer:
            seq.append((idx, theta_a[pos]))
            pos += 1
    states = [ansatz.reference.to_statevector(n).amplitudes]
    for idx, theta in seq:
        states.append(apply_exp(theta, pool_gens[idx], StateVector(n, states[-1])).amplitudes)
    psi = states[-1]

    chi = chain.apply(psi)
    g_chi = [_apply_raw(g, chi) for g in gens]
    phi = chi.copy()
    for theta, v in zip(theta_d, g_chi):
        if theta != 0.0:
            phi += theta * v

    nrm2 = float(np.vdot(phi, phi).real)
    if nrm2 < 1e-300:
        raise ZeroDivisionError("dressed state collapsed to zero norm")
    w = _apply_raw(hamiltonian, phi)
    a_val = float(np.vdot(phi, w).real)
    energy = a_val / nrm2

    grad = np.empty(x.size)
    # dressing amplitudes: d phi / d theta_u = g_u chi
    for u, v in enumerate(g_chi):
        ga = 2.0 * float(np.vdot(w, v).real)
        gn = 2.0 * float(np.vdot(phi, v).real)
        grad[k + u] = (ga - energy * gn) / nrm2
    # ansatz parameters: d phi = D C (d Psi); pull (D C)^dag through
    y = w.copy()
    z = phi.copy()
    for theta, g in zip(theta_d, gens):
        if theta != 0.0:
            y -= theta * _apply_raw(g, w)
            z -= theta * _apply_raw(g, phi)
    y = chain.apply_adjoint(y)
    z = chain.apply_adjoint(z)
    for l in range(len(seq) - 1, -1, -1):
        idx, theta = seq[l]
        v = _apply_raw(pool_gens[idx], states[l + 1])
        ga = 2.0 * float(np.vdot(y, v).real)
        gn = 2.0 * float(np.vdot(z, v).real)
        grad[l] = (ga - energy * gn) / nrm2
        if l:
            y = apply_exp(-theta, pool_gens[idx], StateVector(n, y)).amplitudes
            z = apply_exp(-theta, pool_gens[idx], StateVector(n, z)).amplitudes
    # uncertainty of the bare Hamiltonian in the normalized full state
    dh2 = float(np.vdot(w, w).real) / nrm2 - energy * energy
    return energy, grad, float(np.sqrt(max(dh2, 0.0)))


@dataclass(frozen=True)
class FtResult:
    dressed: DressedHamiltonian
    ansatz: AnsatzState
    build: RunResult                 # the k-parameter state-preparation stage
    records: tuple[FtRecord, ...]
    status: str  # converged | max_iterations | term_cap | no_dressing

    @property
    def energy(self) -> float:
        if self.records:
            return self.records[-1].energy
        return self.build.energy


def run_adapt_ft(
    hamiltonian: PauliSum,
    pool: OperatorPool,
    reference: ReferenceState,
    config: FtConfig,
) -> FtResult:
    """Fixed-depth adaptive run with iterative Hamiltonian dressing.

    Stage 1 grows a k-parameter unitary-product ansatz against the bare
    Hamiltonian; stage 2 repeats (select by residual gradient, jointly
    optimize, bake) m times or until delta_H < epsilon.  Exceeding the
    term cap aborts gracefully, keeping the last valid Hamiltonian.
    """
    build_cfg = SolverConfig(
        epsilon=config.solver.epsilon,
        d=1,
        max_iterations=config.k,
        gradient_norm_tol=config.solver.gradient_norm_tol,
        max_evaluations=config.solver.max_evaluations,
        pool_flavor=config.pool_flavor,
        mu=config.solver.mu,
        threads=config.solver.threads,
    )
    build = run_adaptive(hamiltonian, pool, reference, build_cfg, flavor="adapt")
    ansatz = build.ansatz
    theta_a = ansatz.parameters()

    dressed = DressedHamiltonian(
        base=hamiltonian,
        current=hamiltonian,
        transformations=[],
        term_counts=[hamiltonian.term_count()],
    )
    records: list[FtRecord] = []
    if config.m == 0:
        return FtResult(dressed, ansatz, build, tuple(records), "no_dressing")

    status = "max_iterations"
    chain = _FrozenChain(hamiltonian.n_qubits)
    last_dh = build.records[-1].delta_h if build.records else np.inf
    for iteration in range(1, config.m + 1):
        if last_dh < config.solver.epsilon:
            status = "converged"
            break
        psi = ansatz.construct().normalized()
        # residual gradient of the pencil quotient: the exact derivative of
        # the energy with respect to a fresh transformation amplitude at 0.
        # The fresh operator acts on the chain-dressed state; with an empty
        # chain this reduces to <psi|[H', tau]|psi>.
        chi = chain.apply(psi.amplitudes)
        w = _apply_raw(hamiltonian, chi)
        nrm2 = float(np.vdot(chi, chi).real)
        e_cur = float(np.vdot(chi, w).real) / nrm2
        residuals = np.empty(len(pool))
        for u, g in enumerate(pool.generators):
            v = _apply_raw(g, chi)
            ga = 2.0 * float(np.vdot(w, v).real)
            gn = 2.0 * float(np.vdot(chi, v).real)
            residuals[u] = (ga - e_cur * gn) / nrm2
        chosen = select_top(residuals, config.d)
        gens = [pool.generators[i] for i in chosen]
        labels = tuple(pool.labels[i] for i in chosen)

        if config.theta_rule == "optimized":
            x0 = np.concatenate([theta_a, np.zeros(len(chosen))])

            def objective(x):
                try:
                    e, g, _ = _joint_energy_gradient(x, ansatz, gens, hamiltonian, chain)
                    return e, g
                except ZeroDivisionError:
                    return np.inf, np.zeros_like(x)

            opt = scipy.optimize.minimize(
                objective,
                x0,
                jac=True,
                method="BFGS",
                options={
                    "gtol": config.solver.gradient_norm_tol,
                    "maxiter": config.solver.max_evaluations,
                },
            )
            x_opt = np.asarray(opt.x, dtype=float)
        else:  # gradient_step: amplitudes proportional to the residuals
            direction = -np.array([residuals[i] for i in chosen])
            x_base = np.concatenate([theta_a, np.zeros(len(chosen))])

            def line_energy(eta):
                x = x_base.copy()
                x[len(theta_a):] = eta * direction
                try:
                    return _joint_energy_gradient(x, ansatz, gens, hamiltonian, chain)[0]
                except ZeroDivisionError:
                    return np.inf
            scan = scipy.optimize.minimize_scalar(line_energy, bracket=(0.0, 0.1))
            x_opt = x_base
            x_opt[len(theta_a):] = float(scan.x) * direction

        energy, _, dh = _joint_energy_gradient(x_opt, ansatz, gens, hamiltonian, chain)
        theta_a = x_opt[: len(theta_a)]
        theta_d = x_opt[len(theta_a):]
        ansatz = ansatz.with_parameters(theta_a)

        if config.bake_symbolic:
            # H'_m = D_m^dag H D_m with D_m = L_m ... L_1 (newest leftmost):
            # rebuild from the base, dressing newest-first
            new_h = hamiltonian
            pending = dressed.transformations + [
                (labels, tuple(float(t) for t in theta_d))
            ]
            label_index = {lab: i for i, lab in enumerate(pool.labels)}
            capped = False
            for step_labels, step_thetas in reversed(pending):
                step_gens = [pool.generators[label_index[l]] for l in step_labels]
                new_h = dress(new_h, step_gens, step_thetas, config.simplify_threshold)
                if new_h.term_count() > config.term_cap:
                    capped = True
                    break
            if capped:
                status = "term_cap"
                break
            dressed.current = new_h
            term_count = new_h.term_count()
        else:
            term_count = 0
        dressed.transformations.append((labels, tuple(float(t) for t in theta_d)))
        dressed.term_counts.append(term_count)
        chain.append(gens, theta_d)
        records.append(
            FtRecord(
                iteration=iteration,
                selected_labels=labels,
                thetas=tuple(float(t) for t in theta_d),
                ansatz_thetas=tuple(float(t) for t in theta_a),
                energy=energy,
                delta_h=dh,
                term_count=term_count,
                growth_factor=term_count / hamiltonian.term_count(),
            )
        )
        last_dh = dh
    else:
        status = "max_iterations"
    return FtResult(dressed, ansatz, build, tuple(records), status)


def dressed_state(result: FtResult, up_to: int | None = None) -> StateVector:
    """Apply baked transformations to the ansatz state.

    ``up_to`` keeps only the first ``up_to`` transformations (with the
    ansatz parameters recorded at that iteration), reproducing the
    intermediate states of the run.  Transformations act in bake order
    (first baked innermost); the result is unnormalized and satisfies
    <psi|H'_m|psi>/<psi|M_m|psi> = <phi|H_base|phi>/<phi|phi>.
    """
    transformations = result.dressed.transformations
    if up_to is None:
        up_to = len(transformations)
        ansatz = result.ansatz
    elif up_to == 0:
        return result.build.ansatz.construct()
    else:
        ansatz = result.ansatz.with_parameters(result.records[up_to - 1].ansatz_thetas)
    pool = ansatz.pool
    amps = ansatz.construct().amplitudes.copy()
    label_index = {lab: i for i, lab in enumerate(pool.labels)}
    for labels, thetas in transformations[:up_to]:
        out = amps.copy()
        for lab, theta in zip(labels, thetas):
            if theta != 0.0:
                out += theta * _apply_raw(pool.generators[label_index[lab]], amps)
        amps = out
    return StateVector(pool.n_qubits, amps)
