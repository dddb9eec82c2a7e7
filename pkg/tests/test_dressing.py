"""Dressing transformations and the fixed-depth ADAPT-FT loop."""

import json
from pathlib import Path

import numpy as np
import pytest

from adaptft.dressing import FtConfig, dress, dressed_state, run_adapt_ft
from adaptft.fermion import (
    build_hamiltonian,
    hf_occupations,
    make_pool,
    parse_fcidump,
    penalized_hamiltonian,
)
from adaptft.pauli import PauliString, PauliSum
from adaptft.solver import SolverConfig
from adaptft.statevector import (
    ReferenceState,
    StateVector,
    _apply_raw,
    exact_ground_state,
    rayleigh_quotient,
)

from oracles import random_pauli_sum

FIXTURES = Path(__file__).parent / "fixtures"


def rand_antihermitian(rng, n, terms=3):
    s = random_pauli_sum(PauliSum, PauliString, rng, n, terms)
    return (s - s.adjoint()).scale(0.5)


def apply_transformation(amps, gens, thetas):
    out = amps.copy()
    for g, t in zip(gens, thetas):
        out += t * _apply_raw(g, amps)
    return out


class TestDress:
    def test_zero_thetas_identity(self):
        rng = np.random.default_rng(0)
        h = random_pauli_sum(PauliSum, PauliString, rng, 3, 8, hermitian=True)
        gens = [rand_antihermitian(rng, 3) for _ in range(3)]
        assert dress(h, gens, [0.0, 0.0, 0.0], threshold=0.0).allclose(h, 1e-14)

    def test_statevector_consistency(self):
        rng = np.random.default_rng(1)
        for _ in range(25):
            n = int(rng.integers(2, 5))
            h = random_pauli_sum(PauliSum, PauliString, rng, n, 6, hermitian=True)
            gens = [rand_antihermitian(rng, n) for _ in range(int(rng.integers(1, 4)))]
            thetas = rng.normal(scale=0.4, size=len(gens))
            dressed = dress(h, gens, thetas, threshold=0.0)
            amps = rng.normal(size=2**n) + 1j * rng.normal(size=2**n)
            amps /= np.linalg.norm(amps)
            lhs = np.vdot(amps, _apply_raw(dressed, amps))
            phi = apply_transformation(amps, gens, thetas)
            rhs = np.vdot(phi, _apply_raw(h, phi))
            assert abs(lhs - rhs) < 1e-10
            assert dressed.is_hermitian(1e-12)

    def test_threshold_controls_term_count(self):
        rng = np.random.default_rng(2)
        h = random_pauli_sum(PauliSum, PauliString, rng, 3, 8, hermitian=True)
        gens = [rand_antihermitian(rng, 3)]
        loose = dress(h, gens, [0.3], threshold=1e-2)
        tight = dress(h, gens, [0.3], threshold=0.0)
        assert loose.term_count() <= tight.term_count()

    def test_length_mismatch(self):
        rng = np.random.default_rng(3)
        h = random_pauli_sum(PauliSum, PauliString, rng, 2, 4, hermitian=True)
        with pytest.raises(ValueError):
            dress(h, [rand_antihermitian(rng, 2)], [0.1, 0.2])


@pytest.fixture(scope="module")
def h2o_setup():
    system = parse_fcidump((FIXTURES / "h2o_r2.30.fcidump").read_text())
    hamiltonian = build_hamiltonian(system)
    penalized = penalized_hamiltonian(hamiltonian, 0.5)
    reference = ReferenceState(hf_occupations(system))
    oracle = json.loads((FIXTURES / "h2o_r2.30.oracle.json").read_text())
    return system, hamiltonian, penalized, reference, oracle


class TestRunAdaptFt:
    def test_m0_reduces_to_plain_adapt(self, h2o_setup):
        system, hamiltonian, penalized, reference, _ = h2o_setup
        pool = make_pool("pauli_string", system)
        config = FtConfig(k=4, d=3, m=0, pool_flavor="pauli_string",
                          solver=SolverConfig(epsilon=1e-4))
        result = run_adapt_ft(penalized, pool, reference, config)
        assert result.status == "no_dressing"
        assert result.dressed.current == penalized
        from adaptft.solver import run as run_adaptive

        plain = run_adaptive(
            penalized, pool, reference,
            SolverConfig(epsilon=1e-4, d=1, max_iterations=4), flavor="adapt",
        )
        assert result.energy == pytest.approx(plain.energy, abs=1e-9)

    def test_dressing_identity_links_energies(self, h2o_setup):
        system, hamiltonian, penalized, reference, _ = h2o_setup
        pool = make_pool("pauli_string", system)
        config = FtConfig(k=3, d=3, m=2, pool_flavor="pauli_string",
                          solver=SolverConfig(epsilon=1e-6))
        result = run_adapt_ft(penalized, pool, reference, config)
        assert len(result.records) == 2
        for i, record in enumerate(result.records, start=1):
            phi = dressed_state(result, up_to=i)
            e_state = rayleigh_quotient(penalized, phi).real
            assert e_state == pytest.approx(record.energy, abs=1e-9)
        # symbolic route: pencil quotient <psi|H'|psi>/<psi|M|psi> with the
        # metric M = D^dag D dressed from the identity by the same steps
        # (newest transformation innermost, matching D = L_m ... L_1)
        psi = result.ansatz.construct()
        metric = PauliSum.identity(penalized.n_qubits)
        label_index = {lab: i for i, lab in enumerate(pool.labels)}
        for labels, thetas in reversed(result.dressed.transformations):
            gens = [pool.generators[label_index[l]] for l in labels]
            metric = dress(metric, gens, thetas, threshold=0.0)
        num = rayleigh_quotient(result.dressed.current, psi).real
        den = rayleigh_quotient(metric, psi).real
        # agreement limited by the simplify threshold on the baked H'
        assert num / den == pytest.approx(result.records[-1].energy, abs=1e-7)

    def test_energy_decreases_and_depth_fixed(self, h2o_setup):
        system, hamiltonian, penalized, reference, _ = h2o_setup
        pool = make_pool("pauli_string", system)
        config = FtConfig(k=4, d=4, m=3, pool_flavor="pauli_string",
                          solver=SolverConfig(epsilon=1e-8))
        result = run_adapt_ft(penalized, pool, reference, config)
        assert result.ansatz.n_parameters == 4
        energies = [result.build.energy] + [r.energy for r in result.records]
        assert all(b <= a + 1e-9 for a, b in zip(energies, energies[1:]))
        e_ground, _ = exact_ground_state(penalized)
        assert all(e >= e_ground - 1e-9 for e in energies)
        assert all(r.term_count == tc for r, tc in
                   zip(result.records, result.dressed.term_counts[1:]))

    def test_hermitian_after_every_iteration(self, h2o_setup):
        system, hamiltonian, penalized, reference, _ = h2o_setup
        pool = make_pool("qubit_excitation", system)
        config = FtConfig(k=2, d=2, m=2, pool_flavor="qubit_excitation",
                          solver=SolverConfig(epsilon=1e-8))
        result = run_adapt_ft(penalized, pool, reference, config)
        assert result.dressed.current.is_hermitian(1e-10)

    def test_term_cap_aborts_gracefully(self, h2o_setup):
        system, hamiltonian, penalized, reference, _ = h2o_setup
        pool = make_pool("fermionic", system)
        config = FtConfig(k=2, d=5, m=3, pool_flavor="fermionic",
                          term_cap=1000, solver=SolverConfig(epsilon=1e-8))
        result = run_adapt_ft(penalized, pool, reference, config)
        assert result.status == "term_cap"
        assert result.dressed.current.term_count() <= 1000 or \
            result.dressed.current == penalized

    def test_gradient_step_rule_runs(self, h2o_setup):
        system, hamiltonian, penalized, reference, _ = h2o_setup
        pool = make_pool("pauli_string", system)
        config = FtConfig(k=2, d=2, m=1, pool_flavor="pauli_string",
                          theta_rule="gradient_step",
                          solver=SolverConfig(epsilon=1e-8))
        result = run_adapt_ft(penalized, pool, reference, config)
        assert len(result.records) == 1
        assert result.records[0].energy <= result.build.energy + 1e-10


class TestMetricConsistency:
    def test_rayleigh_bound_against_bare_ground(self, h2o_setup):
        # minimum of the dressed Rayleigh quotient can never undercut the
        # true ground energy of the undressed Hamiltonian
        system, hamiltonian, penalized, reference, _ = h2o_setup
        pool = make_pool("pauli_string", system)
        config = FtConfig(k=3, d=3, m=2, pool_flavor="pauli_string",
                          solver=SolverConfig(epsilon=1e-8))
        result = run_adapt_ft(penalized, pool, reference, config)
        e_ground, _ = exact_ground_state(penalized)
        assert result.energy >= e_ground - 1e-9
