"""Adaptive variational eigensolver ansätze and effective-Hamiltonian dressing."""

from .pauli import PauliString, PauliSum, commutator
from .fermion import (
    MolecularSystem,
    FermionOperator,
    OperatorPool,
    parse_fcidump,
    jordan_wigner,
    build_hamiltonian,
    s_squared,
    penalized_hamiltonian,
    make_pool,
    hf_occupations,
)
from .statevector import (
    StateVector,
    ReferenceState,
    apply,
    expectation,
    rayleigh_quotient,
    variance,
    delta_h,
    apply_exp,
    exact_ground_state,
    lowest_eigenpairs,
)
from .solver import AnsatzState, SolverConfig, IterationRecord, RunResult, run, residual_gradients, energy_and_gradient
from .dressing import FtConfig, FtRecord, DressedHamiltonian, FtResult, dress, run_adapt_ft, dressed_state
from .bench import MethodSpec, ScanSpec, ScanResult, run_scan, run_point, emit, parse_result

__version__ = "0.1.0"
