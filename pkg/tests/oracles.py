"""Independent dense-matrix oracles for the test suite.

Everything here is built from explicit Kronecker products and textbook
definitions, deliberately avoiding the symplectic/bitmask code paths
under test.
"""

from __future__ import annotations

import numpy as np

I2 = np.eye(2, dtype=complex)
X = np.array([[0, 1], [1, 0]], dtype=complex)
Y = np.array([[0, -1j], [1j, 0]], dtype=complex)
Z = np.array([[1, 0], [0, -1]], dtype=complex)
PAULI = {"I": I2, "X": X, "Y": Y, "Z": Z}

# |1> is occupied; lowering |1> -> |0| is the annihilator
ANNIHILATE = np.array([[0, 1], [0, 0]], dtype=complex)


def dense_string(n_qubits: int, letters: dict[int, str]) -> np.ndarray:
    """Kronecker product with qubit 0 as the least significant factor."""
    out = np.eye(1, dtype=complex)
    for q in range(n_qubits - 1, -1, -1):
        out = np.kron(out, PAULI[letters.get(q, "I")])
    return out


def dense_sum(op) -> np.ndarray:
    """Dense matrix of a PauliSum via its public letters() view."""
    total = np.zeros((2**op.n_qubits, 2**op.n_qubits), dtype=complex)
    for string, coeff in op.terms():
        total += coeff * dense_string(op.n_qubits, string.letters())
    return total


def dense_ladder(index: int, dagger: bool, n_so: int) -> np.ndarray:
    """Jordan-Wigner ladder operator built directly from 2x2 blocks."""
    op = ANNIHILATE.conj().T if dagger else ANNIHILATE
    out = np.eye(1, dtype=complex)
    for q in range(n_so - 1, -1, -1):
        if q == index:
            factor = op
        elif q < index:
            factor = Z
        else:
            factor = I2
        out = np.kron(out, factor)
    return out


def dense_fermion(op, n_so: int) -> np.ndarray:
    """Dense matrix of a FermionOperator via ladder-matrix products."""
    dim = 2**n_so
    total = np.zeros((dim, dim), dtype=complex)
    for term, coeff in op.terms.items():
        mat = np.eye(dim, dtype=complex)
        for index, dagger in term:
            mat = mat @ dense_ladder(index, bool(dagger), n_so)
        total += coeff * mat
    return total


def dense_hamiltonian(system) -> np.ndarray:
    """Second-quantized Hamiltonian from ladder matrices (blocked spins)."""
    n = system.n_spatial_orbitals
    n_so = 2 * n
    dim = 2**n_so
    total = np.eye(dim, dtype=complex) * system.core_energy
    create = [dense_ladder(p, True, n_so) for p in range(n_so)]
    destroy = [dense_ladder(p, False, n_so) for p in range(n_so)]
    for p in range(n):
        for q in range(n):
            if system.h1[p, q] == 0.0:
                continue
            for sp in (0, 1):
                total += system.h1[p, q] * create[p + sp * n] @ destroy[q + sp * n]
    for p in range(n):
        for s in range(n):
            for q in range(n):
                for r in range(n):
                    v = system.h2[p, s, q, r]
                    if v == 0.0:
                        continue
                    for sa in (0, 1):
                        for sb in (0, 1):
                            P, S = p + sa * n, s + sa * n
                            Q, R = q + sb * n, r + sb * n
                            if P == Q or R == S:
                                continue
                            total += 0.5 * v * create[P] @ create[Q] @ destroy[R] @ destroy[S]
    return total


def determinant_ground_energy(system) -> float:
    """Brute-force CI over fixed-electron-number determinants.

    Enumerates occupation bitstrings with the right electron count,
    builds the Hamiltonian block from the dense-matrix oracle, and
    diagonalizes; independent of any qubit statevector code.
    """
    n_so = 2 * system.n_spatial_orbitals
    dense = dense_hamiltonian(system)
    basis = [b for b in range(2**n_so) if bin(b).count("1") == system.n_electrons]
    block = dense[np.ix_(basis, basis)]
    return float(np.linalg.eigvalsh(block)[0].real)


def random_pauli_sum(PauliSum, PauliString, rng, n_qubits, n_terms, hermitian=False):
    terms = []
    for _ in range(n_terms):
        support = rng.choice(
            n_qubits, size=int(rng.integers(0, n_qubits + 1)), replace=False
        )
        letters = {int(q): "XYZ"[rng.integers(3)] for q in support}
        coeff = complex(rng.normal(), 0.0 if hermitian else rng.normal())
        terms.append((PauliString(n_qubits, letters), coeff))
    return PauliSum(n_qubits, terms)
