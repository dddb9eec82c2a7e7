"""Restricted Hartree-Fock with DIIS and symmetry-pure final orbitals."""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np
import scipy.linalg

__all__ = ["ScfResult", "rhf", "ScfNotConverged"]


class ScfNotConverged(RuntimeError):
    pass


@dataclass
class ScfResult:
    energy: float
    mo_energies: np.ndarray
    mo_coeffs: np.ndarray  # columns are MOs
    density: np.ndarray  # total (doubly-occupied) AO density
    fock: np.ndarray
    n_occ: int
    mo_blocks: np.ndarray | None = None  # symmetry-block id per MO


def _fock_matrix(hcore, eri, P):
    J = np.einsum("ijkl,kl->ij", eri, P, optimize=True)
    K = np.einsum("ikjl,kl->ij", eri, P, optimize=True)
    return hcore + J - 0.5 * K


def _blocked_eigh(F, S, ao_blocks, nao):
    """Generalized eigenproblem solved per symmetry block.

    Blocks are lists of AO indices with (by symmetry) no F or S coupling
    between them; solving per block pins degenerate orbitals to pure
    characters instead of arbitrary mixtures.
    """
    eps = np.empty(nao)
    C = np.zeros((nao, nao))
    blocks = np.empty(nao, dtype=int)
    col = 0
    for bid, block in enumerate(ao_blocks):
        idx = np.asarray(block, dtype=int)
        e, v = scipy.linalg.eigh(F[np.ix_(idx, idx)], S[np.ix_(idx, idx)])
        for i in range(e.size):
            eps[col] = e[i]
            C[idx, col] = v[:, i]
            blocks[col] = bid
            col += 1
    order = np.argsort(eps, kind="stable")
    return eps[order], C[:, order], blocks[order]


def _fix_signs(C: np.ndarray) -> np.ndarray:
    C = C.copy()
    for j in range(C.shape[1]):
        i = int(np.argmax(np.abs(C[:, j])))
        if C[i, j] < 0:
            C[:, j] = -C[:, j]
    return C


def rhf(
    S: np.ndarray,
    hcore: np.ndarray,
    eri: np.ndarray,
    n_electrons: int,
    e_nuc: float,
    dm0: np.ndarray | None = None,
    ao_blocks=None,
    max_cycle: int = 300,
    conv_tol: float = 1e-11,
) -> ScfResult:
    """Closed-shell SCF.  ``dm0`` warm-starts stretched geometries."""
    if n_electrons % 2:
        raise ValueError("rhf requires an even electron count")
    nao = S.shape[0]
    n_occ = n_electrons // 2
    ao_blocks = ao_blocks or [list(range(nao))]

    if dm0 is None:
        # generalized Wolfsberg-Helmholz guess; plain hcore tends to
        # symmetry-break degenerate shells of diatomics
        hdiag = np.diag(hcore)
        F0 = 0.875 * S * (hdiag[:, None] + hdiag[None, :])
        np.fill_diagonal(F0, hdiag)
        eps, C, _ = _blocked_eigh(F0, S, ao_blocks, nao)
        P = 2.0 * C[:, :n_occ] @ C[:, :n_occ].T
    else:
        P = dm0.copy()

    diis_focks: list[np.ndarray] = []
    diis_errs: list[np.ndarray] = []
    e_old = 0.0
    F = hcore
    for cycle in range(max_cycle):
        F = _fock_matrix(hcore, eri, P)
        err = F @ P @ S - S @ P @ F
        diis_focks.append(F)
        diis_errs.append(err.ravel())
        if len(diis_focks) > 8:
            diis_focks.pop(0)
            diis_errs.pop(0)
        if len(diis_focks) > 1:
            m = len(diis_focks)
            B = -np.ones((m + 1, m + 1))
            B[m, m] = 0.0
            for i in range(m):
                for j in range(m):
                    B[i, j] = diis_errs[i] @ diis_errs[j]
            rhs = np.zeros(m + 1)
            rhs[m] = -1.0
            try:
                w = np.linalg.solve(B, rhs)[:m]
                F = sum(wi * Fi for wi, Fi in zip(w, diis_focks))
            except np.linalg.LinAlgError:
                pass
        eps, C, _ = _blocked_eigh(F, S, ao_blocks, nao)
        P_new = 2.0 * C[:, :n_occ] @ C[:, :n_occ].T
        e_elec = 0.5 * np.einsum("ij,ij->", P_new, hcore + _fock_matrix(hcore, eri, P_new))
        delta_e = abs(e_elec - e_old)
        delta_p = np.abs(P_new - P).max()
        P = P_new
        e_old = e_elec
        if delta_e < conv_tol and delta_p < 1e-8 and cycle > 1:
            break
    else:
        raise ScfNotConverged(
            f"SCF not converged in {max_cycle} cycles (dE={delta_e:.2e})"
        )

    F = _fock_matrix(hcore, eri, P)
    eps, C, mo_blocks = _blocked_eigh(F, S, ao_blocks, nao)
    C = _fix_signs(C)
    e_total = float(0.5 * np.einsum("ij,ij->", P, hcore + F) + e_nuc)
    return ScfResult(
        energy=e_total,
        mo_energies=eps,
        mo_coeffs=C,
        density=P,
        fock=F,
        n_occ=n_occ,
        mo_blocks=mo_blocks,
    )
