"""Active-space reduction and determinant-basis CASCI.

The CI is built with Slater-Condon rules over spin-orbital determinants
(bitmask encoded, alpha block first), which keeps it independent of any
qubit-space machinery and therefore usable as an oracle against it.
"""

from __future__ import annotations

from dataclasses import dataclass
from itertools import combinations

import numpy as np
import scipy.linalg

__all__ = ["active_space", "CasResult", "casci"]


def active_space(
    hcore, eri, C, e_nuc, n_core: int, n_cas: int,
    mo_parities=None, integral_drop_tol: float = 1e-8,
):
    """Fold doubly-occupied core orbitals into effective integrals.

    Returns (h1_cas, eri_cas, e_core) with chemist-ordered eri_cas and
    e_core containing the nuclear repulsion plus frozen-core energy.

    ``mo_parities`` is an optional list of +-1 vectors over the active
    MOs, one per mirror symmetry of the molecule.  Integrals whose
    parity product is odd under any mirror vanish exactly; the dense
    transform only reproduces that to ~1e-13, so they are zeroed
    explicitly to keep emitted integrals symmetry-clean.

    ``integral_drop_tol`` zeroes remaining near-zero integrals (the
    customary FCIDUMP dump tolerance); finite SCF convergence otherwise
    leaves ~1e-9 junk in elements that higher molecular symmetries
    (e.g. inversion) force to vanish.  The CASCI oracle downstream uses
    the cleaned integrals, so the emitted file and its reference stay
    exactly consistent.
    """
    C_core = C[:, :n_core]
    C_act = C[:, n_core : n_core + n_cas]
    P_core = 2.0 * C_core @ C_core.T
    J = np.einsum("ijkl,kl->ij", eri, P_core, optimize=True)
    K = np.einsum("ikjl,kl->ij", eri, P_core, optimize=True)
    veff = J - 0.5 * K
    e_core = float(e_nuc + np.einsum("ij,ij->", P_core, hcore + 0.5 * veff))
    h1_cas = C_act.T @ (hcore + veff) @ C_act
    eri_cas = np.einsum(
        "ijkl,ip,jq,kr,ls->pqrs", eri, C_act, C_act, C_act, C_act, optimize=True
    )
    # canonical mirroring makes the 8-fold symmetry exact
    eri_cas = (
        eri_cas
        + eri_cas.transpose(1, 0, 2, 3)
        + eri_cas.transpose(0, 1, 3, 2)
        + eri_cas.transpose(1, 0, 3, 2)
        + eri_cas.transpose(2, 3, 0, 1)
        + eri_cas.transpose(3, 2, 0, 1)
        + eri_cas.transpose(2, 3, 1, 0)
        + eri_cas.transpose(3, 2, 1, 0)
    ) / 8.0
    h1_cas = 0.5 * (h1_cas + h1_cas.T)
    if mo_parities:
        for par in mo_parities:
            par = np.asarray(par, dtype=float)
            odd1 = par[:, None] * par[None, :] < 0
            if (np.abs(h1_cas[odd1]) > 1e-8).any():
                raise ValueError("parity cleaning would remove a large h1 element")
            h1_cas[odd1] = 0.0
            odd2 = (
                par[:, None, None, None]
                * par[None, :, None, None]
                * par[None, None, :, None]
                * par[None, None, None, :]
            ) < 0
            if (np.abs(eri_cas[odd2]) > 1e-8).any():
                raise ValueError("parity cleaning would remove a large eri element")
            eri_cas[odd2] = 0.0
    if integral_drop_tol > 0.0:
        h1_cas[np.abs(h1_cas) <= integral_drop_tol] = 0.0
        eri_cas[np.abs(eri_cas) <= integral_drop_tol] = 0.0
    return h1_cas, eri_cas, e_core


def _apply_ladder(mask: int, ops) -> tuple[int, int] | None:
    """Apply a†/a sequence (rightmost first) to a determinant bitmask."""
    sign = 1
    for idx, dag in reversed(ops):
        bit = 1 << idx
        occupied = bool(mask & bit)
        if dag == occupied:
            return None
        if (mask & (bit - 1)).bit_count() & 1:
            sign = -sign
        mask ^= bit
    return mask, sign


def _single_sign(mask: int, p: int, q: int) -> int:
    """Sign of replacing occupied p by empty q in an ordered determinant."""
    lo, hi = (p, q) if p < q else (q, p)
    between = mask & ((1 << hi) - 1) & ~((1 << (lo + 1)) - 1)
    return -1 if between.bit_count() & 1 else 1


@dataclass
class CasResult:
    e_lowest: float
    s2_lowest: float
    e_singlet: float
    singlet_index: int
    energies: np.ndarray
    s2_values: np.ndarray


def _spin_orbital_integrals(h1, eri, n):
    """Expand spatial integrals to blocked spin-orbitals (alpha first)."""
    n_so = 2 * n
    h = np.zeros((n_so, n_so))
    h[:n, :n] = h1
    h[n:, n:] = h1
    g = np.zeros((n_so,) * 4)
    for sa in (0, 1):
        for sb in (0, 1):
            sl_a = slice(sa * n, sa * n + n)
            sl_b = slice(sb * n, sb * n + n)
            g[sl_a, sl_a, sl_b, sl_b] = eri
    return h, g


def casci(h1, eri, n_cas: int, n_alpha: int, n_beta: int, e_core: float = 0.0) -> CasResult:
    """Dense determinant CI in the (n_alpha, n_beta) sector.

    Returns all eigenvalues with per-state <S^2>; ``e_singlet`` is the
    lowest eigenvalue whose <S^2> vanishes below 1e-6.
    """
    n = n_cas
    n_so = 2 * n
    h, g = _spin_orbital_integrals(h1, eri, n)

    alpha_strings = [sum(1 << i for i in occ) for occ in combinations(range(n), n_alpha)]
    beta_strings = [sum(1 << i for i in occ) for occ in combinations(range(n), n_beta)]
    dets = [a | (b << n) for a in alpha_strings for b in beta_strings]
    index = {d: i for i, d in enumerate(dets)}
    dim = len(dets)

    occ_lists = [tuple(i for i in range(n_so) if d >> i & 1) for d in dets]

    H = np.zeros((dim, dim))
    for I, (d, occ) in enumerate(zip(dets, occ_lists)):
        # diagonal
        e = sum(h[p, p] for p in occ)
        for ai, p in enumerate(occ):
            for q in occ[:ai]:
                e += g[p, p, q, q] - g[p, q, q, p]
        H[I, I] = e
        # singles and doubles reachable from d (upper triangle only)
        virt = [q for q in range(n_so) if not (d >> q & 1)]
        for p in occ:
            for q in virt:
                if (p < n) != (q < n):
                    continue  # spin-preserving
                d1 = d ^ (1 << p) ^ (1 << q)
                J = index.get(d1)
                if J is not None and J > I:
                    sign = _single_sign(d, p, q)
                    val = h[p, q]
                    for r in occ:
                        if r != p:
                            val += g[p, q, r, r] - g[p, r, r, q]
                    H[I, J] = H[J, I] = sign * val
        for ai in range(len(occ)):
            for bi in range(ai):
                p, q = occ[ai], occ[bi]  # q < p
                for ci in range(len(virt)):
                    for di in range(ci):
                        r, s = virt[ci], virt[di]  # s < r
                        # Sz conservation
                        sz_removed = (p < n) + (q < n)
                        sz_added = (r < n) + (s < n)
                        if sz_removed != sz_added:
                            continue
                        d2 = d ^ (1 << p) ^ (1 << q) ^ (1 << r) ^ (1 << s)
                        J = index.get(d2)
                        if J is None or J <= I:
                            continue
                        # amplitude of a†_r a†_s a_q a_p acting on |d>
                        res = _apply_ladder(d, ((r, 1), (s, 1), (q, 0), (p, 0)))
                        assert res is not None and res[0] == d2
                        sign = res[1]
                        val = g[r, p, s, q] - g[r, q, s, p]
                        H[I, J] = H[J, I] = sign * val
    vals, vecs = scipy.linalg.eigh(H)

    # S^2 = S-S+ + Sz(Sz+1) applied determinant-wise
    S2 = np.zeros((dim, dim))
    sz = 0.5 * (n_alpha - n_beta)
    for I, d in enumerate(dets):
        S2[I, I] += sz * (sz + 1.0)
        for p in range(n):
            for q in range(n):
                # a†_{q beta} a_{q alpha} a†_{p alpha} a_{p beta}
                ops = ((q + n, 1), (q, 0), (p, 1), (p + n, 0))
                res = _apply_ladder(d, ops)
                if res is not None:
                    d2, sign = res
                    S2[index[d2], I] += sign
    s2_diag = np.einsum("ij,ik,kj->j", vecs, S2, vecs, optimize=True)

    singlet_index = -1
    for i in range(dim):
        if abs(s2_diag[i]) < 1e-6:
            singlet_index = i
            break
    # sectors with ms != 0 legitimately contain no singlet
    e_singlet = float(vals[singlet_index] + e_core) if singlet_index >= 0 else float("nan")
    return CasResult(
        e_lowest=float(vals[0] + e_core),
        s2_lowest=float(s2_diag[0]),
        e_singlet=e_singlet,
        singlet_index=singlet_index,
        energies=vals + e_core,
        s2_values=s2_diag,
    )
