"""McMurchie-Davidson evaluation of Gaussian one- and two-electron integrals.

Cartesian Gaussian products are expanded in Hermite Gaussians; Coulomb
kernels reduce to Boys functions.  Everything is vectorized over
primitive pairs, which is plenty for the s/p basis sets used here.
"""

from __future__ import annotations

import numpy as np
from scipy.special import hyp1f1

from .basis import Shell

__all__ = ["compute_all", "nuclear_repulsion"]


def _boys(m_max: int, T: np.ndarray) -> list[np.ndarray]:
    T = np.asarray(T, dtype=float)
    return [hyp1f1(m + 0.5, m + 1.5, -T) / (2.0 * m + 1.0) for m in range(m_max + 1)]


class _PairData:
    """Hermite expansion data for one ordered shell pair."""

    __slots__ = ("la", "lb", "p", "P", "cc", "E", "lmax")

    def __init__(self, sa: Shell, sb: Shell):
        a = sa.exps[:, None]
        b = sb.exps[None, :]
        self.la, self.lb = sa.l, sb.l
        p = (a + b).ravel()
        mu = (a * b / (a + b)).ravel()
        self.p = p
        self.cc = (sa.coefs[:, None] * sb.coefs[None, :]).ravel()
        AB = sa.center - sb.center
        self.P = (
            (a[..., None] * sa.center + b[..., None] * sb.center) / (a + b)[..., None]
        ).reshape(-1, 3)
        self.lmax = self.la + self.lb
        # E[dim][(i, j, t)] -> array over primitive pairs
        self.E = []
        for dim in range(3):
            xab = AB[dim]
            xpa = self.P[:, dim] - sa.center[dim]
            xpb = self.P[:, dim] - sb.center[dim]
            e: dict[tuple, np.ndarray] = {}
            e[(0, 0, 0)] = np.exp(-mu * xab * xab)
            one_over_2p = 0.5 / p

            def get(i, j, t, e=e):
                if t < 0 or t > i + j or i < 0 or j < 0:
                    return 0.0
                return e[(i, j, t)]

            for i in range(self.la + 1):
                for j in range(self.lb + 1):
                    if i == 0 and j == 0:
                        continue
                    for t in range(i + j + 1):
                        if j == 0:
                            val = (
                                one_over_2p * get(i - 1, j, t - 1)
                                + xpa * get(i - 1, j, t)
                                + (t + 1) * get(i - 1, j, t + 1)
                            )
                        else:
                            val = (
                                one_over_2p * get(i, j - 1, t - 1)
                                + xpb * get(i, j - 1, t)
                                + (t + 1) * get(i, j - 1, t + 1)
                            )
                        e[(i, j, t)] = np.asarray(val)
            self.E.append(e)

    def hermite_coeffs(self, pa, pb):
        """[(t, u, v, coeff-array)] for component powers pa, pb."""
        out = []
        for t in range(pa[0] + pb[0] + 1):
            ex = self.E[0].get((pa[0], pb[0], t))
            if ex is None:
                continue
            for u in range(pa[1] + pb[1] + 1):
                ey = self.E[1].get((pa[1], pb[1], u))
                if ey is None:
                    continue
                exy = ex * ey
                for v in range(pa[2] + pb[2] + 1):
                    ez = self.E[2].get((pa[2], pb[2], v))
                    if ez is None:
                        continue
                    out.append((t, u, v, exy * ez))
        return out


def _hermite_coulomb(lmax: int, p: np.ndarray, PC: np.ndarray, F: list[np.ndarray]):
    """R_{tuv} arrays (Hermite Coulomb integrals) up to total order lmax."""
    memo: dict[tuple, np.ndarray] = {}

    def R(n, t, u, v):
        if t < 0 or u < 0 or v < 0:
            return 0.0
        key = (n, t, u, v)
        val = memo.get(key)
        if val is not None:
            return val
        if t == u == v == 0:
            val = ((-2.0 * p) ** n) * F[n]
        elif t > 0:
            val = (t - 1) * R(n + 1, t - 2, u, v) + PC[..., 0] * R(n + 1, t - 1, u, v)
        elif u > 0:
            val = (u - 1) * R(n + 1, t, u - 2, v) + PC[..., 1] * R(n + 1, t, u - 1, v)
        else:
            val = (v - 1) * R(n + 1, t, u, v - 2) + PC[..., 2] * R(n + 1, t, u, v - 1)
        val = np.asarray(val)
        memo[key] = val
        return val

    out = {}
    for t in range(lmax + 1):
        for u in range(lmax + 1 - t):
            for v in range(lmax + 1 - t - u):
                out[(t, u, v)] = R(0, t, u, v)
    return out


def _overlap_kinetic_block(sa: Shell, sb: Shell):
    a = sa.exps[:, None]
    b = sb.exps[None, :]
    p = (a + b).ravel()
    cc = (sa.coefs[:, None] * sb.coefs[None, :]).ravel()
    pref = (np.pi / p) ** 1.5

    # 1D overlaps s[dim][(i, j)] including extended j needed by kinetic
    ext = _PairDataExt(sa, sb)

    na, nb = sa.n_components, sb.n_components
    S = np.zeros((na, nb))
    T = np.zeros((na, nb))
    bexp = np.tile(sb.exps, len(sa.exps))  # matches flattened pair order
    for ia, pa in enumerate(sa.cartesian_powers()):
        for ib, pb in enumerate(sb.cartesian_powers()):
            s_dims = [ext.s1d(dim, pa[dim], pb[dim]) for dim in range(3)]
            S[ia, ib] = float(np.sum(cc * pref * s_dims[0] * s_dims[1] * s_dims[2]))
            t_total = 0.0
            for dim in range(3):
                j = pb[dim]
                tj = (
                    -2.0 * bexp**2 * ext.s1d(dim, pa[dim], j + 2)
                    + bexp * (2 * j + 1) * ext.s1d(dim, pa[dim], j)
                    - 0.5 * j * (j - 1) * ext.s1d(dim, pa[dim], j - 2)
                )
                rest = [ext.s1d(d, pa[d], pb[d]) for d in range(3) if d != dim]
                t_total += float(np.sum(cc * pref * tj * rest[0] * rest[1]))
            T[ia, ib] = t_total
    return S, T


class _PairDataExt:
    """1D Hermite E-coefficients with extended angular range for kinetic."""

    def __init__(self, sa: Shell, sb: Shell):
        a = sa.exps[:, None]
        b = sb.exps[None, :]
        self.p = (a + b).ravel()
        mu = (a * b / (a + b)).ravel()
        AB = sa.center - sb.center
        P = (
            (a[..., None] * sa.center + b[..., None] * sb.center) / (a + b)[..., None]
        ).reshape(-1, 3)
        self.e = []
        for dim in range(3):
            xab = AB[dim]
            xpa = P[:, dim] - sa.center[dim]
            xpb = P[:, dim] - sb.center[dim]
            e: dict[tuple, np.ndarray] = {(0, 0, 0): np.exp(-mu * xab * xab)}
            one_over_2p = 0.5 / self.p

            def get(i, j, t, e=e):
                if t < 0 or t > i + j or i < 0 or j < 0:
                    return 0.0
                return e.get((i, j, t), 0.0)

            for i in range(sa.l + 1):
                for j in range(sb.l + 3):
                    if i == 0 and j == 0:
                        continue
                    for t in range(i + j + 1):
                        if j == 0:
                            val = (
                                one_over_2p * get(i - 1, j, t - 1)
                                + xpa * get(i - 1, j, t)
                                + (t + 1) * get(i - 1, j, t + 1)
                            )
                        else:
                            val = (
                                one_over_2p * get(i, j - 1, t - 1)
                                + xpb * get(i, j - 1, t)
                                + (t + 1) * get(i, j - 1, t + 1)
                            )
                        e[(i, j, t)] = np.asarray(val)
            self.e.append(e)

    def s1d(self, dim, i, j):
        if i < 0 or j < 0:
            return 0.0
        return self.e[dim].get((i, j, 0), 0.0)


def _nuclear_block(sa: Shell, sb: Shell, atoms_zc):
    pair = _PairData(sa, sb)
    na, nb = sa.n_components, sb.n_components
    V = np.zeros((na, nb))
    pref = 2.0 * np.pi / pair.p
    for Z, C in atoms_zc:
        PC = pair.P - C[None, :]
        T = pair.p * (PC**2).sum(axis=1)
        F = _boys(pair.lmax, T)
        R = _hermite_coulomb(pair.lmax, pair.p, PC, F)
        for ia, pa in enumerate(sa.cartesian_powers()):
            for ib, pb in enumerate(sb.cartesian_powers()):
                acc = 0.0
                for t, u, v, coeff in pair.hermite_coeffs(pa, pb):
                    acc += float(np.sum(pair.cc * pref * coeff * R[(t, u, v)]))
                V[ia, ib] += -Z * acc
    return V


def _eri_block(pair_ab: _PairData, pair_cd: _PairData, comps_ab, comps_cd):
    """Contracted ERIs for one shell-pair quartet.

    Returns array [n_comp_ab, n_comp_cd] of (ab|cd) values.
    """
    p = pair_ab.p[:, None]
    q = pair_cd.p[None, :]
    alpha = p * q / (p + q)
    PQ = pair_ab.P[:, None, :] - pair_cd.P[None, :, :]
    T = alpha * (PQ**2).sum(axis=2)
    lmax = pair_ab.lmax + pair_cd.lmax
    F = _boys(lmax, T)
    R = _hermite_coulomb(lmax, alpha, PQ, F)
    pref = 2.0 * np.pi**2.5 / (p * q * np.sqrt(p + q))
    ccw = pair_ab.cc[:, None] * pair_cd.cc[None, :] * pref

    out = np.zeros((len(comps_ab), len(comps_cd)))
    herm_ab = [pair_ab.hermite_coeffs(pa, pb) for pa, pb in comps_ab]
    herm_cd = [pair_cd.hermite_coeffs(pc, pd) for pc, pd in comps_cd]
    for ia, bra in enumerate(herm_ab):
        for ic, ket in enumerate(herm_cd):
            acc = 0.0
            for t, u, v, cb in bra:
                for tt, uu, vv, ck in ket:
                    sign = -1.0 if (tt + uu + vv) % 2 else 1.0
                    acc += sign * float(
                        np.sum(ccw * cb[:, None] * ck[None, :] * R[(t + tt, u + uu, v + vv)])
                    )
            out[ia, ic] = acc
    return out


def nuclear_repulsion(atoms_zc) -> float:
    """atoms_zc = [(Z, xyz_bohr_array), ...]"""
    e = 0.0
    for i, (zi, ci) in enumerate(atoms_zc):
        for zj, cj in atoms_zc[:i]:
            e += zi * zj / np.linalg.norm(ci - cj)
    return e


def compute_all(shells: list[Shell], atoms_zc):
    """Compute (S, T, V, ERI) over all atomic orbitals.

    ``atoms_zc`` pairs nuclear charge with position (Bohr).  The ERI
    tensor is chemist-ordered, (ij|kl), with exact 8-fold symmetry.
    """
    nao = sum(s.n_components for s in shells)
    S = np.zeros((nao, nao))
    T = np.zeros((nao, nao))
    V = np.zeros((nao, nao))
    for a, sa in enumerate(shells):
        for sb in shells[: a + 1]:
            sblk, tblk = _overlap_kinetic_block(sa, sb)
            vblk = _nuclear_block(sa, sb, atoms_zc)
            oa, ob = sa.ao_offset, sb.ao_offset
            na, nb = sa.n_components, sb.n_components
            S[oa : oa + na, ob : ob + nb] = sblk
            T[oa : oa + na, ob : ob + nb] = tblk
            V[oa : oa + na, ob : ob + nb] = vblk
            if sa is not sb:
                S[ob : ob + nb, oa : oa + na] = sblk.T
                T[ob : ob + nb, oa : oa + na] = tblk.T
                V[ob : ob + nb, oa : oa + na] = vblk.T

    eri = np.zeros((nao, nao, nao, nao))
    pairs = []
    for a, sa in enumerate(shells):
        for sb in shells[: a + 1]:
            pairs.append((sa, sb, _PairData(sa, sb)))
    for ip, (sa, sb, pab) in enumerate(pairs):
        comps_ab = [(pa, pb) for pa in sa.cartesian_powers() for pb in sb.cartesian_powers()]
        for sc, sd, pcd in pairs[: ip + 1]:
            comps_cd = [(pc, pd) for pc in sc.cartesian_powers() for pd in sd.cartesian_powers()]
            block = _eri_block(pab, pcd, comps_ab, comps_cd)
            for ja, pa in enumerate(sa.cartesian_powers()):
                for jb, pb in enumerate(sb.cartesian_powers()):
                    row = ja * sb.n_components + jb
                    i = sa.ao_offset + ja
                    j = sb.ao_offset + jb
                    for jc, pc in enumerate(sc.cartesian_powers()):
                        for jd, pd in enumerate(sd.cartesian_powers()):
                            col = jc * sd.n_components + jd
                            k = sc.ao_offset + jc
                            l = sd.ao_offset + jd
                            v = block[row, col]
                            eri[i, j, k, l] = v
                            eri[j, i, k, l] = v
                            eri[i, j, l, k] = v
                            eri[j, i, l, k] = v
                            eri[k, l, i, j] = v
                            eri[l, k, i, j] = v
                            eri[k, l, j, i] = v
                            eri[l, k, j, i] = v
    return S, T, V, eri
