"""FCIDUMP writer (Molpro-style namelist, chemist-ordered integrals)."""

from __future__ import annotations

from pathlib import Path

__all__ = ["write_fcidump"]

_WRITE_TOL = 1e-16


def write_fcidump(path, h1, eri, n_orbitals, n_electrons, ms2, core_energy):
    """Write canonical (8-fold-unique) records only, 1-based indices."""
    n = n_orbitals
    lines = [
        f"&FCI NORB={n},NELEC={n_electrons},MS2={ms2},",
        " ORBSYM=" + "1," * n,
        " ISYM=1,",
        "&END",
    ]

    def rec(value, i, j, k, l):
        # shortest round-trip repr: the parsed tensor is bit-identical to
        # the computed one, so symmetry-zero cancellations survive
        lines.append(f" {float(value)!r} {i:4d} {j:4d} {k:4d} {l:4d}")

    for i in range(n):
        for j in range(i + 1):
            ij = i * (i + 1) // 2 + j
            for k in range(i + 1):
                for l in range(k + 1):
                    kl = k * (k + 1) // 2 + l
                    if kl > ij:
                        continue
                    v = eri[i, j, k, l]
                    if abs(v) > _WRITE_TOL:
                        rec(v, i + 1, j + 1, k + 1, l + 1)
    for i in range(n):
        for j in range(i + 1):
            v = h1[i, j]
            if abs(v) > _WRITE_TOL:
                rec(v, i + 1, j + 1, 0, 0)
    rec(core_energy, 0, 0, 0, 0)
    Path(path).write_text("\n".join(lines) + "\n")
