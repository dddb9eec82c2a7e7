"""Gaussian basis-set data and shell construction.

Exponents and contraction coefficients are the published STO-3G and
6-31G values (Basis Set Exchange / GAMESS-US tables).  Coefficients
multiply normalized primitives; contracted functions are renormalized
when shells are instantiated.
"""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np

__all__ = ["Shell", "build_basis", "ATOMIC_NUMBERS", "ANGSTROM_TO_BOHR"]

ANGSTROM_TO_BOHR = 1.0 / 0.52917721092

ATOMIC_NUMBERS = {"H": 1, "Li": 3, "N": 7, "O": 8}

# element -> list of (l, exponents, coefficients)
_BASIS_DATA: dict[str, dict[str, list]] = {
    "sto-3g": {
        "H": [
            (0, [3.425250914, 0.6239137298, 0.1688554040],
                [0.1543289673, 0.5353281423, 0.4446345422]),
        ],
        "Li": [
            (0, [16.11957475, 2.936200663, 0.7946504870],
                [0.1543289673, 0.5353281423, 0.4446345422]),
            (0, [0.6362897469, 0.1478600533, 0.04808867840],
                [-0.09996722919, 0.3995128261, 0.7001154689]),
            (1, [0.6362897469, 0.1478600533, 0.04808867840],
                [0.1559162750, 0.6076837186, 0.3919573931]),
        ],
        "N": [
            (0, [99.10616896, 18.05231239, 4.885660238],
                [0.1543289673, 0.5353281423, 0.4446345422]),
            (0, [3.780455879, 0.8784966449, 0.2857143744],
                [-0.09996722919, 0.3995128261, 0.7001154689]),
            (1, [3.780455879, 0.8784966449, 0.2857143744],
                [0.1559162750, 0.6076837186, 0.3919573931]),
        ],
        "O": [
            (0, [130.7093214, 23.80886605, 6.443608313],
                [0.1543289673, 0.5353281423, 0.4446345422]),
            (0, [5.033151319, 1.169596125, 0.3803889600],
                [-0.09996722919, 0.3995128261, 0.7001154689]),
            (1, [5.033151319, 1.169596125, 0.3803889600],
                [0.1559162750, 0.6076837186, 0.3919573931]),
        ],
    },
    "6-31g": {
        "H": [
            (0, [18.73113696, 2.825394365, 0.6401216923],
                [0.03349460434, 0.2347269535, 0.8137573261]),
            (0, [0.1612777588], [1.0]),
        ],
        "O": [
            (0, [5484.671660, 825.2349460, 188.0469580, 52.96450000,
                 16.89757040, 5.799635340],
                [0.001831074430, 0.01395017220, 0.06844507810, 0.2327143360,
                 0.4701928980, 0.3585208530]),
            (0, [15.53961625, 3.599933586, 1.013761750],
                [-0.1107775495, -0.1480262627, 1.130767015]),
            (1, [15.53961625, 3.599933586, 1.013761750],
                [0.07087426823, 0.3397528391, 0.7271585773]),
            (0, [0.2700058226], [1.0]),
            (1, [0.2700058226], [1.0]),
        ],
    },
}

# cartesian power triples per angular momentum, in AO order
_CARTESIANS = {
    0: [(0, 0, 0)],
    1: [(1, 0, 0), (0, 1, 0), (0, 0, 1)],
}

_AO_CHARACTER = {
    (0, 0, 0): "s",
    (1, 0, 0): "px",
    (0, 1, 0): "py",
    (0, 0, 1): "pz",
}


def _double_factorial(n: int) -> int:
    out = 1
    while n > 1:
        out *= n
        n -= 2
    return out


def _primitive_norm(alpha: float, powers) -> float:
    lx, ly, lz = powers
    l = lx + ly + lz
    num = (2.0 * alpha / np.pi) ** 0.75 * (4.0 * alpha) ** (l / 2.0)
    den = np.sqrt(
        _double_factorial(2 * lx - 1)
        * _double_factorial(2 * ly - 1)
        * _double_factorial(2 * lz - 1)
    )
    return num / den


@dataclass
class Shell:
    """One contracted shell: all cartesian components share exponents."""

    l: int
    center: np.ndarray
    exps: np.ndarray
    coefs: np.ndarray  # includes primitive norms; contracted-normalized
    atom_index: int = 0
    ao_offset: int = 0

    @property
    def n_components(self) -> int:
        return len(_CARTESIANS[self.l])

    def cartesian_powers(self):
        return _CARTESIANS[self.l]


def _contracted_self_overlap(l: int, exps: np.ndarray, coefs: np.ndarray) -> float:
    # overlap of the contracted function with itself, first component
    lx, ly, lz = _CARTESIANS[l][0]
    s = 0.0
    for ai, ci in zip(exps, coefs):
        for aj, cj in zip(exps, coefs):
            p = ai + aj
            pref = (np.pi / p) ** 1.5 / (2.0 * p) ** (lx + ly + lz)
            s += (
                ci * cj * pref
                * _double_factorial(2 * lx - 1)
                * _double_factorial(2 * ly - 1)
                * _double_factorial(2 * lz - 1)
            )
    return s


def build_basis(atoms, basis_name: str):
    """Build shells for ``atoms`` = [(symbol, xyz_bohr), ...].

    Returns (shells, ao_info) where ao_info[i] = (atom_index, character)
    for each atomic orbital, e.g. character 'px'.
    """
    key = basis_name.lower()
    if key not in _BASIS_DATA:
        raise ValueError(f"unknown basis {basis_name!r}")
    table = _BASIS_DATA[key]
    shells: list[Shell] = []
    ao_info: list[tuple[int, str]] = []
    offset = 0
    for atom_index, (symbol, xyz) in enumerate(atoms):
        if symbol not in table:
            raise ValueError(f"basis {basis_name!r} lacks element {symbol}")
        for l, exps, coefs in table[symbol]:
            exps = np.asarray(exps, dtype=float)
            coefs = np.asarray(coefs, dtype=float)
            # scale by primitive norms (first cartesian component; all
            # components of one shell share the same normalization)
            norms = np.array(
                [_primitive_norm(a, _CARTESIANS[l][0]) for a in exps]
            )
            scaled = coefs * norms
            self_ov = _contracted_self_overlap(l, exps, scaled)
            scaled = scaled / np.sqrt(self_ov)
            shell = Shell(
                l=l,
                center=np.asarray(xyz, dtype=float),
                exps=exps,
                coefs=scaled,
                atom_index=atom_index,
                ao_offset=offset,
            )
            shells.append(shell)
            for powers in shell.cartesian_powers():
                ao_info.append((atom_index, _AO_CHARACTER[powers]))
            offset += shell.n_components
    return shells, ao_info
