"""Geometry jobs: build integrals, run SCF + CASCI, emit FCIDUMP + oracle."""

from __future__ import annotations

import json
from dataclasses import dataclass, field
from pathlib import Path

import numpy as np

from .basis import ANGSTROM_TO_BOHR, ATOMIC_NUMBERS, build_basis
from .ci import active_space, casci
from .fcidump import write_fcidump
from .integrals import compute_all, nuclear_repulsion
from .scf import rhf

__all__ = ["GeometryJob", "generate", "generate_scan", "MOLECULES"]

H2O_ANGLE_DEG = 104.5

# molecule -> (basis, n_active_electrons, n_active_orbitals, n_core_orbitals)
MOLECULES = {
    "H2": ("sto-3g", 2, 2, 0),
    "LiH": ("sto-3g", 4, 6, 0),
    "H2O": ("6-31g", 6, 5, 2),
    "N2": ("sto-3g", 6, 6, 4),
}


@dataclass
class GeometryJob:
    molecule: str
    bond_length: float  # Angstrom
    basis: str = ""
    angle_deg: float = H2O_ANGLE_DEG
    n_active_electrons: int = 0
    n_active_orbitals: int = 0
    n_core_orbitals: int = 0
    out_dir: Path = field(default_factory=lambda: Path("."))

    def __post_init__(self):
        if self.molecule not in MOLECULES:
            raise ValueError(f"unknown molecule {self.molecule!r}")
        basis, ne, no, ncore = MOLECULES[self.molecule]
        self.basis = self.basis or basis
        self.n_active_electrons = self.n_active_electrons or ne
        self.n_active_orbitals = self.n_active_orbitals or no
        self.n_core_orbitals = self.n_core_orbitals or ncore
        self.out_dir = Path(self.out_dir)

    def atoms(self):
        r = self.bond_length * ANGSTROM_TO_BOHR
        if self.molecule == "H2":
            return [("H", np.zeros(3)), ("H", np.array([0.0, 0.0, r]))]
        if self.molecule == "LiH":
            return [("Li", np.zeros(3)), ("H", np.array([0.0, 0.0, r]))]
        if self.molecule == "N2":
            return [
                ("N", np.array([0.0, 0.0, -0.5 * r])),
                ("N", np.array([0.0, 0.0, 0.5 * r])),
            ]
        # H2O: symmetric stretch in the yz-plane, angle between the bonds
        half = np.deg2rad(self.angle_deg) / 2.0
        return [
            ("O", np.zeros(3)),
            ("H", np.array([0.0, r * np.sin(half), r * np.cos(half)])),
            ("H", np.array([0.0, -r * np.sin(half), r * np.cos(half)])),
        ]

    def stem(self) -> str:
        return f"{self.molecule.lower()}_r{self.bond_length:.2f}"


def _ao_symmetry_blocks(ao_info):
    """AO index groups with no symmetry coupling.

    Linear molecules sit on the z axis (px/py split off); H2O lies in
    the yz plane (px is the out-of-plane block).  Grouping degenerate
    orbitals by character keeps SCF orbitals symmetry-pure and the
    emitted integrals deterministic.
    """
    blocks: dict[str, list[int]] = {}
    for i, (_, char) in enumerate(ao_info):
        key = char if char in ("px", "py") else "rest"
        blocks.setdefault(key, []).append(i)
    return list(blocks.values())


def _h2o_blocks(ao_info):
    blocks: dict[str, list[int]] = {}
    for i, (_, char) in enumerate(ao_info):
        key = "px" if char == "px" else "rest"
        blocks.setdefault(key, []).append(i)
    return list(blocks.values())


def run_point(job: GeometryJob, dm0=None):
    """SCF + CASCI for one geometry; returns everything downstream needs."""
    atoms = job.atoms()
    shells, ao_info = build_basis(atoms, job.basis)
    atoms_zc = [(ATOMIC_NUMBERS[sym], xyz) for sym, xyz in atoms]
    S, T, V, eri = compute_all(shells, atoms_zc)
    hcore = T + V
    e_nuc = nuclear_repulsion(atoms_zc)
    n_electrons = sum(z for z, _ in atoms_zc)
    blocks = _h2o_blocks(ao_info) if job.molecule == "H2O" else _ao_symmetry_blocks(ao_info)
    scf = rhf(S, hcore, eri, n_electrons, e_nuc, dm0=dm0, ao_blocks=blocks)
    # mirror parities of the active MOs: one vector per out-of-axis block
    act = slice(job.n_core_orbitals, job.n_core_orbitals + job.n_active_orbitals)
    parities = []
    for bid in range(1, len(blocks)):
        par = np.where(scf.mo_blocks[act] == bid, -1.0, 1.0)
        if (par < 0).any():
            parities.append(par)
    h1_cas, eri_cas, e_core = active_space(
        hcore, eri, scf.mo_coeffs, e_nuc, job.n_core_orbitals,
        job.n_active_orbitals, mo_parities=parities,
    )
    n_alpha = job.n_active_electrons // 2
    cas = casci(h1_cas, eri_cas, job.n_active_orbitals, n_alpha,
                job.n_active_electrons - n_alpha, e_core)
    if cas.singlet_index < 0:
        raise RuntimeError(f"no singlet CASCI state for {job.stem()}")
    return scf, h1_cas, eri_cas, e_core, cas


def generate(job: GeometryJob, dm0=None):
    """Emit ``<stem>.fcidump`` and ``<stem>.oracle.json`` for one job."""
    scf, h1_cas, eri_cas, e_core, cas = run_point(job, dm0=dm0)
    job.out_dir.mkdir(parents=True, exist_ok=True)
    fcidump_path = job.out_dir / f"{job.stem()}.fcidump"
    oracle_path = job.out_dir / f"{job.stem()}.oracle.json"
    write_fcidump(
        fcidump_path,
        h1_cas,
        eri_cas,
        n_orbitals=job.n_active_orbitals,
        n_electrons=job.n_active_electrons,
        ms2=0,
        core_energy=e_core,
    )
    oracle = {
        "molecule": job.molecule,
        "bond_length_angstrom": job.bond_length,
        "basis": job.basis,
        "n_active_electrons": job.n_active_electrons,
        "n_active_orbitals": job.n_active_orbitals,
        "n_core_orbitals": job.n_core_orbitals,
        "e_hf": scf.energy,
        "e_casci": cas.e_singlet,
        "e_sector_lowest": cas.e_lowest,
        "s2_sector_lowest": cas.s2_lowest,
        "core_energy": e_core,
    }
    oracle_path.write_text(json.dumps(oracle, indent=2) + "\n")
    return fcidump_path, oracle_path, scf, cas


def generate_scan(molecule: str, r_values, out_dir, angle_deg: float = H2O_ANGLE_DEG):
    """Generate a bond-length series, chaining SCF guesses along the scan."""
    dm0 = None
    results = []
    for r in r_values:
        job = GeometryJob(molecule, float(r), angle_deg=angle_deg, out_dir=Path(out_dir))
        fc, orp, scf, cas = generate(job, dm0=dm0)
        dm0 = scf.density
        results.append((job, fc, orp, scf.energy, cas.e_singlet))
    return results
