"""Benchmark harness: single points, bond scans, error tables.

All energies are Hartree internally; kcal/mol appears only at the
emission boundary.  The exact reference for errors is the lowest
*singlet* eigenstate of the unpenalized Hamiltonian (the spin penalty is
a solver aid, not part of the physics); reported method energies are
likewise unpenalized expectations in the optimized state.
"""

from __future__ import annotations

import configparser
import io
import json
from concurrent.futures import ProcessPoolExecutor
from dataclasses import asdict, dataclass
from pathlib import Path
import numpy as np

from .dressing import FtConfig, dressed_state, run_adapt_ft
from .fermion import (
    build_hamiltonian,
    hf_occupations,
    make_pool,
    parse_fcidump,
    penalized_hamiltonian,
    s_squared,
)
from .pauli import PauliSum
from .solver import SolverConfig, run as run_adaptive
from .statevector import (
    ReferenceState,
    expectation,
    lowest_eigenpairs,
    rayleigh_quotient,
)

__all__ = [
    "KCAL_PER_HARTREE",
    "MethodSpec",
    "ScanSpec",
    "GeometryResult",
    "ScanResult",
    "singlet_reference_energy",
    "run_point",
    "run_scan",
    "emit",
    "parse_result",
    "load_scan_config",
]

KCAL_PER_HARTREE = 627.509474

_FLAVOR_ALIASES = {
    "f": "fermionic",
    "q": "qubit_excitation",
    "p": "pauli_string",
    "fermionic": "fermionic",
    "qubit_excitation": "qubit_excitation",
    "pauli_string": "pauli_string",
}

METHOD_KINDS = ("hf", "adapt", "adaft", "adapt_ft", "exact")


@dataclass(frozen=True)
class MethodSpec:
    """Which solver to run at each geometry, and with what knobs."""

    kind: str = "adaft"
    flavor: str = "fermionic"
    epsilon: float = 1e-3
    d: int = 1
    k: int = 5
    m: int = 1
    mu: float = 0.5
    max_iterations: int = 300
    gradient_norm_tol: float = 1e-8
    max_evaluations: int = 20000
    simplify_threshold: float = 1e-12
    term_cap: int = 200_000
    threads: int = 1
    convergence_metric: str = "delta_h"
    bake_symbolic: bool = True

    def __post_init__(self):
        if self.kind not in METHOD_KINDS:
            raise ValueError(f"unknown method kind {self.kind!r}")
        flavor = _FLAVOR_ALIASES.get(self.flavor)
        if flavor is None:
            raise ValueError(f"unknown pool flavor {self.flavor!r}")
        object.__setattr__(self, "flavor", flavor)

    def label(self) -> str:
        tag = {"fermionic": "f", "qubit_excitation": "q", "pauli_string": "p"}[self.flavor]
        if self.kind == "hf":
            return "HF"
        if self.kind == "exact":
            return "exact"
        if self.kind == "adapt_ft":
            return f"{tag}-ADAPT-FT({self.k},{self.d},{self.m})"
        return f"{tag}-{self.kind.upper()}(eps={self.epsilon:g},d={self.d})"

    def solver_config(self) -> SolverConfig:
        return SolverConfig(
            epsilon=self.epsilon,
            d=self.d,
            max_iterations=self.max_iterations,
            gradient_norm_tol=self.gradient_norm_tol,
            max_evaluations=self.max_evaluations,
            pool_flavor=self.flavor,
            mu=self.mu,
            threads=self.threads,
            convergence_metric=self.convergence_metric,
        )

    def ft_config(self) -> FtConfig:
        return FtConfig(
            k=self.k,
            d=self.d,
            m=self.m,
            pool_flavor=self.flavor,
            simplify_threshold=self.simplify_threshold,
            term_cap=self.term_cap,
            solver=self.solver_config(),
            bake_symbolic=self.bake_symbolic,
        )


@dataclass(frozen=True)
class ScanSpec:
    molecule: str
    geometries: tuple[tuple[float, str], ...]  # (bond length A, fcidump path)
    method: MethodSpec
    out_csv: str | None = None
    out_json: str | None = None
    out_dat: str | None = None

    def __post_init__(self):
        if not self.geometries:
            raise ValueError("scan needs at least one geometry")
        rs = [r for r, _ in self.geometries]
        if any(b <= a for a, b in zip(rs, rs[1:])):
            raise ValueError("bond lengths must be strictly increasing")
        missing = [p for _, p in self.geometries if not Path(p).exists()]
        if missing:
            raise FileNotFoundError(f"missing FCIDUMP files: {missing}")


@dataclass(frozen=True)
class GeometryResult:
    r_angstrom: float
    e_exact: float
    e_method: float
    error_kcal: float
    n_iterations: int
    n_params: int
    n_terms: int
    failed: bool = False
    message: str = ""


@dataclass(frozen=True)
class ScanResult:
    molecule: str
    method_label: str
    rows: tuple[GeometryResult, ...]

    def _ok_rows(self):
        return [row for row in self.rows if not row.failed]

    @property
    def partial(self) -> bool:
        return any(row.failed for row in self.rows)

    @property
    def npe_kcal(self) -> float:
        errs = [row.error_kcal for row in self._ok_rows()]
        return max(errs) - min(errs) if errs else float("nan")

    @property
    def mean_abs_error_kcal(self) -> float:
        errs = [abs(row.error_kcal) for row in self._ok_rows()]
        return float(np.mean(errs)) if errs else float("nan")

    @property
    def max_abs_error_kcal(self) -> float:
        errs = [abs(row.error_kcal) for row in self._ok_rows()]
        return float(np.max(errs)) if errs else float("nan")


def singlet_reference_energy(hamiltonian: PauliSum, k_start: int = 4) -> float:
    """Lowest eigenvalue of the unpenalized H with <S^2> below 1e-6."""
    s2 = s_squared(hamiltonian.n_qubits // 2)
    k = k_start
    dim = 1 << hamiltonian.n_qubits
    while True:
        vals, states = lowest_eigenpairs(hamiltonian, k=min(k, dim))
        for e, st in zip(vals, states):
            if abs(expectation(s2, st).real) < 1e-6:
                return float(e)
        if k >= min(dim, 64):
            raise RuntimeError("no singlet found among the lowest eigenstates")
        k *= 2


def run_point(fcidump_text: str, method: MethodSpec) -> GeometryResult:
    """Solve one geometry; every failure is captured in the row."""
    e_exact = float("nan")
    try:
        system = parse_fcidump(fcidump_text)
        hamiltonian = build_hamiltonian(system)
        e_exact = singlet_reference_energy(hamiltonian)
        reference = ReferenceState(hf_occupations(system))
        if method.kind == "exact":
            e_method, n_iter, n_params, n_terms = e_exact, 0, 0, hamiltonian.term_count()
        elif method.kind == "hf":
            state = reference.to_statevector(hamiltonian.n_qubits)
            e_method = expectation(hamiltonian, state).real
            n_iter, n_params, n_terms = 0, 0, hamiltonian.term_count()
        else:
            penalized = penalized_hamiltonian(hamiltonian, method.mu)
            pool = make_pool(method.flavor, system)
            if method.kind in ("adapt", "adaft"):
                res = run_adaptive(
                    penalized, pool, reference, method.solver_config(), flavor=method.kind
                )
                state = res.ansatz.construct()
                e_method = rayleigh_quotient(hamiltonian, state).real
                n_iter = len(res.records)
                n_params = res.records[-1].n_params if res.records else 0
                n_terms = penalized.term_count()
            else:  # adapt_ft
                res = run_adapt_ft(penalized, pool, reference, method.ft_config())
                state = dressed_state(res)
                e_method = rayleigh_quotient(hamiltonian, state).real
                n_iter = len(res.records)
                n_params = res.ansatz.n_parameters
                n_terms = res.dressed.current.term_count()
        return GeometryResult(
            r_angstrom=0.0,
            e_exact=e_exact,
            e_method=e_method,
            error_kcal=(e_method - e_exact) * KCAL_PER_HARTREE,
            n_iterations=n_iter,
            n_params=n_params,
            n_terms=n_terms,
        )
    except Exception as exc:  # per-geometry isolation
        return GeometryResult(
            r_angstrom=0.0,
            e_exact=e_exact,
            e_method=float("nan"),
            error_kcal=float("nan"),
            n_iterations=0,
            n_params=0,
            n_terms=0,
            failed=True,
            message=f"{type(exc).__name__}: {exc}",
        )


def _point_task(args):
    r, text, method = args
    row = run_point(text, method)
    return _with_r(row, r)


def _with_r(row: GeometryResult, r: float) -> GeometryResult:
    return GeometryResult(
        r_angstrom=r,
        e_exact=row.e_exact,
        e_method=row.e_method,
        error_kcal=row.error_kcal,
        n_iterations=row.n_iterations,
        n_params=row.n_params,
        n_terms=row.n_terms,
        failed=row.failed,
        message=row.message,
    )


def run_scan(spec: ScanSpec, workers: int = 1) -> ScanResult:
    """Run the scan; geometries are independent and may run in parallel."""
    tasks = [(r, Path(p).read_text(), spec.method) for r, p in spec.geometries]
    if workers > 1 and len(tasks) > 1:
        with ProcessPoolExecutor(max_workers=workers) as pool:
            rows = list(pool.map(_point_task, tasks))
    else:
        rows = [_point_task(t) for t in tasks]
    result = ScanResult(spec.molecule, spec.method.label(), tuple(rows))
    if spec.out_csv:
        Path(spec.out_csv).parent.mkdir(parents=True, exist_ok=True)
        Path(spec.out_csv).write_text(emit(result, "csv"))
    if spec.out_json:
        Path(spec.out_json).parent.mkdir(parents=True, exist_ok=True)
        Path(spec.out_json).write_text(emit(result, "json"))
    if spec.out_dat:
        Path(spec.out_dat).parent.mkdir(parents=True, exist_ok=True)
        Path(spec.out_dat).write_text(emit(result, "dat"))
    return result


_CSV_HEADER = "R_angstrom,E_exact,E_method,error_kcal,n_iter,n_params,n_terms,failed,message"


def emit(result: ScanResult, fmt: str = "csv") -> str:
    """Serialize a scan result; CSV column order is stable."""
    if fmt == "csv":
        out = io.StringIO()
        out.write(f"# molecule={result.molecule} method={result.method_label}\n")
        out.write(_CSV_HEADER + "\n")
        for row in result.rows:
            out.write(
                f"{row.r_angstrom!r},{row.e_exact!r},{row.e_method!r},"
                f"{row.error_kcal!r},{row.n_iterations},{row.n_params},"
                f"{row.n_terms},{int(row.failed)},{row.message}\n"
            )
        return out.getvalue()
    if fmt == "json":
        payload = {
            "molecule": result.molecule,
            "method": result.method_label,
            "rows": [asdict(row) for row in result.rows],
            "aggregates": {
                "npe_kcal": result.npe_kcal,
                "mean_abs_error_kcal": result.mean_abs_error_kcal,
                "max_abs_error_kcal": result.max_abs_error_kcal,
            },
            "partial": result.partial,
        }
        return json.dumps(payload, indent=2) + "\n"
    if fmt == "dat":  # gnuplot-friendly (R, error) pairs
        lines = [f"# {result.molecule} {result.method_label}"]
        for row in result.rows:
            if not row.failed:
                lines.append(f"{row.r_angstrom!r} {row.error_kcal!r}")
        return "\n".join(lines) + "\n"
    raise ValueError(f"unknown format {fmt!r}")


def parse_result(text: str) -> ScanResult:
    """Inverse of emit(csv): reconstructs the rows exactly."""
    lines = [ln for ln in text.splitlines() if ln.strip()]
    if not lines or not lines[0].startswith("#"):
        raise ValueError("missing scan header comment")
    meta = dict(tok.split("=", 1) for tok in lines[0][1:].split())
    if lines[1] != _CSV_HEADER:
        raise ValueError("unexpected CSV header")
    rows = []
    for ln in lines[2:]:
        fields = ln.split(",", maxsplit=8)
        rows.append(
            GeometryResult(
                r_angstrom=float(fields[0]),
                e_exact=float(fields[1]),
                e_method=float(fields[2]),
                error_kcal=float(fields[3]),
                n_iterations=int(fields[4]),
                n_params=int(fields[5]),
                n_terms=int(fields[6]),
                failed=bool(int(fields[7])),
                message=fields[8],
            )
        )
    return ScanResult(meta["molecule"], meta["method"], tuple(rows))


def load_scan_config(path: str | Path) -> ScanSpec:
    """Flat INI: [scan] molecule/files/outputs plus one [method] section."""
    cp = configparser.ConfigParser(inline_comment_prefixes=("#", ";"))
    read = cp.read(path)
    if not read:
        raise FileNotFoundError(path)
    if "scan" not in cp or "method" not in cp:
        raise ValueError("config needs [scan] and [method] sections")
    scan = cp["scan"]
    method_sec = cp["method"]
    files = []
    base = Path(path).parent
    for item in scan.get("files", "").split(","):
        item = item.strip()
        if not item:
            continue
        r_str, p = item.split(":", 1)
        p = Path(p.strip())
        files.append((float(r_str), str(p if p.is_absolute() else base / p)))
    files.sort(key=lambda rp: rp[0])
    kwargs = {}
    casts = {
        "kind": str, "flavor": str, "epsilon": float, "d": int, "k": int,
        "m": int, "mu": float, "max_iterations": int,
        "gradient_norm_tol": float, "max_evaluations": int,
        "simplify_threshold": float, "term_cap": int, "threads": int,
        "convergence_metric": str,
    }
    for key, cast in casts.items():
        if key in method_sec:
            kwargs[key] = cast(method_sec.get(key))
    method = MethodSpec(**kwargs)

    def out(key):
        val = scan.get(key, "").strip()
        if not val:
            return None
        p = Path(val)
        return str(p if p.is_absolute() else base / p)

    return ScanSpec(
        molecule=scan.get("molecule", "unknown"),
        geometries=tuple(files),
        method=method,
        out_csv=out("out_csv"),
        out_json=out("out_json"),
        out_dat=out("out_dat"),
    )
