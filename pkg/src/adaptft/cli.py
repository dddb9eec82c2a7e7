"""Command-line benchmark harness.

Subcommands: pool, run, scan, dress-dump, npe.  Exit codes: 0 success,
1 partial results (some geometry failed), 2 configuration error.
"""

from __future__ import annotations

import argparse
import sys
from pathlib import Path

from .bench import (
    MethodSpec,
    emit,
    load_scan_config,
    parse_result,
    run_point,
    run_scan,
    _with_r,
)
from .dressing import run_adapt_ft
from .fermion import (
    build_hamiltonian,
    hf_occupations,
    make_pool,
    parse_fcidump,
    penalized_hamiltonian,
)
from .statevector import ReferenceState


def _method_args(parser: argparse.ArgumentParser):
    parser.add_argument("--method", default="adaft",
                        choices=["hf", "adapt", "adaft", "adapt_ft", "exact"])
    parser.add_argument("--flavor", default="f",
                        help="pool flavor: f/fermionic, q/qubit_excitation, p/pauli_string")
    parser.add_argument("--epsilon", type=float, default=1e-3)
    parser.add_argument("--d", type=int, default=1)
    parser.add_argument("--k", type=int, default=5)
    parser.add_argument("--m", type=int, default=1)
    parser.add_argument("--mu", type=float, default=0.5)
    parser.add_argument("--max-iterations", type=int, default=300)
    parser.add_argument("--simplify-threshold", type=float, default=1e-12)
    parser.add_argument("--term-cap", type=int, default=200000)
    parser.add_argument("--threads", type=int, default=1,
                        help="concurrent gradient-sweep workers")
    parser.add_argument("--convergence-metric", default="delta_h",
                        choices=["delta_h", "residual_norm"])


def _method_from_args(args) -> MethodSpec:
    return MethodSpec(
        kind=args.method,
        flavor=args.flavor,
        epsilon=args.epsilon,
        d=args.d,
        k=args.k,
        m=args.m,
        mu=args.mu,
        max_iterations=args.max_iterations,
        simplify_threshold=args.simplify_threshold,
        term_cap=args.term_cap,
        threads=args.threads,
        convergence_metric=args.convergence_metric,
    )


def main(argv=None) -> int:
    parser = argparse.ArgumentParser(prog="adaptft")
    sub = parser.add_subparsers(dest="command", required=True)

    p_pool = sub.add_parser("pool", help="dump an operator pool")
    p_pool.add_argument("--fcidump", required=True)
    p_pool.add_argument("--flavor", default="f")
    p_pool.add_argument("--out", help="output path (default stdout)")

    p_run = sub.add_parser("run", help="solve a single geometry")
    p_run.add_argument("--fcidump", required=True)
    p_run.add_argument("--r", type=float, default=0.0, help="bond length tag (Angstrom)")
    _method_args(p_run)
    p_run.add_argument("--json", action="store_true", help="emit JSON instead of CSV")

    p_scan = sub.add_parser("scan", help="run a bond scan from an INI config")
    p_scan.add_argument("--config", required=True)
    p_scan.add_argument("--workers", type=int, default=1,
                        help="concurrent geometries (processes)")

    p_dress = sub.add_parser("dress-dump", help="run ADAPT-FT and dump the dressed Hamiltonian")
    p_dress.add_argument("--fcidump", required=True)
    _method_args(p_dress)
    p_dress.add_argument("--out", help="output path (default stdout)")

    p_npe = sub.add_parser("npe", help="recompute aggregates from a scan CSV")
    p_npe.add_argument("--csv", required=True)

    args = parser.parse_args(argv)
    try:
        return _dispatch(args)
    except (ValueError, FileNotFoundError, KeyError) as exc:
        print(f"configuration error: {exc}", file=sys.stderr)
        return 2


def _dispatch(args) -> int:
    if args.command == "pool":
        system = parse_fcidump(Path(args.fcidump).read_text())
        pool = make_pool(MethodSpec(kind="adaft", flavor=args.flavor).flavor, system)
        text = pool.dump()
        if args.out:
            Path(args.out).write_text(text)
        else:
            sys.stdout.write(text)
        return 0

    if args.command == "run":
        method = _method_from_args(args)
        row = _with_r(run_point(Path(args.fcidump).read_text(), method), args.r)
        from .bench import ScanResult

        result = ScanResult("single", method.label(), (row,))
        sys.stdout.write(emit(result, "json" if args.json else "csv"))
        return 1 if row.failed else 0

    if args.command == "scan":
        spec = load_scan_config(args.config)
        result = run_scan(spec, workers=args.workers)
        sys.stdout.write(emit(result, "csv"))
        print(
            f"# NPE={result.npe_kcal!r} kcal/mol  mean|err|={result.mean_abs_error_kcal!r}"
            f"  max|err|={result.max_abs_error_kcal!r}"
        )
        return 1 if result.partial else 0

    if args.command == "dress-dump":
        method = _method_from_args(args)
        if method.kind != "adapt_ft":
            method = MethodSpec(**{**method.__dict__, "kind": "adapt_ft"})
        system = parse_fcidump(Path(args.fcidump).read_text())
        hamiltonian = penalized_hamiltonian(build_hamiltonian(system), method.mu)
        pool = make_pool(method.flavor, system)
        reference = ReferenceState(hf_occupations(system))
        res = run_adapt_ft(hamiltonian, pool, reference, method.ft_config())
        lines = [
            f"# dressed Hamiltonian: {method.label()} status={res.status}",
            f"# base_terms={res.dressed.base.term_count()} "
            f"final_terms={res.dressed.current.term_count()} "
            f"growth_factor={res.dressed.growth_factor!r}",
        ]
        for i, (labels, thetas) in enumerate(res.dressed.transformations, start=1):
            pairs = "; ".join(f"{l}={t!r}" for l, t in zip(labels, thetas))
            lines.append(f"# iteration {i}: {pairs}")
        text = "\n".join(lines) + "\n" + res.dressed.current.to_text()
        if args.out:
            Path(args.out).write_text(text)
        else:
            sys.stdout.write(text)
        return 0

    if args.command == "npe":
        result = parse_result(Path(args.csv).read_text())
        print(f"molecule={result.molecule} method={result.method_label}")
        print(f"NPE_kcal={result.npe_kcal!r}")
        print(f"mean_abs_error_kcal={result.mean_abs_error_kcal!r}")
        print(f"max_abs_error_kcal={result.max_abs_error_kcal!r}")
        return 1 if result.partial else 0

    raise ValueError(f"unknown command {args.command!r}")


if __name__ == "__main__":
    sys.exit(main())
