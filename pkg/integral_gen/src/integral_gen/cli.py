"""Command line entry point: generate FCIDUMP files plus oracle sidecars."""

from __future__ import annotations

import argparse
import sys

from .jobs import MOLECULES, generate_scan


def main(argv=None) -> int:
    parser = argparse.ArgumentParser(prog="integral-gen")
    sub = parser.add_subparsers(dest="command", required=True)
    gen = sub.add_parser("generate", help="emit FCIDUMP + oracle sidecar files")
    gen.add_argument("--molecule", required=True, choices=sorted(MOLECULES))
    gen.add_argument("--r", type=float, help="single bond length (Angstrom)")
    gen.add_argument("--rmin", type=float)
    gen.add_argument("--rmax", type=float)
    gen.add_argument("--step", type=float, default=0.1)
    gen.add_argument("--angle", type=float, default=104.5, help="H2O bond angle (deg)")
    gen.add_argument("--out", required=True, help="output directory")
    args = parser.parse_args(argv)

    if args.r is not None:
        rs = [args.r]
    elif args.rmin is not None and args.rmax is not None:
        count = int(round((args.rmax - args.rmin) / args.step)) + 1
        rs = [args.rmin + i * args.step for i in range(count)]
    else:
        parser.error("provide --r or --rmin/--rmax")
    results = generate_scan(args.molecule, rs, args.out, angle_deg=args.angle)
    for job, fc, orp, e_hf, e_casci in results:
        print(f"{job.stem()}: E_HF={e_hf:.10f}  E_CASCI={e_casci:.10f}  -> {fc}")
    return 0


if __name__ == "__main__":
    sys.exit(main())
