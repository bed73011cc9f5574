"""Command line entry point.

``patchbound run <experiment>`` reproduces one of the bundled experiments
(tables, spectrum plots, residual histories); ``patchbound verify`` runs the
self-check suite and exits nonzero on any failure.
"""

import argparse
import sys

from .errors import PatchBoundError
from .experiments import EXPERIMENTS, ExperimentConfig, run, verify


def _mesh_list(text):
    try:
        sizes = tuple(int(part) for part in text.split(","))
    except ValueError:
        raise argparse.ArgumentTypeError(f"not a comma-separated integer list: {text!r}")
    if any(n < 1 for n in sizes):
        raise argparse.ArgumentTypeError("mesh sizes must be positive")
    return sizes


def build_parser():
    parser = argparse.ArgumentParser(
        prog="patchbound",
        description="Guaranteed eigenvalue bounds for preconditioned FEM/DG operators.",
    )
    sub = parser.add_subparsers(dest="command", required=True)

    runp = sub.add_parser("run", help="run one experiment and write its artifacts")
    runp.add_argument("experiment", choices=EXPERIMENTS)
    runp.add_argument("--n", type=_mesh_list, default=(),
                      help="comma-separated mesh sizes, e.g. 10,20,30,40")
    runp.add_argument("--c-sigma", type=float, default=2.0,
                      help="interior-penalty scaling (DG only, must exceed 1)")
    runp.add_argument("--ref", choices=("ap1", "ap2"), default=None,
                      help="reference data; omit to run unpreconditioned")
    runp.add_argument("--diag", choices=("ll-ur", "lr-ul"), default="ll-ur",
                      help="triangulation diagonal direction")
    runp.add_argument("--out", default=None, help="output directory")
    runp.add_argument("--dump-matrices", action="store_true",
                      help="also export assembled matrices in Matrix Market format")
    runp.add_argument("--dump-mesh", action="store_true",
                      help="also export mesh vertex/triangle/edge CSV tables")

    sub.add_parser("verify", help="run the bound/structure self-checks")
    return parser


def main(argv=None):
    args = build_parser().parse_args(argv)
    try:
        if args.command == "run":
            config = ExperimentConfig(
                experiment=args.experiment,
                mesh_sizes=args.n,
                c_sigma=args.c_sigma,
                ref=args.ref,
                diagonal=args.diag,
                out_dir=args.out,
                dump_matrices=args.dump_matrices,
                dump_mesh=args.dump_mesh,
            )
            run(config)
            return 0
        summary = verify()
        print(summary)
        return 0 if summary.ok else 1
    except (PatchBoundError, ValueError) as exc:
        print(f"patchbound: error: {exc}", file=sys.stderr)
        return 2


if __name__ == "__main__":
    sys.exit(main())
