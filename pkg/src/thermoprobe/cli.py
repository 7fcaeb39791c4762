"""Command-line interface: run experiments, expand presets, validate configs."""

from __future__ import annotations

import argparse
import sys

from .errors import ThermoprobeError
from .figures import figure_config
from .runner import list_figures, load_config, run, validate


def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(
        prog="thermoprobe",
        description="Bosonic-probe thermometry: transient QFI, equilibrium CFI, diagnostics.",
    )
    sub = parser.add_subparsers(dest="command", required=True)

    def add_engine_flags(p):
        p.add_argument("--out", help="output directory (overrides config and env)")
        p.add_argument("--cutoff", type=int, help="Fock-space cutoff override")
        p.add_argument("--tol", type=float, help="relative QFI tolerance override")
        p.add_argument("--workers", type=int, help="worker processes for independent tasks")

    run_cmd = sub.add_parser("run", help="run an experiment config file")
    run_cmd.add_argument("config", help="path to a config file")
    add_engine_flags(run_cmd)

    fig_cmd = sub.add_parser("figure", help="run a built-in preset by id")
    fig_cmd.add_argument("id", type=int)
    add_engine_flags(fig_cmd)
    fig_cmd.add_argument("--svg", action="store_true", help="also write SVG plots")

    sub.add_parser("list", help="list available figure presets")

    val_cmd = sub.add_parser("validate", help="check a config without computing")
    val_cmd.add_argument("config", help="path to a config file")

    return parser


def main(argv=None) -> int:
    args = build_parser().parse_args(argv)
    try:
        if args.command == "list":
            for fid, description in list_figures():
                print(f"{fid:3d}  {description}")
            return 0
        if args.command == "validate":
            report = validate(load_config(args.config))
            for key, value in report.items():
                if isinstance(value, list):
                    for item in value:
                        print(f"{key}: {item}")
                else:
                    print(f"{key}: {value}")
            return 0
        if args.command == "figure":
            config = figure_config(args.id)
            if args.svg:
                config = config.override(svg=True)
            result = run(
                config,
                out_dir=args.out,
                cutoff=args.cutoff,
                tol=args.tol,
                workers=args.workers,
            )
        else:
            result = run(
                load_config(args.config),
                out_dir=args.out,
                cutoff=args.cutoff,
                tol=args.tol,
                workers=args.workers,
            )
        for path in result["outputs"]:
            print(path)
        print(result["manifest"])
        return 0
    except ThermoprobeError as error:
        print(f"error: {error}", file=sys.stderr)
        return 2


if __name__ == "__main__":
    raise SystemExit(main())
