"""Command line interface.

    handover-analysis panels --rigid A.csv [--compliant B.csv]
                             [--axes x,y,z,roll,pitch,yaw] [--no-oracle]
                             [--force] --out FIG.png
    handover-analysis summary SUITE.csv [--out TABLE.csv]

Exit codes: 0 on success, 2 on schema or usage errors.
"""

from __future__ import annotations

import argparse
import sys

from .errors import SchemaMismatchError
from .panels import AXES, PlotSpec, plot_error_panels
from .summary import format_table, summarize_suite, write_summary_csv


def _cmd_panels(args) -> int:
    inputs = [args.rigid]
    if args.compliant:
        inputs.append(args.compliant)
    axes = tuple(a for a in args.axes.split(",") if a)
    spec = PlotSpec(
        input_csvs=tuple(inputs),
        output=args.out,
        axes=axes,
        overlay_oracle=not args.no_oracle,
        overlay_force=args.force,
    )
    out = plot_error_panels(spec)
    print(f"figure: {out}")
    return 0


def _cmd_summary(args) -> int:
    pivot = summarize_suite(args.suite_csv)
    print(format_table(pivot))
    if args.out:
        print(f"table: {write_summary_csv(pivot, args.out)}")
    return 0


def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(prog="handover-analysis",
                                     description=__doc__.splitlines()[0])
    sub = parser.add_subparsers(dest="command", required=True)

    p_panels = sub.add_parser("panels", help="render per-axis error panels")
    p_panels.add_argument("--rigid", required=True,
                          help="trajectory CSV for the left column")
    p_panels.add_argument("--compliant", default=None,
                          help="trajectory CSV for the right column")
    p_panels.add_argument("--axes", default=",".join(AXES),
                          help="comma list from x,y,z,roll,pitch,yaw")
    p_panels.add_argument("--no-oracle", action="store_true",
                          help="skip the impedance-model overlay")
    p_panels.add_argument("--force", action="store_true",
                          help="overlay the applied wrench component")
    p_panels.add_argument("--out", required=True, help="output image (.png or .svg)")
    p_panels.set_defaults(func=_cmd_panels)

    p_sum = sub.add_parser("summary", help="pivot a suite summary CSV")
    p_sum.add_argument("suite_csv", help="suite_summary.csv from handover-sim")
    p_sum.add_argument("--out", default=None, help="write the pivot as CSV")
    p_sum.set_defaults(func=_cmd_summary)
    return parser


def main(argv=None) -> int:
    args = build_parser().parse_args(argv)
    try:
        return args.func(args)
    except SchemaMismatchError as exc:
        print(f"error: {exc}", file=sys.stderr)
        return 2


if __name__ == "__main__":
    sys.exit(main())
