"""Command line interface.

    handover-sim run <config> [--behavior rigid|compliant] [--dt S]
                              [--duration S] [--out DIR]
    handover-sim suite <dir> [--out DIR]
    handover-sim validate <config>
    handover-sim list-scenarios

Exit codes: 0 on Success, 1 on a Failed outcome, 2 on error.  The output
directory resolves as --out, then $HANDOVER_SIM_OUT_DIR, then the
scenario's output_path, then ./runs.
"""

from __future__ import annotations

import argparse
import os
import sys
from pathlib import Path

from .config import load_scenario, shipped_scenario_names
from .errors import HandoverSimError
from .harness import (
    OUTCOME_SUCCESS,
    run_scenario,
    run_suite,
    summary_table,
    write_summary_csv,
    write_trajectory_csv,
)

ENV_OUT_DIR = "HANDOVER_SIM_OUT_DIR"


def _resolve_out_dir(cli_out, config_out) -> Path:
    for candidate in (cli_out, os.environ.get(ENV_OUT_DIR), config_out, "runs"):
        if candidate:
            return Path(candidate)
    return Path("runs")


def _cmd_run(args) -> int:
    cfg = load_scenario(args.config)
    cfg = cfg.with_overrides(behavior=args.behavior, dt=args.dt, duration=args.duration)
    records, summary = run_scenario(cfg)
    out_dir = _resolve_out_dir(args.out, cfg.output_path)
    traj_path = out_dir / f"{cfg.name}__{cfg.behavior}.csv"
    write_trajectory_csv(records, cfg.params.n_joints, traj_path)
    write_summary_csv([summary], out_dir / f"{cfg.name}__{cfg.behavior}_summary.csv")
    print(summary_table([summary]))
    print(f"trajectory: {traj_path}")
    return 0 if summary.outcome == OUTCOME_SUCCESS else 1


def _cmd_suite(args) -> int:
    suite_dir = Path(args.dir)
    if not suite_dir.is_dir():
        print(f"error: not a directory: {suite_dir}", file=sys.stderr)
        return 2
    paths = sorted(suite_dir.glob("*.yaml"))
    configs = [load_scenario(str(p)) for p in paths]
    out_dir = _resolve_out_dir(args.out, None)
    summaries = run_suite(configs, out_dir=out_dir)
    print(summary_table(summaries))
    print(f"suite summary: {out_dir / 'suite_summary.csv'}")
    return 0 if all(s.outcome == OUTCOME_SUCCESS for s in summaries) else 1


def _cmd_validate(args) -> int:
    load_scenario(args.config)
    print(f"ok: {args.config}")
    return 0


def _cmd_list(args) -> int:
    for name in shipped_scenario_names():
        print(name)
    return 0


def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(prog="handover-sim",
                                     description=__doc__.splitlines()[0])
    sub = parser.add_subparsers(dest="command", required=True)

    p_run = sub.add_parser("run", help="run one scenario and write its logs")
    p_run.add_argument("config", help="scenario file path or shipped scenario name")
    p_run.add_argument("--behavior", choices=["rigid", "compliant"], default=None)
    p_run.add_argument("--dt", type=float, default=None, help="time step override, seconds")
    p_run.add_argument("--duration", type=float, default=None, help="horizon override, seconds")
    p_run.add_argument("--out", default=None, help="output directory")
    p_run.set_defaults(func=_cmd_run)

    p_suite = sub.add_parser("suite", help="run every scenario file in a directory")
    p_suite.add_argument("dir", help="directory of scenario YAML files")
    p_suite.add_argument("--out", default=None, help="output directory")
    p_suite.set_defaults(func=_cmd_suite)

    p_val = sub.add_parser("validate", help="schema-check a scenario file")
    p_val.add_argument("config", help="scenario file path or shipped scenario name")
    p_val.set_defaults(func=_cmd_validate)

    p_list = sub.add_parser("list-scenarios", help="list shipped scenarios")
    p_list.set_defaults(func=_cmd_list)
    return parser


def main(argv=None) -> int:
    parser = build_parser()
    args = parser.parse_args(argv)
    try:
        return args.func(args)
    except HandoverSimError as exc:
        print(f"error: {exc}", file=sys.stderr)
        return 2


if __name__ == "__main__":
    sys.exit(main())
