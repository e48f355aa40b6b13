"""Command-line entry point.

Subcommands: ``run`` executes a config's replication sweep and writes CSV +
JSON outputs, ``scenarios`` lists the named presets with their constants,
``diagnose`` prints the plan and bound report for a config without running
it. Exit code 0 on success; 2 on validation problems; 1 on runtime failures,
with the error category on stderr.
"""

from __future__ import annotations

import argparse
import json
import sys

from .config import load_config
from .errors import MatchingBanditsError, ValidationError
from .harness import run_experiment, static_diagnostics
from .scenarios import list_scenarios


def _build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(
        prog="matching-bandits",
        description="Contextual matching-bandit experiment driver",
    )
    sub = parser.add_subparsers(dest="command", required=True)

    run_p = sub.add_parser("run", help="run a config's replication sweep")
    run_p.add_argument("config", help="path to a JSON config file")
    run_p.add_argument("--seed", type=int, default=None, help="override master seed")
    run_p.add_argument("--reps", type=int, default=None, help="override replications")
    run_p.add_argument("--out-dir", default="out", help="directory for CSV/JSON output")
    run_p.add_argument("--workers", type=int, default=1, help="replication worker count")

    sub.add_parser("scenarios", help="list scenario presets and their constants")

    diag_p = sub.add_parser("diagnose", help="print the plan and bound report")
    diag_p.add_argument("config", help="path to a JSON config file")
    return parser


def _cmd_run(args: argparse.Namespace) -> int:
    config = load_config(args.config)
    if args.seed is not None:
        config.master_seed = args.seed
    if args.reps is not None:
        if args.reps < 1:
            raise ValidationError("--reps must be positive")
        config.replications = args.reps
    result = run_experiment(config, out_dir=args.out_dir, workers=args.workers)
    empirical = result.diagnostics["empirical"]
    print(f"wrote {result.csv_path}")
    print(f"wrote {result.json_path}")
    print(
        f"scenario={config.scenario} replications={config.replications} "
        f"exploration_rounds={result.plan.rounds}"
    )
    print(f"mean final regret per agent: {empirical['mean_final_regret']}")
    return 0


def _cmd_scenarios() -> int:
    for name, table in list_scenarios().items():
        print(f"[{name}]")
        for key, value in table.items():
            if key == "scenario":
                continue
            print(f"  {key} = {value}")
    return 0


def _cmd_diagnose(args: argparse.Namespace) -> int:
    config = load_config(args.config)
    print(json.dumps(static_diagnostics(config), indent=2, sort_keys=True))
    return 0


def main(argv: list[str] | None = None) -> int:
    args = _build_parser().parse_args(argv)
    try:
        if args.command == "run":
            return _cmd_run(args)
        if args.command == "scenarios":
            return _cmd_scenarios()
        return _cmd_diagnose(args)
    except ValidationError as exc:
        print(f"error[{exc.category}]: {exc}", file=sys.stderr)
        return 2
    except MatchingBanditsError as exc:
        print(f"error[{exc.category}]: {exc}", file=sys.stderr)
        return 1


if __name__ == "__main__":
    sys.exit(main())
