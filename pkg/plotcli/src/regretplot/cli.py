"""Command-line front end for rendering regret figures from result CSVs."""

from __future__ import annotations

import argparse
import sys
from pathlib import Path

from .render import EmptyInputError, PlotSpec, SchemaError, render_regret_curves


def _build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(
        prog="regret-plot",
        description=(
            "Render per-agent cumulative-regret curves with min/mean/max bands "
            "and oracle-change tick marks from experiment result CSVs"
        ),
    )
    parser.add_argument(
        "--input",
        action="append",
        required=True,
        help="result CSV path; repeat for side-by-side variants",
    )
    parser.add_argument("--out", required=True, help="output image path (png)")
    parser.add_argument(
        "--agents",
        default=None,
        help="comma-separated 1-based agent ids to plot (default: all)",
    )
    parser.add_argument("--no-ticks", action="store_true", help="hide change ticks")
    parser.add_argument("--title", default=None, help="figure title")
    return parser


def main(argv: list[str] | None = None) -> int:
    args = _build_parser().parse_args(argv)
    agents = None
    if args.agents:
        try:
            agents = tuple(int(part) for part in args.agents.split(","))
        except ValueError:
            print(f"error: --agents must be integers, got {args.agents!r}", file=sys.stderr)
            return 2
    spec = PlotSpec(
        inputs=tuple(Path(p) for p in args.input),
        out=Path(args.out),
        agents=agents,
        ticks=not args.no_ticks,
        title=args.title,
    )
    try:
        result = render_regret_curves(spec)
    except (SchemaError, EmptyInputError, OSError) as exc:
        print(f"error: {exc}", file=sys.stderr)
        return 2
    print(f"wrote {result.out} ({len(result.panels)} panels, {result.tick_count} ticks)")
    return 0


if __name__ == "__main__":
    sys.exit(main())
