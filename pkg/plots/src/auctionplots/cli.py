"""`plot` command: render simulator CSV outputs to raster figures."""

from __future__ import annotations

import argparse
import sys

from .render import render_heatmap, render_rewards
from .series import PlotDataError, PlotJob


def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(
        prog="plot", description="Render auction training CSVs to figures.")
    sub = parser.add_subparsers(dest="command", required=True)

    p_rewards = sub.add_parser("rewards", help="per-agent reward curves from episodes.csv")
    p_rewards.add_argument("--in", dest="input_path", required=True)
    p_rewards.add_argument("--out", dest="output_path", required=True)
    p_rewards.add_argument("--window", type=int, default=50,
                           help="moving-average window in episodes (default 50)")

    p_heat = sub.add_parser("heatmap", help="joint-bid frequency grid from heatmap.csv")
    p_heat.add_argument("--in", dest="input_path", required=True)
    p_heat.add_argument("--out", dest="output_path", required=True)
    p_heat.add_argument("--ceiling", type=int, default=None,
                        help="grid extent; defaults to the highest level in the file")
    return parser


def main(argv=None) -> int:
    try:
        inv = build_parser().parse_args(argv)
    except SystemExit as exc:
        return 2 if exc.code not in (0, None) else 0
    try:
        if inv.command == "rewards":
            job = PlotJob(inv.input_path, inv.output_path, inv.window)
            render_rewards(job)
        else:
            job = PlotJob(inv.input_path, inv.output_path)
            render_heatmap(job, inv.ceiling)
    except PlotDataError as exc:
        print(f"error: {exc}", file=sys.stderr)
        return 1
    return 0


def entrypoint() -> None:
    sys.exit(main())


if __name__ == "__main__":
    entrypoint()
