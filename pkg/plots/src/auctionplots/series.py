"""CSV parsing and data series for the plotting layer.

This layer is a pure view of the simulator's output files: it never
recomputes payoffs or frequencies, only parses, converts cents to dollars
and applies an optional trailing moving average.
"""

from __future__ import annotations

import csv
from dataclasses import dataclass

REWARDS_HEADER = ("episode", "bid_a", "bid_b", "reward_a_cents", "reward_b_cents",
                  "epsilon_a", "epsilon_b")
REWARDS_HEADER_SEQ = REWARDS_HEADER + ("actions",)
HEATMAP_HEADER = ("bid_a", "bid_b", "count", "frequency")


class PlotDataError(ValueError):
    pass


@dataclass(frozen=True)
class PlotJob:
    input_path: str
    output_path: str
    window: int = 50


def _read_rows(path, expected_headers):
    try:
        with open(path, newline="") as fh:
            rows = list(csv.reader(fh))
    except OSError as exc:
        raise PlotDataError(f"cannot read {path}: {exc}") from exc
    if not rows:
        raise PlotDataError(f"{path} is empty")
    header = tuple(rows[0])
    if header not in expected_headers:
        want = " or ".join(",".join(h) for h in expected_headers)
        raise PlotDataError(f"{path} header {','.join(header)!r} does not match {want!r}")
    if len(rows) == 1:
        raise PlotDataError(f"{path} has no data rows")
    return header, rows[1:]


def read_episodes(path) -> dict[str, list]:
    """Columns of an episodes.csv file, numerics parsed."""
    header, rows = _read_rows(path, (REWARDS_HEADER, REWARDS_HEADER_SEQ))
    columns: dict[str, list] = {name: [] for name in header}
    for row in rows:
        if len(row) != len(header):
            raise PlotDataError(f"{path}: row has {len(row)} fields, expected {len(header)}")
        record = dict(zip(header, row))
        columns["episode"].append(int(record["episode"]))
        columns["bid_a"].append(int(record["bid_a"]))
        columns["bid_b"].append(int(record["bid_b"]))
        columns["reward_a_cents"].append(int(record["reward_a_cents"]))
        columns["reward_b_cents"].append(int(record["reward_b_cents"]))
        columns["epsilon_a"].append(float(record["epsilon_a"]))
        columns["epsilon_b"].append(float(record["epsilon_b"]))
        if "actions" in columns:
            columns["actions"].append(record["actions"])
    return columns


def moving_average(values, window: int) -> list[float]:
    """Trailing mean over up to `window` points; window 1 is the identity."""
    if window < 1:
        raise PlotDataError(f"smoothing window must be >= 1: {window}")
    out = []
    running = 0.0
    for i, value in enumerate(values):
        running += value
        if i >= window:
            running -= values[i - window]
        out.append(running / min(i + 1, window))
    return out


def rewards_series(path, window: int = 50):
    """(episodes, dollars_a, dollars_b) as plotted, smoothing applied."""
    columns = read_episodes(path)
    dollars_a = [cents / 100 for cents in columns["reward_a_cents"]]
    dollars_b = [cents / 100 for cents in columns["reward_b_cents"]]
    return (columns["episode"],
            moving_average(dollars_a, window),
            moving_average(dollars_b, window))


def read_heatmap(path) -> dict[tuple[int, int], float]:
    _, rows = _read_rows(path, (HEATMAP_HEADER,))
    cells: dict[tuple[int, int], float] = {}
    for row in rows:
        if len(row) != 4:
            raise PlotDataError(f"{path}: malformed heatmap row {row!r}")
        try:
            a, b, _count, freq = int(row[0]), int(row[1]), int(row[2]), float(row[3])
        except ValueError as exc:
            raise PlotDataError(f"{path}: malformed heatmap row {row!r}") from exc
        cells[(a, b)] = freq
    return cells


def heatmap_grid(path, ceiling: int | None = None):
    """Dense frequency grid[bid_b][bid_a] over levels 0..ceiling, absent cells 0."""
    cells = read_heatmap(path)
    top = max(max(a, b) for a, b in cells)
    if ceiling is not None:
        if ceiling < top:
            raise PlotDataError(f"ceiling {ceiling} below observed level {top}")
        top = ceiling
    grid = [[0.0] * (top + 1) for _ in range(top + 1)]
    for (a, b), freq in cells.items():
        grid[b][a] = freq
    return grid
