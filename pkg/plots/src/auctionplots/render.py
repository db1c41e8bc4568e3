"""Raster figure rendering in the simulator's reward-curve and heatmap styles."""

from __future__ import annotations

import matplotlib

matplotlib.use("Agg")

import matplotlib.pyplot as plt

from .series import PlotJob, heatmap_grid, rewards_series


def render_rewards(job: PlotJob) -> str:
    """One reward curve per agent (dollars vs episode), moving average applied."""
    episodes, dollars_a, dollars_b = rewards_series(job.input_path, job.window)
    fig, ax = plt.subplots(figsize=(8, 4.5))
    ax.plot(episodes, dollars_a, label="agent 1", linewidth=1.2)
    ax.plot(episodes, dollars_b, label="agent 2", linewidth=1.2)
    ax.set_xlabel("episode")
    ax.set_ylabel("reward ($)")
    label = f", moving average over {job.window}" if job.window > 1 else ""
    ax.set_title(f"Reward per episode{label}")
    ax.legend()
    ax.grid(True, alpha=0.3)
    fig.tight_layout()
    fig.savefig(job.output_path)
    plt.close(fig)
    return job.output_path


def render_heatmap(job: PlotJob, ceiling: int | None = None) -> str:
    """Joint final-bid frequency grid; bid levels on both axes, pass = 0."""
    grid = heatmap_grid(job.input_path, ceiling)
    levels = len(grid)
    fig, ax = plt.subplots(figsize=(5.5, 5))
    image = ax.imshow(grid, origin="lower", cmap="viridis", vmin=0.0,
                      vmax=max(1e-9, max(max(row) for row in grid)))
    ax.set_xticks(range(levels))
    ax.set_yticks(range(levels))
    ax.set_xlabel("agent 1 bid")
    ax.set_ylabel("agent 2 bid")
    ax.set_title("Joint bids, last-N episodes")
    fig.colorbar(image, ax=ax, label="frequency")
    fig.tight_layout()
    fig.savefig(job.output_path)
    plt.close(fig)
    return job.output_path
