"""Reward-curve and heatmap figures for auction simulator CSV outputs."""

from .series import PlotDataError, PlotJob, heatmap_grid, moving_average, read_episodes, read_heatmap, rewards_series  # noqa: F401
from .render import render_heatmap, render_rewards  # noqa: F401
