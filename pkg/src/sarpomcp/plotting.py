"""Trajectory, belief-map and comparison figures."""

from __future__ import annotations

import logging
from typing import TYPE_CHECKING

from matplotlib.backends.backend_agg import FigureCanvasAgg
from matplotlib.figure import Figure
from matplotlib.patches import Rectangle as RectanglePatch
import numpy as np

from sarpomcp.grid_world import Cell
from sarpomcp.models import BeliefPreset, PlannerKind
from sarpomcp.scenario import build_world, with_belief

if TYPE_CHECKING:
    from collections.abc import Sequence
    from pathlib import Path

    from matplotlib.axes import Axes

    from sarpomcp.models import EpisodeResult, Scenario, SummaryRow

_LOGGER = logging.getLogger(__package__)

BELIEF_CMAP = "Blues"
OBSTACLE_COLOR = "#808080"
NO_FLY_COLOR = "#ff0000"
PATH_COLOR = "#ffd700"
TARGET_COLOR = "#800080"
START_COLOR = "#008000"
PLANNER_COLORS = {
    PlannerKind.SHRINKING: "tab:blue",
    PlannerKind.VANILLA: "tab:orange",
    PlannerKind.LAWNMOWER: "tab:green",
    PlannerKind.GREEDY: "tab:red",
}
PATH_LABEL = "path"
FIGURE_DPI = 100


def _new_figure(width: float, height: float) -> Figure:
    figure = Figure(figsize=(width, height), dpi=FIGURE_DPI)
    FigureCanvasAgg(figure)
    return figure


def _save(figure: Figure, path: Path) -> Path:
    figure.savefig(path, format="png", dpi=FIGURE_DPI, metadata={"Software": None})
    _LOGGER.info("Wrote %s", path)
    return path


def _draw_map(ax: Axes, sc: Scenario, dynamic: Sequence[Cell] = ()) -> None:
    """Draw the belief heat layer, the buildings and the no-fly zones."""
    world = build_world(sc)
    side = world.geom.side_length_m
    ax.imshow(
        world.belief.probs.T,
        origin="lower",
        extent=(0, side, 0, side),
        cmap=BELIEF_CMAP,
        interpolation="nearest",
        zorder=0,
    )
    for b in sc.buildings:
        ax.add_patch(
            RectanglePatch(
                (b.x_min, b.y_min),
                b.x_max - b.x_min,
                b.y_max - b.y_min,
                facecolor=OBSTACLE_COLOR,
                edgecolor="none",
                zorder=1,
            )
        )
    zones = [(z.x_min, z.y_min, z.x_max, z.y_max) for z in sc.no_fly_zones]
    size = world.geom.cell_size_m
    zones.extend(
        (c.i * size, c.j * size, (c.i + 1) * size, (c.j + 1) * size) for c in dynamic
    )
    for x_min, y_min, x_max, y_max in zones:
        ax.add_patch(
            RectanglePatch(
                (x_min, y_min),
                x_max - x_min,
                y_max - y_min,
                facecolor=NO_FLY_COLOR,
                edgecolor="none",
                zorder=2,
            )
        )
    ax.set_xlim(0, side)
    ax.set_ylim(0, side)
    ax.set_aspect("equal")
    ax.set_xlabel("x [m]")
    ax.set_ylabel("y [m]")


def build_trajectory_figure(episode: EpisodeResult, sc: Scenario) -> Figure:
    """Build the map of one episode with the flown path on top."""
    figure = _new_figure(6, 6)
    ax = figure.add_subplot()
    _draw_map(ax, sc, [Cell(*c) for c in episode.dynamic_no_fly])
    if episode.trajectory:
        xs = [p.x for p in episode.trajectory]
        ys = [p.y for p in episode.trajectory]
        ax.plot(xs, ys, color=PATH_COLOR, linewidth=2, label=PATH_LABEL, zorder=3)
        ax.scatter(xs[:1], ys[:1], marker="^", s=120, color=START_COLOR, zorder=4)
    if episode.target_positions:
        ax.scatter(
            [p.x for p in episode.target_positions],
            [p.y for p in episode.target_positions],
            marker="*",
            s=160,
            color=TARGET_COLOR,
            zorder=4,
        )
    ax.set_title(
        f"{sc.name}: {episode.epochs_used} epochs, "
        f"{episode.targets_found}/{episode.target_count} targets"
    )
    return figure


def render_trajectory(episode: EpisodeResult, sc: Scenario, path: Path) -> Path:
    """Write the trajectory figure of an episode as a PNG."""
    return _save(build_trajectory_figure(episode, sc), path)


def build_belief_maps_figure(sc: Scenario) -> Figure:
    """Build the uniform, one-peak and three-peak priors side by side."""
    figure = _new_figure(15, 5)
    axes = figure.subplots(1, len(BeliefPreset))
    size = sc.map.side_length_m / sc.map.grid_n
    for ax, preset in zip(axes, BeliefPreset, strict=True):
        variant = with_belief(sc, preset)
        _draw_map(ax, variant)
        ax.scatter(
            [sc.start.x], [sc.start.y], marker="^", s=120, color=START_COLOR, zorder=4
        )
        if variant.belief.peaks:
            ax.scatter(
                [(p.i + 0.5) * size for p in variant.belief.peaks],
                [(p.j + 0.5) * size for p in variant.belief.peaks],
                marker="*",
                s=160,
                color=TARGET_COLOR,
                zorder=4,
            )
        ax.set_title(str(preset))
    return figure


def render_belief_maps(sc: Scenario, path: Path) -> Path:
    """Write the three prior belief maps of a scenario as a PNG."""
    return _save(build_belief_maps_figure(sc), path)


def build_comparison_figure(summary: Sequence[SummaryRow]) -> Figure:
    """Build grouped bars of mean decision epochs per belief and planner."""
    beliefs = [b for b in BeliefPreset if any(r.belief == b for r in summary)]
    planners = [p for p in PlannerKind if any(r.planner == p for r in summary)]
    by_cell = {(r.belief, r.planner): r for r in summary}
    figure = _new_figure(8, 5)
    ax = figure.add_subplot()
    width = 0.8 / max(len(planners), 1)
    base = np.arange(len(beliefs))
    for k, planner in enumerate(planners):
        rows = [by_cell.get((belief, planner)) for belief in beliefs]
        ax.bar(
            base + k * width,
            [r.mean_epochs if r else 0.0 for r in rows],
            width,
            yerr=[(r.se_epochs or 0.0) if r else 0.0 for r in rows],
            capsize=4,
            color=PLANNER_COLORS[planner],
            label=str(planner),
        )
    ax.set_xticks(base + width * (len(planners) - 1) / 2, [str(b) for b in beliefs])
    ax.set_ylabel("decision epochs")
    ax.legend()
    return figure


def render_comparison(summary: Sequence[SummaryRow], path: Path) -> Path:
    """Write the planner comparison bar chart as a PNG."""
    return _save(build_comparison_figure(summary), path)
