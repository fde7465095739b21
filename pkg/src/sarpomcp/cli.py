"""Command line interface of SarPomcp."""

from __future__ import annotations

import argparse
import asyncio
from contextlib import ExitStack
from dataclasses import replace
from itertools import count
import json
import logging
from pathlib import Path
import sys
from typing import TYPE_CHECKING, Any

from sarpomcp.const import DEFAULT_SEEDS
from sarpomcp.exceptions import SarPomcpError
from sarpomcp.harness import (
    compare,
    sweep,
    sweep_table,
    write_results,
    write_summary,
)
from sarpomcp.mission import run_episode
from sarpomcp.models import (
    BeliefPreset,
    EpisodeConfig,
    EpisodeResult,
    PlannerKind,
    SweepSpec,
    WaypointRule,
)
from sarpomcp.plotting import render_belief_maps, render_comparison, render_trajectory
from sarpomcp.scenario import (
    ScenarioOverrides,
    gen_scenario,
    load_scenario,
    save_scenario,
    with_belief,
)
from sarpomcp.tree import dump_tree

if TYPE_CHECKING:
    from collections.abc import Callable, Sequence

    from sarpomcp.harness import Experiment
    from sarpomcp.models import EpisodeEvent, Scenario
    from sarpomcp.tree import BeliefNode

_LOGGER = logging.getLogger(__package__)

_PLANNER_FLAGS = {
    "iterations": "max_iterations",
    "max_time": "max_time_s",
    "max_level": "max_level",
    "p_epsilon": "p_epsilon",
    "gamma": "gamma",
    "c_uct": "c_uct",
    "max_depth": "max_depth",
    "alpha": "alpha",
    "samples": "sample_count",
}
_HEIGHT_FLAGS = {
    "tau": "tau",
    "delta_h": "delta_h_m",
    "h_max": "h_max_m",
    "h_init": "h_init_m",
}
_EPISODE_FLAGS = {
    "max_epochs": "max_epochs",
    "waypoint_rule": "waypoint_rule",
}


def _add_config_flags(parser: argparse.ArgumentParser) -> None:
    group = parser.add_argument_group("configuration overrides")
    group.add_argument("--iterations", type=int, help="simulations per plan")
    group.add_argument("--max-time", type=float, help="wall-clock budget per plan")
    group.add_argument("--max-level", type=int, help="longest action sequence")
    group.add_argument("--p-epsilon", type=float, help="sparsity threshold")
    group.add_argument("--gamma", type=float, help="discount factor")
    group.add_argument("--c-uct", type=float, help="UCT exploration constant")
    group.add_argument("--max-depth", type=int, help="simulation depth cap")
    group.add_argument("--alpha", type=float, help="token reward weight")
    group.add_argument("--samples", type=int, help="waypoint samples per cell")
    group.add_argument("--tau", type=int, help="obstacle tolerance threshold")
    group.add_argument("--delta-h", type=float, help="altitude step in meters")
    group.add_argument("--h-max", type=float, help="altitude ceiling in meters")
    group.add_argument("--h-init", type=float, help="start altitude in meters")
    group.add_argument("--max-epochs", type=int, help="decision epoch cap")
    group.add_argument(
        "--waypoint-rule", type=WaypointRule, choices=list(WaypointRule)
    )


def _pick(args: argparse.Namespace, flags: dict[str, str]) -> dict[str, Any]:
    return {
        name: getattr(args, flag)
        for flag, name in flags.items()
        if getattr(args, flag, None) is not None
    }


def apply_overrides(sc: Scenario, args: argparse.Namespace) -> Scenario:
    """Return the scenario with every configuration flag given on the command line."""
    return replace(
        sc,
        planner=replace(sc.planner, **_pick(args, _PLANNER_FLAGS)),
        height=replace(sc.height, **_pick(args, _HEIGHT_FLAGS)),
        episode=replace(sc.episode, **_pick(args, _EPISODE_FLAGS)),
    )


def _scenario(args: argparse.Namespace) -> Scenario:
    sc = apply_overrides(load_scenario(args.scenario), args)
    belief = getattr(args, "belief", None)
    if isinstance(belief, BeliefPreset):
        sc = with_belief(sc, belief)
    return sc


def _dump_json(data: Any, path: Path) -> None:
    path.write_text(json.dumps(data, indent=2, sort_keys=True) + "\n", encoding="utf-8")


def _cmd_gen_scenario(args: argparse.Namespace) -> None:
    overrides = ScenarioOverrides(no_fly_zone_count=args.no_fly_zones)
    if args.grid_n is not None:
        overrides.grid_n = args.grid_n
    if args.side_length is not None:
        overrides.side_length_m = args.side_length
    if args.targets is not None:
        overrides.target_count = args.targets
    sc = apply_overrides(gen_scenario(args.belief, args.seed, overrides), args)
    save_scenario(sc, args.out)


def _cmd_run(args: argparse.Namespace) -> None:
    sc = _scenario(args)
    config = EpisodeConfig.from_scenario(sc, args.planner, args.seed)
    args.out.mkdir(parents=True, exist_ok=True)
    with ExitStack() as stack:
        events: Callable[[EpisodeEvent], None] | None = None
        trees: Callable[[BeliefNode], None] | None = None
        if args.events is not None:
            event_log = stack.enter_context(args.events.open("w", encoding="utf-8"))

            def write_event(event: EpisodeEvent) -> None:
                event_log.write(event.to_json() + "\n")

            events = write_event

        if args.dump_tree is not None:
            tree_log = stack.enter_context(args.dump_tree.open("w", encoding="utf-8"))
            dumped = count(1)

            def write_tree(root: BeliefNode) -> None:
                tree_log.write(f"== plan {next(dumped)} ==\n")
                tree_log.write(dump_tree(root, args.dump_depth) + "\n")

            trees = write_tree

        result = run_episode(sc, config, events=events, trees=trees)
    _dump_json(result.to_record(), args.out / "episode.json")
    if not args.no_render:
        render_trajectory(result, sc, args.out / "trajectory.png")
    print(  # noqa: T201
        f"{result.terminated_by}: {result.epochs_used} epochs, "
        f"{result.targets_found}/{result.target_count} targets, "
        f"{result.path_length_m:.0f} m"
    )


def _write_experiment(
    experiment: Experiment, out: Path, *, wall_clock: bool
) -> None:
    out.mkdir(parents=True, exist_ok=True)
    write_results(
        experiment.rows, out / "results.csv", experiment.config, wall_clock=wall_clock
    )
    write_summary(experiment.summary, out / "summary.csv", experiment.config)


def _cmd_sweep(args: argparse.Namespace) -> None:
    grid = {
        "discount_factors": args.dfs,
        "alphas": args.alphas,
        "belief_kinds": args.beliefs,
    }
    spec = SweepSpec(seeds=args.seeds, **{k: v for k, v in grid.items() if v})
    experiment = asyncio.run(sweep(spec, _scenario(args), workers=args.workers))
    _write_experiment(experiment, args.out, wall_clock=not args.no_wall_clock)
    table = sweep_table(experiment.summary)
    (args.out / "sweep_table.md").write_text(table, encoding="utf-8")
    print(table, end="")  # noqa: T201


def _cmd_compare(args: argparse.Namespace) -> None:
    planners = args.planners or list(PlannerKind)
    beliefs = args.beliefs or list(BeliefPreset)
    experiment = asyncio.run(
        compare(planners, beliefs, args.seeds, _scenario(args), workers=args.workers)
    )
    _write_experiment(experiment, args.out, wall_clock=not args.no_wall_clock)
    render_comparison(experiment.summary, args.out / "comparison.png")


def _cmd_render(args: argparse.Namespace) -> None:
    episode = EpisodeResult.from_json(args.episode.read_text(encoding="utf-8"))
    render_trajectory(episode, load_scenario(args.scenario), args.out)


def _cmd_belief_maps(args: argparse.Namespace) -> None:
    render_belief_maps(load_scenario(args.scenario), args.out)


def build_parser() -> argparse.ArgumentParser:
    """Build the argument parser with one subcommand per task."""
    parser = argparse.ArgumentParser(
        prog="sarpomcp",
        description="Grid-world UAV search-and-rescue planning experiments.",
    )
    parser.add_argument("-v", "--verbose", action="store_true", help="debug logging")
    commands = parser.add_subparsers(dest="command", required=True)

    gen = commands.add_parser("gen-scenario", help="generate a random scenario")
    gen.add_argument(
        "--belief", type=BeliefPreset, choices=list(BeliefPreset), required=True
    )
    gen.add_argument("--seed", type=int, default=0)
    gen.add_argument("--out", type=Path, required=True)
    gen.add_argument("--grid-n", type=int)
    gen.add_argument("--side-length", type=float)
    gen.add_argument("--targets", type=int)
    gen.add_argument("--no-fly-zones", type=int)
    _add_config_flags(gen)
    gen.set_defaults(handler=_cmd_gen_scenario)

    run = commands.add_parser("run", help="run a single episode")
    run.add_argument("--scenario", type=Path, required=True)
    run.add_argument(
        "--planner",
        type=PlannerKind,
        choices=list(PlannerKind),
        default=PlannerKind.SHRINKING,
    )
    run.add_argument("--belief", type=BeliefPreset, choices=list(BeliefPreset))
    run.add_argument("--seed", type=int, default=0)
    run.add_argument("--out", type=Path, required=True)
    run.add_argument("--events", type=Path, help="write an event log (JSON lines)")
    run.add_argument("--no-render", action="store_true")
    run.add_argument(
        "--dump-tree", type=Path, help="write every search tree as indented text"
    )
    run.add_argument(
        "--dump-depth", type=int, default=2, help="deepest tree level to write"
    )
    _add_config_flags(run)
    run.set_defaults(handler=_cmd_run)

    for name, handler, helptext in (
        ("sweep", _cmd_sweep, "sweep discount factor and reward alpha"),
        ("compare", _cmd_compare, "compare the four planners"),
    ):
        sub = commands.add_parser(name, help=helptext)
        sub.add_argument("--scenario", type=Path, required=True)
        sub.add_argument("--seeds", type=int, default=DEFAULT_SEEDS)
        sub.add_argument(
            "--belief",
            dest="beliefs",
            type=BeliefPreset,
            choices=list(BeliefPreset),
            action="append",
        )
        sub.add_argument("--workers", type=int)
        sub.add_argument("--out", type=Path, required=True)
        sub.add_argument("--no-wall-clock", action="store_true")
        _add_config_flags(sub)
        sub.set_defaults(handler=handler)
        if name == "sweep":
            sub.add_argument("--dfs", type=float, nargs="+")
            sub.add_argument("--alphas", type=float, nargs="+")
        else:
            sub.add_argument(
                "--planner",
                dest="planners",
                type=PlannerKind,
                choices=list(PlannerKind),
                action="append",
            )

    render = commands.add_parser("render", help="render a recorded episode")
    render.add_argument("--scenario", type=Path, required=True)
    render.add_argument("--episode", type=Path, required=True)
    render.add_argument("--out", type=Path, required=True)
    render.set_defaults(handler=_cmd_render)

    maps = commands.add_parser("belief-maps", help="render the three prior beliefs")
    maps.add_argument("--scenario", type=Path, required=True)
    maps.add_argument("--out", type=Path, required=True)
    maps.set_defaults(handler=_cmd_belief_maps)
    return parser


def main(argv: Sequence[str] | None = None) -> int:
    """Run the command line interface and return the exit code."""
    args = build_parser().parse_args(argv)
    logging.basicConfig(
        level=logging.DEBUG if args.verbose else logging.INFO,
        format="%(asctime)s %(levelname)s %(name)s: %(message)s",
    )
    try:
        args.handler(args)
    except (SarPomcpError, OSError) as err:
        _LOGGER.debug("Command failed", exc_info=True)
        print(f"sarpomcp: error: {err}", file=sys.stderr)  # noqa: T201
        return 1
    return 0
