#!/usr/bin/env python3
"""Check the experiment-level acceptance targets of the toolkit.

Runs the uniform-belief sweep trend (DF 0.995 against DF 0.8, and the
sanity band of the best uniform cell) and the planner comparison (the
shrinking planner against vanilla POMCP, lawnmower and greedy on every
belief). Prints one verdict per check and the wall-clock time, and
optionally writes the same report as markdown.

Usage:
    poetry run python scripts/acceptance.py --seeds 20 --out acceptance.md
"""

# ruff: noqa: E402, T201  # Path setup before project imports; prints are the output

from __future__ import annotations

import argparse
import asyncio
from pathlib import Path
import sys
import time

project_root = Path(__file__).resolve().parent.parent
if str(project_root / "src") not in sys.path:
    sys.path.insert(0, str(project_root / "src"))

from sarpomcp.harness import compare, sweep, sweep_table
from sarpomcp.helpers import mean_and_standard_error
from sarpomcp.models import BeliefPreset, PlannerKind, Scenario, SweepSpec
from sarpomcp.scenario import gen_scenario

SANITY_BAND = (3.0, 20.0)
SUPERIORITY_RATIO = 0.8
RUNTIME_TARGET_S = 15 * 60


def _verdict(ok: bool) -> str:  # noqa: FBT001
    return "PASS" if ok else "FAIL"


async def _sweep_trend(base: Scenario, seeds: int, workers: int | None) -> list[str]:
    spec = SweepSpec(
        discount_factors=[0.8, 0.995],
        alphas=[0.0, 1.0, 10.0],
        belief_kinds=[BeliefPreset.UNIFORM],
        seeds=seeds,
    )
    experiment = await sweep(spec, base, workers=workers)
    pooled = {
        df: mean_and_standard_error(
            [row.epochs_used for row in experiment.rows if row.df == df]
        )[0]
        for df in spec.discount_factors
    }
    (best,) = [
        row for row in experiment.summary if row.df == 0.995 and row.alpha == 0.0
    ]
    low, high = SANITY_BAND
    return [
        "## Sweep trend (uniform belief)",
        "",
        sweep_table(experiment.summary).rstrip(),
        "",
        f"- pooled mean DF 0.995: {pooled[0.995]:.2f} epochs",
        f"- pooled mean DF 0.8: {pooled[0.8]:.2f} epochs",
        f"- DF 0.995 below DF 0.8: {_verdict(pooled[0.995] < pooled[0.8])}",
        f"- (0.995, 0) mean {best.mean_epochs:.2f} in [{low:g}, {high:g}]: "
        f"{_verdict(low <= best.mean_epochs <= high)}",
        f"- (0.995, 0) mean targets found: {best.mean_targets_found:.2f}",
        "",
    ]


async def _comparison(base: Scenario, seeds: int, workers: int | None) -> list[str]:
    experiment = await compare(
        list(PlannerKind), list(BeliefPreset), seeds, base, workers=workers
    )
    lines = [
        "## Planner comparison",
        "",
        "| belief | planner | mean epochs | SE | mean found |",
        "| --- | --- | --- | --- | --- |",
    ]
    lines.extend(
        f"| {row.belief} | {row.planner} | {row.mean_epochs:.2f} | "
        f"{'-' if row.se_epochs is None else f'{row.se_epochs:.2f}'} | "
        f"{row.mean_targets_found:.2f} |"
        for row in experiment.summary
    )
    lines.append("")
    for belief in BeliefPreset:
        means = {
            row.planner: row.mean_epochs
            for row in experiment.summary
            if row.belief == belief
        }
        shrinking = means.pop(PlannerKind.SHRINKING)
        baseline = min(means.values())
        ok = all(shrinking < mean for mean in means.values()) and (
            shrinking <= SUPERIORITY_RATIO * baseline
        )
        lines.append(
            f"- {belief}: shrinking {shrinking:.2f} vs best baseline "
            f"{baseline:.2f}: {_verdict(ok)}"
        )
    lines.append("")
    return lines


async def _run(args: argparse.Namespace) -> list[str]:
    base = gen_scenario(BeliefPreset.UNIFORM, args.scenario_seed)
    lines = [f"# Acceptance run on {base.name}, {args.seeds} seeds", ""]
    started = time.perf_counter()
    if not args.skip_sweep:
        lines.extend(await _sweep_trend(base, args.seeds, args.workers))
    compare_started = time.perf_counter()
    if not args.skip_compare:
        lines.extend(await _comparison(base, args.seeds, args.workers))
        elapsed = time.perf_counter() - compare_started
        lines.append(
            f"- comparison took {elapsed:.0f} s, target {RUNTIME_TARGET_S} s: "
            f"{_verdict(elapsed <= RUNTIME_TARGET_S)}"
        )
    lines.append(f"- total {time.perf_counter() - started:.0f} s")
    return lines


def main() -> None:
    parser = argparse.ArgumentParser(description=__doc__.splitlines()[0])
    parser.add_argument("--seeds", type=int, default=20)
    parser.add_argument("--workers", type=int)
    parser.add_argument("--scenario-seed", type=int, default=0)
    parser.add_argument("--skip-sweep", action="store_true")
    parser.add_argument("--skip-compare", action="store_true")
    parser.add_argument("--out", type=Path, help="write the report as markdown")
    args = parser.parse_args()
    report = "\n".join(asyncio.run(_run(args))) + "\n"
    print(report, end="")
    if args.out is not None:
        args.out.write_text(report, encoding="utf-8")


if __name__ == "__main__":
    main()
