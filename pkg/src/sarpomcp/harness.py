"""Experiment orchestration: hyperparameter sweeps and planner comparisons."""

from __future__ import annotations

import asyncio
from concurrent.futures import Executor, ProcessPoolExecutor
import csv
from dataclasses import dataclass, field, fields, replace
from itertools import groupby
import json
import logging
import os
from typing import TYPE_CHECKING, Any

from sarpomcp.const import CONFIG_LINE_PREFIX, RESULT_DELIMITER
from sarpomcp.exceptions import ConfigurationError, PlanningError, SarPomcpError
from sarpomcp.helpers import format_optional, mean_and_standard_error
from sarpomcp.mission import run_episode
from sarpomcp.models import (
    BeliefPreset,
    EpisodeConfig,
    Hyperparameters,
    PlannerKind,
    ResultRow,
    Scenario,
    SummaryRow,
    SweepSpec,
    default_best_hyperparameters,
)
from sarpomcp.scenario import with_belief

if TYPE_CHECKING:
    from collections.abc import Iterable, Sequence
    from pathlib import Path

_LOGGER = logging.getLogger(__package__)

RESULT_COLUMNS = [f.name for f in fields(ResultRow)]
SUMMARY_COLUMNS = [f.name for f in fields(SummaryRow)]
WALL_COLUMN = "wall_ms_total"
_CASTS = {"int": int, "float": float}


@dataclass(frozen=True)
class Job:
    """One episode of an experiment."""

    scenario_id: str
    belief: BeliefPreset
    scenario: Scenario
    config: EpisodeConfig

    def describe(self) -> str:
        """Identify the job in messages."""
        return (
            f"scenario={self.scenario_id} belief={self.belief} "
            f"planner={self.config.planner} df={self.config.cfg.gamma} "
            f"alpha={self.config.cfg.alpha} seed={self.config.seed}"
        )


def run_job(job: Job) -> ResultRow:
    """Run one episode and flatten it into a result row."""
    try:
        result = run_episode(job.scenario, job.config)
    except ConfigurationError as err:
        msg = f"Invalid episode for {job.describe()}: {err}"
        raise ConfigurationError(msg) from err
    except SarPomcpError as err:
        msg = f"Episode failed for {job.describe()}: {err}"
        raise PlanningError(msg) from err
    return ResultRow(
        scenario_id=job.scenario_id,
        belief=job.belief,
        planner=job.config.planner,
        df=job.config.cfg.gamma,
        alpha=job.config.cfg.alpha,
        seed=job.config.seed,
        epochs_used=result.epochs_used,
        targets_found=result.targets_found,
        target_count=result.target_count,
        path_length_m=result.path_length_m,
        wall_ms_total=sum(result.wall_ms_per_epoch),
        terminated_by=result.terminated_by,
        targets=";".join(f"{p.x:g}:{p.y:g}" for p in result.target_positions),
    )


async def run_jobs(
    jobs: Sequence[Job],
    workers: int | None = None,
    executor: Executor | None = None,
) -> list[ResultRow]:
    """Run jobs on a worker pool and return their rows in (config, seed) order."""
    loop = asyncio.get_running_loop()
    pool = executor or ProcessPoolExecutor(max_workers=workers or os.cpu_count())
    _LOGGER.info("Running %d episodes", len(jobs))
    try:
        rows = await asyncio.gather(
            *(loop.run_in_executor(pool, run_job, job) for job in jobs)
        )
    finally:
        if executor is None:
            pool.shutdown()
    return sorted(rows, key=lambda row: row.sort_key)


@dataclass
class Experiment:
    """Rows, summary and resolved configuration of one experiment."""

    rows: list[ResultRow]
    summary: list[SummaryRow]
    config: dict[str, Any] = field(default_factory=dict)


def _episode_config(
    base: Scenario,
    planner: PlannerKind,
    hp: Hyperparameters,
    seed: int,
) -> EpisodeConfig:
    cfg = replace(base.planner, gamma=hp.df, alpha=hp.alpha)
    return EpisodeConfig(
        planner=planner,
        seed=seed,
        cfg=cfg,
        hc=base.height,
        max_epochs=base.episode.max_epochs,
    )


def sweep_jobs(spec: SweepSpec, base: Scenario) -> list[Job]:
    """Build one shrinking-planner job per (belief, DF, RA, seed)."""
    jobs = []
    for belief in spec.belief_kinds:
        scenario = with_belief(base, belief)
        for df in spec.discount_factors:
            for alpha in spec.alphas:
                hp = Hyperparameters(df=df, alpha=alpha)
                jobs.extend(
                    Job(
                        base.name,
                        belief,
                        scenario,
                        _episode_config(base, PlannerKind.SHRINKING, hp, seed),
                    )
                    for seed in range(spec.seeds)
                )
    return jobs


def compare_jobs(
    planners: Sequence[PlannerKind],
    beliefs: Sequence[BeliefPreset],
    seeds: int,
    base: Scenario,
    best_hyperparams: dict[BeliefPreset, Hyperparameters] | None = None,
) -> list[Job]:
    """Build one job per (belief, planner, seed) on identical scenarios."""
    if not planners or not beliefs or seeds < 1:
        msg = "A comparison needs planners, beliefs and at least one seed"
        raise ConfigurationError(msg)
    best = best_hyperparams or default_best_hyperparameters()
    jobs = []
    for belief in beliefs:
        if belief not in best:
            msg = f"No hyperparameters for belief {belief}"
            raise ConfigurationError(msg)
        scenario = with_belief(base, belief)
        for planner in planners:
            jobs.extend(
                Job(
                    base.name,
                    belief,
                    scenario,
                    _episode_config(base, planner, best[belief], seed),
                )
                for seed in range(seeds)
            )
    return jobs


def summarize(rows: Iterable[ResultRow]) -> list[SummaryRow]:
    """Aggregate rows per configuration cell and mark the best cell per belief."""

    def cell(row: ResultRow) -> tuple[str, str, float, float]:
        return (row.belief, row.planner, row.df, row.alpha)

    summary = []
    for _, group in groupby(sorted(rows, key=cell), key=cell):
        members = list(group)
        mean, se = mean_and_standard_error([r.epochs_used for r in members])
        found, _ = mean_and_standard_error([r.targets_found for r in members])
        first = members[0]
        summary.append(
            SummaryRow(
                belief=first.belief,
                planner=first.planner,
                df=first.df,
                alpha=first.alpha,
                runs=len(members),
                mean_epochs=mean,
                se_epochs=se,
                mean_targets_found=found,
            )
        )
    for belief in {row.belief for row in summary}:
        candidates = [row for row in summary if row.belief == belief]
        min(candidates, key=lambda row: row.mean_epochs).best = True
    return summary


async def sweep(
    spec: SweepSpec,
    base: Scenario,
    *,
    workers: int | None = None,
    executor: Executor | None = None,
) -> Experiment:
    """Run the hyperparameter sweep of the shrinking planner."""
    rows = await run_jobs(sweep_jobs(spec, base), workers, executor)
    config = {
        "experiment": "sweep",
        "sweep": spec.to_dict(),
        "scenario": base.to_dict(),
    }
    return Experiment(rows, summarize(rows), config)


async def compare(  # noqa: PLR0913
    planners: Sequence[PlannerKind],
    beliefs: Sequence[BeliefPreset],
    seeds: int,
    base: Scenario,
    best_hyperparams: dict[BeliefPreset, Hyperparameters] | None = None,
    *,
    workers: int | None = None,
    executor: Executor | None = None,
) -> Experiment:
    """Run every planner on the same scenarios and seeds."""
    best = best_hyperparams or default_best_hyperparameters()
    jobs = compare_jobs(planners, beliefs, seeds, base, best)
    rows = await run_jobs(jobs, workers, executor)
    config = {
        "experiment": "compare",
        "planners": [str(p) for p in planners],
        "beliefs": [str(b) for b in beliefs],
        "seeds": seeds,
        "hyperparameters": {str(b): hp.to_dict() for b, hp in best.items()},
        "scenario": base.to_dict(),
    }
    return Experiment(rows, summarize(rows), config)


def _write_header(handle: Any, config: dict[str, Any]) -> None:
    for key in sorted(config):
        line = json.dumps({key: config[key]}, sort_keys=True, default=str)
        handle.write(f"{CONFIG_LINE_PREFIX}{line}\n")


def _cell(value: Any) -> str:
    if value is None:
        return ""
    if isinstance(value, bool):
        return str(value).lower()
    return str(value)


def write_results(
    rows: Sequence[ResultRow],
    path: Path,
    config: dict[str, Any],
    *,
    wall_clock: bool = True,
) -> None:
    """Write result rows below a header holding the resolved configuration.

    Without ``wall_clock`` the only timing-dependent column is dropped, so
    the file depends on the configuration and seeds alone.
    """
    columns = [c for c in RESULT_COLUMNS if wall_clock or c != WALL_COLUMN]
    with path.open("w", encoding="utf-8", newline="") as handle:
        _write_header(handle, config)
        writer = csv.writer(handle, delimiter=RESULT_DELIMITER, lineterminator="\n")
        writer.writerow(columns)
        for row in rows:
            values = row.to_dict()
            writer.writerow([_cell(values[c]) for c in columns])


def read_results(path: Path) -> list[ResultRow]:
    """Read result rows back, skipping the configuration header."""
    with path.open(encoding="utf-8", newline="") as handle:
        lines = [line for line in handle if not line.startswith(CONFIG_LINE_PREFIX)]
    rows = []
    types = {f.name: f.type for f in fields(ResultRow)}
    for raw in csv.DictReader(lines, delimiter=RESULT_DELIMITER):
        raw.setdefault(WALL_COLUMN, "0")
        values = {
            name: _CASTS.get(str(kind), str)(raw[name]) for name, kind in types.items()
        }
        rows.append(ResultRow.from_dict(values))
    return rows


def write_summary(
    summary: Sequence[SummaryRow],
    path: Path,
    config: dict[str, Any],
) -> None:
    """Write the per-cell summary below the configuration header."""
    with path.open("w", encoding="utf-8", newline="") as handle:
        _write_header(handle, config)
        writer = csv.writer(handle, delimiter=RESULT_DELIMITER, lineterminator="\n")
        writer.writerow(SUMMARY_COLUMNS)
        for row in summary:
            values = row.to_dict()
            writer.writerow([_cell(values[c]) for c in SUMMARY_COLUMNS])


def sweep_table(summary: Sequence[SummaryRow]) -> str:
    """Render the sweep summary as a markdown table, best cell per belief in bold."""
    beliefs = [b for b in BeliefPreset if any(r.belief == b for r in summary)]
    by_cell = {(r.df, r.alpha, r.belief): r for r in summary}
    settings = sorted({(r.df, r.alpha) for r in summary})
    lines = [
        "| DF | RA | " + " | ".join(str(b) for b in beliefs) + " |",
        "| --- | --- | " + " | ".join("---" for _ in beliefs) + " |",
    ]
    for df, alpha in settings:
        cells = []
        for belief in beliefs:
            row = by_cell.get((df, alpha, belief))
            if row is None:
                cells.append("")
                continue
            text = format_optional(row.mean_epochs, 1)
            if row.se_epochs is not None:
                text += f" ± {format_optional(row.se_epochs, 1)}"
            cells.append(f"**{text}**" if row.best else text)
        lines.append(f"| {df:g} | {alpha:g} | " + " | ".join(cells) + " |")
    return "\n".join(lines) + "\n"
