#!/usr/bin/env python3
"""Benchmark the raster path queries used by rollouts and navigation.

Times path-length queries on a 400 x 400 raster, open and with buildings,
and reports queries per second. The rollout pattern mirrors a planner call:
many starts priced against a few goal points near one destination.

Usage:
    poetry run python scripts/benchmark_astar.py
"""

# ruff: noqa: E402, T201  # Path setup before project imports; prints are the output

from __future__ import annotations

from pathlib import Path
import sys
import timeit

import numpy as np

project_root = Path(__file__).resolve().parent.parent
if str(project_root / "src") not in sys.path:
    sys.path.insert(0, str(project_root / "src"))

from sarpomcp.grid_world import RasterGraph
from sarpomcp.rollout import raster_path_length

RASTER = 400
QUERIES = 2000
OPEN_TARGET_QPS = 100_000
CITY_ROLLOUT_TARGET_QPS = 20_000

Query = tuple[tuple[int, int], tuple[int, int]]


def _open_raster() -> np.ndarray:
    """All points valid; every query takes the straight-line fast path."""
    return np.ones((RASTER, RASTER), dtype=bool)


def _city_raster(seed: int) -> np.ndarray:
    """Random rectangular buildings blocking about a fifth of the raster."""
    rng = np.random.default_rng(seed)
    valid = np.ones((RASTER, RASTER), dtype=bool)
    for _ in range(12):
        w, h = rng.integers(10, 41, size=2)
        x, y = rng.integers(0, RASTER - 40, size=2)
        valid[x : x + w, y : y + h] = False
    return valid


def _queries(valid: np.ndarray, count: int, seed: int) -> list[Query]:
    """Draw start/goal pairs among valid points."""
    rng = np.random.default_rng(seed)
    points = np.argwhere(valid)
    picks = rng.integers(len(points), size=(count, 2))
    return [
        ((int(points[a][0]), int(points[a][1])), (int(points[b][0]), int(points[b][1])))
        for a, b in picks
    ]


def _rollout_queries(
    valid: np.ndarray, count: int, seed: int, goals: int = 8
) -> list[Query]:
    """Draw random starts priced against a few goals close to the map center."""
    rng = np.random.default_rng(seed)
    points = np.argwhere(valid)
    near = np.argsort(np.abs(points - RASTER // 2).sum(axis=1), kind="stable")
    targets = points[near[:goals]]
    starts = points[rng.integers(len(points), size=count)]
    return [
        ((int(s[0]), int(s[1])), (int(g[0]), int(g[1])))
        for s, g in zip(starts, targets[rng.integers(goals, size=count)], strict=True)
    ]


def _bench(valid: np.ndarray, queries: list[Query]) -> float:
    """Return queries per second over the whole batch on a fresh graph."""
    graph = RasterGraph(valid)

    def run() -> None:
        for start, goal in queries:
            raster_path_length(graph, start, goal)

    run()
    number, total = timeit.Timer(run).autorange()
    return number * len(queries) / total


def main() -> None:
    city = _city_raster(7)
    scenarios = [
        ("Open 400x400", _open_raster(), _queries(_open_raster(), QUERIES, 1)),
        ("City 400x400, random", city, _queries(city, 50, 1)),
        ("City 400x400, rollout", city, _rollout_queries(city, QUERIES, 1)),
    ]
    print("Raster path benchmark")
    print("=" * 56)
    print(f"{'Scenario':<28} {'queries':>8} {'queries/s':>14}")
    print("-" * 56)
    results: dict[str, float] = {}
    for name, valid, queries in scenarios:
        results[name] = _bench(valid, queries)
        print(f"{name:<28} {len(queries):>8} {results[name]:>14,.0f}")
    print("-" * 56)

    for name, target in (
        ("Open 400x400", OPEN_TARGET_QPS),
        ("City 400x400, rollout", CITY_ROLLOUT_TARGET_QPS),
    ):
        verdict = "OK" if results[name] >= target else "BELOW TARGET"
        print(f"{name} target {target:,} queries/s: {verdict}")


if __name__ == "__main__":
    main()
