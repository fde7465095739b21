"""Scenario files: loading, validation, world building and generation."""

from __future__ import annotations

from dataclasses import dataclass, replace
import logging
from typing import TYPE_CHECKING

from mashumaro.exceptions import MissingField
import numpy as np
import yaml

from sarpomcp.const import (
    DEFAULT_GRID_N,
    DEFAULT_SIDE_LENGTH_M,
    DEFAULT_TARGET_COUNT,
)
from sarpomcp.exceptions import ConfigurationError, DomainError
from sarpomcp.grid_world import (
    BeliefKind,
    Cell,
    FinePosition,
    GridEnvironment,
    MapGeometry,
    NoFlyZone,
    ObstacleMap,
    Peak,
    cell_of,
    make_belief,
)
from sarpomcp.models import (
    BeliefPreset,
    BeliefSpec,
    BuildingSpec,
    MapSpec,
    PeakSpec,
    PositionSpec,
    Rectangle,
    Scenario,
    TargetSpec,
)

if TYPE_CHECKING:
    from pathlib import Path

    from sarpomcp.grid_world import BeliefMap

_LOGGER = logging.getLogger(__package__)

BUILDING_COUNT_RANGE = (6, 13)
BUILDING_SIDE_RANGE_M = (10, 40)
BUILDING_HEIGHT_RANGE_M = (5, 40)
NO_FLY_COUNT_RANGE = (0, 3)
NO_FLY_SIDE_RANGE_CELLS = (1, 3)
_MAX_PLACEMENT_ATTEMPTS = 1000


@dataclass(frozen=True, eq=False)
class World:
    """The static world a scenario describes."""

    geom: MapGeometry
    obstacles: ObstacleMap
    zones: tuple[NoFlyZone, ...]
    belief: BeliefMap

    def environment(self, altitude: float) -> GridEnvironment:
        """Return the world seen from ``altitude``."""
        return GridEnvironment(self.geom, self.obstacles, self.zones, altitude)


def build_world(sc: Scenario) -> World:
    """Turn a scenario into geometry, obstacles, zones and the initial belief."""
    try:
        geom = MapGeometry(sc.map.side_length_m, sc.map.grid_n, sc.map.raster_m)
        obstacles = ObstacleMap.from_rectangles(
            geom,
            [(b.x_min, b.y_min, b.x_max, b.y_max, b.height_m) for b in sc.buildings],
        )
        zones = tuple(
            NoFlyZone(z.x_min, z.y_min, z.x_max, z.y_max).clipped(geom)
            for z in sc.no_fly_zones
        )
        peaks = [Peak(Cell(p.i, p.j), p.spread, p.weight) for p in sc.belief.peaks]
        belief = make_belief(sc.belief.kind, peaks, geom)
    except DomainError as err:
        msg = f"Scenario {sc.name!r} is invalid: {err}"
        raise ConfigurationError(msg) from err
    return World(geom, obstacles, zones, belief)


def validate_scenario(sc: Scenario) -> World:
    """Check a scenario for contradictions and return its world."""
    world = build_world(sc)
    start = FinePosition(sc.start.x, sc.start.y, sc.height.h_init_m)
    if not world.environment(sc.height.h_init_m).is_valid(start):
        msg = (
            f"Scenario {sc.name!r}: start ({sc.start.x}, {sc.start.y}) is not a "
            f"valid position at {sc.height.h_init_m} m"
        )
        raise ConfigurationError(msg)
    for pos in sc.targets.positions or []:
        target = FinePosition(pos.x, pos.y)
        if not world.geom.contains(target):
            msg = f"Scenario {sc.name!r}: target ({pos.x}, {pos.y}) is off the map"
            raise ConfigurationError(msg)
        if any(zone.contains(target) for zone in world.zones):
            msg = (
                f"Scenario {sc.name!r}: target ({pos.x}, {pos.y}) lies inside "
                "a no-fly zone"
            )
            raise ConfigurationError(msg)
    return world


def place_targets(
    sc: Scenario,
    world: World,
    rng: np.random.Generator,
) -> list[FinePosition]:
    """Return pinned target positions or sample them from the initial belief.

    Sampled targets land on cells the agent can enter at the ceiling
    altitude, at a random valid point of the drawn cell.
    """
    if sc.targets.positions is not None:
        return [FinePosition(p.x, p.y) for p in sc.targets.positions]
    ceiling = world.environment(sc.height.h_max_m)
    weights = np.where(ceiling.valid_counts > 0, world.belief.probs, 0.0).ravel()
    total = float(weights.sum())
    if total <= 0:
        msg = f"Scenario {sc.name!r}: no reachable cell carries belief mass"
        raise ConfigurationError(msg)
    n = world.geom.grid_n
    positions = []
    for flat in rng.choice(weights.size, size=sc.targets.count, p=weights / total):
        cell = Cell(*divmod(int(flat), n))
        xs, ys = world.geom.cell_raster_slice(cell)
        points = np.argwhere(ceiling.valid[xs, ys])
        ix, iy = points[int(rng.integers(len(points)))]
        point = world.geom.raster_point(int(ix) + xs.start, int(iy) + ys.start)
        positions.append(point)
    _LOGGER.debug(
        "Placed targets in cells %s",
        [cell_of(p, world.geom) for p in positions],
    )
    return positions


def load_scenario(path: Path) -> Scenario:
    """Read a scenario file."""
    try:
        return Scenario.from_yaml(path.read_text(encoding="utf-8"))
    except (yaml.YAMLError, MissingField, ValueError, TypeError) as err:
        msg = f"Cannot read scenario {path}: {err}"
        raise ConfigurationError(msg) from err


def save_scenario(sc: Scenario, path: Path) -> None:
    """Write a scenario file."""
    path.write_text(sc.to_yaml(), encoding="utf-8")


def belief_preset(kind: BeliefPreset, grid_n: int) -> BeliefSpec:
    """Return the belief block of one experiment belief family."""
    if kind is BeliefPreset.UNIFORM:
        return BeliefSpec()
    spread = grid_n / 10
    low, high = grid_n // 4, (3 * grid_n) // 4
    if kind is BeliefPreset.ONE_PEAK:
        centers = [(high, high)]
    else:
        centers = [(low, high), (high, high), (high, low)]
    return BeliefSpec(
        kind=BeliefKind.PEAKS,
        peaks=[PeakSpec(i, j, spread=spread) for i, j in centers],
    )


def with_belief(sc: Scenario, kind: BeliefPreset) -> Scenario:
    """Return the scenario with its belief replaced by a preset."""
    return replace(
        sc,
        name=f"{sc.name}-{kind}",
        belief=belief_preset(kind, sc.map.grid_n),
    )


@dataclass
class ScenarioOverrides:
    """Settings a generated scenario should use instead of the defaults."""

    side_length_m: float = DEFAULT_SIDE_LENGTH_M
    grid_n: int = DEFAULT_GRID_N
    target_count: int = DEFAULT_TARGET_COUNT
    target_positions: list[PositionSpec] | None = None
    no_fly_zone_count: int | None = None


def _random_building(rng: np.random.Generator, side: float) -> BuildingSpec:
    width, depth = rng.integers(
        BUILDING_SIDE_RANGE_M[0], BUILDING_SIDE_RANGE_M[1] + 1, size=2
    )
    x0 = int(rng.integers(0, int(side) - int(width) + 1))
    y0 = int(rng.integers(0, int(side) - int(depth) + 1))
    height = rng.integers(BUILDING_HEIGHT_RANGE_M[0], BUILDING_HEIGHT_RANGE_M[1] + 1)
    return BuildingSpec(
        x_min=float(x0),
        y_min=float(y0),
        x_max=float(x0 + width),
        y_max=float(y0 + depth),
        height_m=float(height),
    )


def _random_zone(rng: np.random.Generator, grid_n: int, cell: float) -> Rectangle:
    wide, tall = rng.integers(
        NO_FLY_SIDE_RANGE_CELLS[0], NO_FLY_SIDE_RANGE_CELLS[1] + 1, size=2
    )
    wide, tall = min(int(wide), grid_n), min(int(tall), grid_n)
    i0 = int(rng.integers(0, grid_n - wide + 1))
    j0 = int(rng.integers(0, grid_n - tall + 1))
    return Rectangle(
        x_min=i0 * cell,
        y_min=j0 * cell,
        x_max=(i0 + wide) * cell,
        y_max=(j0 + tall) * cell,
    )


def _overlaps_start(rect: Rectangle, cell: float) -> bool:
    return rect.x_min < cell and rect.y_min < cell


def gen_scenario(
    kind: BeliefPreset,
    seed: int,
    overrides: ScenarioOverrides | None = None,
) -> Scenario:
    """Generate a random city block scenario, fully determined by ``seed``.

    Buildings and no-fly zones keep clear of the start cell in the
    south-west corner.
    """
    overrides = overrides or ScenarioOverrides()
    rng = np.random.default_rng(seed)
    side = overrides.side_length_m
    grid_n = overrides.grid_n
    cell = side / grid_n
    if cell < BUILDING_SIDE_RANGE_M[0] / 2:
        msg = f"Cells of {cell} m are too small for generated buildings"
        raise ConfigurationError(msg)

    buildings: list[BuildingSpec] = []
    wanted = int(rng.integers(BUILDING_COUNT_RANGE[0], BUILDING_COUNT_RANGE[1] + 1))
    for _ in range(_MAX_PLACEMENT_ATTEMPTS):
        if len(buildings) == wanted:
            break
        building = _random_building(rng, side)
        if not _overlaps_start(building, cell):
            buildings.append(building)

    zone_count = overrides.no_fly_zone_count
    if zone_count is None:
        zone_count = int(rng.integers(NO_FLY_COUNT_RANGE[0], NO_FLY_COUNT_RANGE[1] + 1))
    zones: list[Rectangle] = []
    for _ in range(_MAX_PLACEMENT_ATTEMPTS):
        if len(zones) == zone_count:
            break
        zone = _random_zone(rng, grid_n, cell)
        if not _overlaps_start(zone, cell):
            zones.append(zone)

    sc = Scenario(
        name=f"{kind}-{seed}",
        start=PositionSpec(x=cell / 2, y=cell / 2),
        map=MapSpec(side_length_m=side, grid_n=grid_n),
        buildings=buildings,
        no_fly_zones=zones,
        belief=belief_preset(kind, grid_n),
        targets=TargetSpec(
            count=overrides.target_count,
            positions=overrides.target_positions,
        ),
    )
    validate_scenario(sc)
    _LOGGER.info(
        "Generated scenario %s with %d buildings and %d no-fly zones",
        sc.name,
        len(buildings),
        len(zones),
    )
    return sc
