"""Map geometry, obstacle validity and belief maps for SarPomcp.

Arrays over the map are indexed ``[x, y]``: belief grids by ``[i, j]`` and
rasters by ``[ix, iy]``, with ``i``/``x`` growing east and ``j``/``y``
growing north.
"""

from __future__ import annotations

from collections import OrderedDict
from dataclasses import dataclass, field, replace
from enum import StrEnum
from functools import cached_property
import logging
import math
from typing import TYPE_CHECKING, NamedTuple

import numpy as np
import tcod.path

from sarpomcp.const import DISTANCE_FIELD_CACHE_SIZE
from sarpomcp.exceptions import DomainError

if TYPE_CHECKING:
    from collections.abc import Iterable, Iterator, Sequence

_LOGGER = logging.getLogger(__package__)

# Distance-field value of points cut off from the root.
UNREACHABLE = int(np.iinfo(np.int32).max)


class Cell(NamedTuple):
    """A cell of the N x N planning grid."""

    i: int
    j: int


class FinePosition(NamedTuple):
    """A position on the fine map, in meters."""

    x: float
    y: float
    z: float = 0.0


@dataclass(frozen=True, slots=True)
class MapGeometry:
    """Square map of side L split into an N x N grid and a fine raster."""

    side_length_m: float
    grid_n: int
    raster_m: float = 1.0

    def __post_init__(self) -> None:
        """Validate the geometry."""
        if self.side_length_m <= 0:
            msg = f"Side length must be positive, got {self.side_length_m}"
            raise DomainError(msg)
        if self.grid_n < 1:
            msg = f"Grid must have at least one cell, got {self.grid_n}"
            raise DomainError(msg)
        if self.raster_m <= 0:
            msg = f"Raster resolution must be positive, got {self.raster_m}"
            raise DomainError(msg)
        per_cell = self.cell_size_m / self.raster_m
        if abs(per_cell - round(per_cell)) > 1e-9 or round(per_cell) < 1:
            msg = (
                f"Raster resolution {self.raster_m} m does not divide "
                f"the {self.cell_size_m} m cell"
            )
            raise DomainError(msg)

    @property
    def cell_size_m(self) -> float:
        """Side of one grid cell in meters."""
        return self.side_length_m / self.grid_n

    @property
    def cell_raster(self) -> int:
        """Raster points along one side of a cell."""
        return round(self.cell_size_m / self.raster_m)

    @property
    def raster_n(self) -> int:
        """Raster points along one side of the map."""
        return self.cell_raster * self.grid_n

    def contains(self, pos: FinePosition) -> bool:
        """Return whether the position lies on the map."""
        return (
            0.0 <= pos.x < self.side_length_m
            and 0.0 <= pos.y < self.side_length_m
            and pos.z >= 0.0
        )

    def in_grid(self, cell: Cell) -> bool:
        """Return whether the cell lies on the grid."""
        return 0 <= cell.i < self.grid_n and 0 <= cell.j < self.grid_n

    def center(self, cell: Cell, z: float = 0.0) -> FinePosition:
        """Return the geometric center of a cell."""
        size = self.cell_size_m
        return FinePosition((cell.i + 0.5) * size, (cell.j + 0.5) * size, z)

    def raster_index(self, pos: FinePosition) -> tuple[int, int]:
        """Return the raster point at or south-west of a position."""
        return (
            min(int(pos.x // self.raster_m), self.raster_n - 1),
            min(int(pos.y // self.raster_m), self.raster_n - 1),
        )

    def raster_point(self, ix: int, iy: int, z: float = 0.0) -> FinePosition:
        """Return the fine position of a raster point."""
        return FinePosition(ix * self.raster_m, iy * self.raster_m, z)

    def cell_raster_slice(self, cell: Cell) -> tuple[slice, slice]:
        """Return the raster index ranges covered by a cell."""
        k = self.cell_raster
        return (
            slice(cell.i * k, (cell.i + 1) * k),
            slice(cell.j * k, (cell.j + 1) * k),
        )

    def cells(self) -> Iterator[Cell]:
        """Iterate over all cells, column by column."""
        for i in range(self.grid_n):
            for j in range(self.grid_n):
                yield Cell(i, j)


def cell_of(pos: FinePosition, geom: MapGeometry) -> Cell:
    """Map a fine position onto its grid cell."""
    if not geom.contains(pos):
        msg = f"Position {pos} lies outside the {geom.side_length_m} m map"
        raise DomainError(msg)
    size = geom.cell_size_m
    return Cell(
        min(math.floor(pos.x / size), geom.grid_n - 1),
        min(math.floor(pos.y / size), geom.grid_n - 1),
    )


@dataclass(frozen=True, slots=True)
class NoFlyZone:
    """Axis-aligned rectangle the agent must never enter.

    Containment is half-open, so a zone on cell bounds covers exactly the
    raster points of those cells.
    """

    x_min: float
    y_min: float
    x_max: float
    y_max: float

    def __post_init__(self) -> None:
        """Validate the rectangle."""
        if not (self.x_min < self.x_max and self.y_min < self.y_max):
            msg = f"Degenerate no-fly zone {self}"
            raise DomainError(msg)

    @classmethod
    def covering(cls, cell: Cell, geom: MapGeometry) -> NoFlyZone:
        """Return the zone covering exactly one cell."""
        size = geom.cell_size_m
        return cls(
            cell.i * size, cell.j * size, (cell.i + 1) * size, (cell.j + 1) * size
        )

    def clipped(self, geom: MapGeometry) -> NoFlyZone:
        """Return the zone clipped to the map bounds."""
        side = geom.side_length_m
        return NoFlyZone(
            max(self.x_min, 0.0),
            max(self.y_min, 0.0),
            min(self.x_max, side),
            min(self.y_max, side),
        )

    def contains(self, pos: FinePosition) -> bool:
        """Return whether the position lies inside the zone."""
        return self.x_min <= pos.x < self.x_max and self.y_min <= pos.y < self.y_max

    def raster_mask(self, geom: MapGeometry) -> np.ndarray:
        """Return the boolean raster of points inside the zone."""
        mask = np.zeros((geom.raster_n, geom.raster_n), dtype=bool)
        x0, x1 = _raster_span(self.x_min, self.x_max, geom)
        y0, y1 = _raster_span(self.y_min, self.y_max, geom)
        mask[x0:x1, y0:y1] = True
        return mask


def _raster_span(low: float, high: float, geom: MapGeometry) -> tuple[int, int]:
    """Return the raster index range whose coordinates fall in [low, high)."""
    res = geom.raster_m
    start = max(math.ceil(low / res - 1e-9), 0)
    stop = min(math.ceil(high / res - 1e-9), geom.raster_n)
    return start, max(start, stop)


@dataclass(frozen=True, eq=False)
class ObstacleMap:
    """Obstacle top heights on the fine raster."""

    heightmap: np.ndarray

    def __post_init__(self) -> None:
        """Validate the heightmap and freeze it."""
        shape = self.heightmap.shape
        if len(shape) != 2 or shape[0] != shape[1]:
            msg = f"Heightmap must be square, got shape {self.heightmap.shape}"
            raise DomainError(msg)
        if (self.heightmap < 0).any():
            msg = "Obstacle heights must be non-negative"
            raise DomainError(msg)
        self.heightmap.flags.writeable = False

    @classmethod
    def empty(cls, geom: MapGeometry) -> ObstacleMap:
        """Return a map without obstacles."""
        return cls(np.zeros((geom.raster_n, geom.raster_n)))

    @classmethod
    def from_rectangles(
        cls,
        geom: MapGeometry,
        rectangles: Iterable[tuple[float, float, float, float, float]],
    ) -> ObstacleMap:
        """Rasterize (x_min, y_min, x_max, y_max, height) building footprints."""
        heightmap = np.zeros((geom.raster_n, geom.raster_n))
        for x_min, y_min, x_max, y_max, height in rectangles:
            x0, x1 = _raster_span(x_min, x_max, geom)
            y0, y1 = _raster_span(y_min, y_max, geom)
            block = heightmap[x0:x1, y0:y1]
            np.maximum(block, height, out=block)
        return cls(heightmap)


def valid_mask(
    omap: ObstacleMap,
    zones: Iterable[NoFlyZone],
    h: float,
    geom: MapGeometry,
) -> np.ndarray:
    """Return the raster of points that are valid at altitude ``h``."""
    if omap.heightmap.shape != (geom.raster_n, geom.raster_n):
        msg = (
            f"Heightmap shape {omap.heightmap.shape} does not cover the "
            f"{geom.raster_n} x {geom.raster_n} raster"
        )
        raise DomainError(msg)
    mask = omap.heightmap < h
    for zone in zones:
        mask &= ~zone.raster_mask(geom)
    return mask


def valid_positions(
    cell: Cell,
    h: float,
    omap: ObstacleMap,
    zones: Iterable[NoFlyZone],
    geom: MapGeometry,
) -> frozenset[FinePosition]:
    """Return the raster points of a cell that are valid at altitude ``h``."""
    if not geom.in_grid(cell):
        msg = f"Cell {cell} lies outside the {geom.grid_n} x {geom.grid_n} grid"
        raise DomainError(msg)
    xs, ys = geom.cell_raster_slice(cell)
    block = valid_mask(omap, zones, h, geom)[xs, ys]
    return frozenset(
        geom.raster_point(int(ix) + xs.start, int(iy) + ys.start, h)
        for ix, iy in np.argwhere(block)
    )


class RasterGraph:
    """4-connected graph over the valid points of a raster.

    Shortest-path queries are answered from ``tcod`` distance fields. A
    field holds the step count from every point to one root; the most
    recently used fields are kept, so repeated queries toward the same
    point are array lookups.
    """

    def __init__(self, valid: np.ndarray) -> None:
        """Build the graph from a boolean ``[x, y]`` raster."""
        self.width, self.height = valid.shape
        self.cost = valid.astype(np.int8)
        self._open: list[bool] = valid.ravel().tolist()
        blocked = np.zeros((self.width + 1, self.height + 1), dtype=np.int64)
        blocked[1:, 1:] = np.cumsum(np.cumsum(~valid, axis=0), axis=1)
        self._blocked: list[list[int]] = blocked.tolist()
        self._fields: OrderedDict[tuple[int, int], np.ndarray] = OrderedDict()

    def is_open(self, ix: int, iy: int) -> bool:
        """Return whether a raster point is valid."""
        return (
            0 <= ix < self.width
            and 0 <= iy < self.height
            and self._open[ix * self.height + iy]
        )

    def box_clear(self, x0: int, y0: int, x1: int, y1: int) -> bool:
        """Return whether the inclusive box between two corners is all valid."""
        x0, x1 = min(x0, x1), max(x0, x1) + 1
        y0, y1 = min(y0, y1), max(y0, y1) + 1
        blocked = self._blocked
        return (
            blocked[x1][y1] - blocked[x0][y1] - blocked[x1][y0] + blocked[x0][y0]
        ) == 0

    def distance_field(self, root: tuple[int, int]) -> np.ndarray:
        """Return the step counts to ``root``, ``UNREACHABLE`` where cut off."""
        distances = self._fields.get(root)
        if distances is not None:
            self._fields.move_to_end(root)
            return distances
        distances = tcod.path.maxarray((self.width, self.height), dtype=np.int32)
        distances[root] = 0
        tcod.path.dijkstra2d(
            distances, self.cost, cardinal=1, diagonal=None, out=distances
        )
        self._fields[root] = distances
        if len(self._fields) > DISTANCE_FIELD_CACHE_SIZE:
            self._fields.popitem(last=False)
        return distances

    def steps_between(
        self, start: tuple[int, int], goal: tuple[int, int]
    ) -> int | None:
        """Return the length of a shortest path in raster steps, or None."""
        # Distances are symmetric; reuse whichever endpoint already has a field.
        root, other = (start, goal) if start in self._fields else (goal, start)
        steps = int(self.distance_field(root)[other])
        return None if steps == UNREACHABLE else steps

    def path_between(
        self, start: tuple[int, int], goal: tuple[int, int]
    ) -> list[tuple[int, int]] | None:
        """Return a shortest path from ``start`` to ``goal``, endpoints included."""
        to_goal = self.distance_field(goal)
        if to_goal[start] == UNREACHABLE:
            return None
        steps = tcod.path.hillclimb2d(to_goal, start, cardinal=True, diagonal=False)
        return [(int(x), int(y)) for x, y in steps.tolist()]


@dataclass(frozen=True, eq=False)
class GridEnvironment:
    """Geometry, obstacles and no-fly zones seen at one altitude."""

    geom: MapGeometry
    obstacles: ObstacleMap
    zones: tuple[NoFlyZone, ...] = ()
    altitude: float = 10.0
    dynamic_cells: frozenset[Cell] = field(default_factory=frozenset)

    @cached_property
    def valid(self) -> np.ndarray:
        """Boolean raster of valid points."""
        mask = valid_mask(self.obstacles, self.zones, self.altitude, self.geom)
        mask.flags.writeable = False
        return mask

    @cached_property
    def graph(self) -> RasterGraph:
        """Path-finding graph over the valid raster."""
        return RasterGraph(self.valid)

    @cached_property
    def valid_counts(self) -> np.ndarray:
        """Number of valid positions per cell."""
        k = self.geom.cell_raster
        n = self.geom.grid_n
        return self.valid.reshape(n, k, n, k).sum(axis=(1, 3))

    @cached_property
    def open_cells(self) -> frozenset[Cell]:
        """Cells holding at least one valid position."""
        return frozenset(
            Cell(int(i), int(j)) for i, j in np.argwhere(self.valid_counts > 0)
        )

    def count_valid(self, cell: Cell) -> int:
        """Return the number of valid positions in a cell."""
        return int(self.valid_counts[cell.i, cell.j])

    def is_valid(self, pos: FinePosition) -> bool:
        """Return whether a fine position is a valid raster point."""
        if not self.geom.contains(pos):
            return False
        return self.graph.is_open(*self.geom.raster_index(pos))

    def with_altitude(self, altitude: float) -> GridEnvironment:
        """Return the environment seen from another altitude."""
        return replace(self, altitude=altitude)

    def with_no_fly_cell(self, cell: Cell) -> GridEnvironment:
        """Return the environment with one more dynamic no-fly cell."""
        if cell in self.dynamic_cells:
            return self
        _LOGGER.warning("Designating cell %s as a no-fly zone", cell)
        return replace(
            self,
            zones=(*self.zones, NoFlyZone.covering(cell, self.geom)),
            dynamic_cells=self.dynamic_cells | {cell},
        )

    def nearest_valid(self, cell: Cell, pos: FinePosition) -> FinePosition | None:
        """Return the valid point of a cell closest to ``pos``."""
        xs, ys = self.geom.cell_raster_slice(cell)
        points = np.argwhere(self.valid[xs, ys])
        if not len(points):
            return None
        res = self.geom.raster_m
        coords = (points + (xs.start, ys.start)) * res
        dist = np.hypot(coords[:, 0] - pos.x, coords[:, 1] - pos.y)
        best = points[int(np.argmin(dist))]
        return self.geom.raster_point(
            int(best[0]) + xs.start, int(best[1]) + ys.start, self.altitude
        )

    @cached_property
    def _anchors(self) -> dict[Cell, FinePosition | None]:
        return {}

    def anchor(self, cell: Cell) -> FinePosition | None:
        """Return the valid point closest to the cell center."""
        anchors = self._anchors
        if cell not in anchors:
            anchors[cell] = self.nearest_valid(cell, self.geom.center(cell))
        return anchors[cell]


class BeliefKind(StrEnum):
    """Shape of an initial belief map."""

    UNIFORM = "uniform"
    PEAKS = "peaks"
    POINTS = "points"


class Peak(NamedTuple):
    """A belief peak centered on a cell."""

    center: Cell
    spread: float = 2.0
    weight: float = 1.0


@dataclass(frozen=True, eq=False)
class BeliefMap:
    """Normalized target probability over the grid.

    ``visited`` marks cells already searched; an all-zero ``probs`` is the
    sentinel for a belief with no mass left.
    """

    probs: np.ndarray
    visited: np.ndarray

    def __post_init__(self) -> None:
        """Validate the map and freeze its arrays."""
        if self.probs.shape != self.visited.shape or self.probs.ndim != 2:
            msg = "Belief and visited grids must share one 2D shape"
            raise DomainError(msg)
        if (self.probs < 0).any() or (self.probs > 1 + 1e-12).any():
            msg = "Belief entries must lie in [0, 1]"
            raise DomainError(msg)
        self.probs.flags.writeable = False
        self.visited.flags.writeable = False

    @classmethod
    def from_weights(cls, weights: np.ndarray) -> BeliefMap:
        """Normalize non-negative weights into a belief map."""
        total = float(weights.sum())
        if total <= 0 or not math.isfinite(total):
            msg = "Belief has no probability mass"
            raise DomainError(msg)
        return cls(weights / total, np.zeros(weights.shape, dtype=bool))

    @property
    def grid_n(self) -> int:
        """Side of the grid."""
        return int(self.probs.shape[0])

    @property
    def total(self) -> float:
        """Total probability mass."""
        return float(self.probs.sum())

    @property
    def is_sentinel(self) -> bool:
        """Return whether the belief carries no mass at all."""
        return not self.probs.any()

    @property
    def support_size(self) -> int:
        """Number of cells with positive probability."""
        return int(np.count_nonzero(self.probs))

    def at(self, cell: Cell) -> float:
        """Return the probability of a cell."""
        return float(self.probs[cell.i, cell.j])

    def nonzero_cells(self) -> list[Cell]:
        """Return the cells with positive probability in index order."""
        return [Cell(int(i), int(j)) for i, j in np.argwhere(self.probs > 0)]


def make_belief(
    kind: BeliefKind,
    peak_spec: Sequence[Peak],
    geom: MapGeometry,
) -> BeliefMap:
    """Build an initial belief map.

    Peaks are isotropic Gaussian bumps evaluated at cell centers, in cell
    units; point beliefs put each weight on its center cell only.
    """
    n = geom.grid_n
    if kind is BeliefKind.UNIFORM:
        return BeliefMap.from_weights(np.ones((n, n)))
    if not peak_spec:
        msg = f"Belief kind {kind} needs at least one peak"
        raise DomainError(msg)
    weights = np.zeros((n, n))
    ii, jj = np.meshgrid(np.arange(n), np.arange(n), indexing="ij")
    for peak in peak_spec:
        if not geom.in_grid(peak.center):
            msg = f"Peak center {peak.center} lies outside the grid"
            raise DomainError(msg)
        if peak.weight < 0:
            msg = f"Peak weight must be non-negative, got {peak.weight}"
            raise DomainError(msg)
        if kind is BeliefKind.POINTS:
            weights[peak.center.i, peak.center.j] += peak.weight
            continue
        if peak.spread <= 0:
            msg = f"Peak spread must be positive, got {peak.spread}"
            raise DomainError(msg)
        dist2 = (ii - peak.center.i) ** 2 + (jj - peak.center.j) ** 2
        weights += peak.weight * np.exp(-dist2 / (2.0 * peak.spread**2))
    return BeliefMap.from_weights(weights)


def belief_visit_update(
    b: BeliefMap,
    visited: Cell,
    target_found: bool,  # noqa: FBT001
    *,
    targets_remaining: bool = True,
) -> BeliefMap:
    """Apply the negative observation of searching one cell.

    The searched cell is zeroed and the rest renormalized. When no mass is
    left while targets are still missing, the belief restarts as uniform
    over the cells never searched.
    """
    probs = b.probs.copy()
    seen = b.visited.copy()
    seen[visited.i, visited.j] = True
    probs[visited.i, visited.j] = 0.0
    total = float(probs.sum())
    if total > 0:
        probs /= total
    elif targets_remaining:
        fresh = ~seen
        if not fresh.any():
            fresh = np.ones_like(seen)
        _LOGGER.warning(
            "Belief exhausted after searching %s (target found: %s), "
            "resetting to uniform over %d unsearched cells",
            visited,
            target_found,
            int(fresh.sum()),
        )
        probs = fresh / fresh.sum()
    return BeliefMap(probs, seen)
