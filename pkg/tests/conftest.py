"""Fixtures for SarPomcp tests."""

import numpy as np
import pytest

from sarpomcp.grid_world import (
    BeliefMap,
    GridEnvironment,
    MapGeometry,
    ObstacleMap,
)
from sarpomcp.models import Scenario
from syrupy import SnapshotAssertion

from . import load_scenario_fixture
from .syrupy import SarPomcpSnapshotExtension


@pytest.fixture(name="snapshot")
def snapshot_assertion(snapshot: SnapshotAssertion) -> SnapshotAssertion:
    """Return snapshot assertion fixture with the SarPomcp extension."""
    return snapshot.use_extension(SarPomcpSnapshotExtension)


@pytest.fixture(name="geometry")
def geometry_fixture() -> MapGeometry:
    """Return the default 400 m map split into 20 x 20 cells."""
    return MapGeometry(400.0, 20, 1.0)


@pytest.fixture(name="open_env")
def open_env_fixture(geometry: MapGeometry) -> GridEnvironment:
    """Return the default map without obstacles, seen from 10 m."""
    return GridEnvironment(geometry, ObstacleMap.empty(geometry), (), 10.0)


@pytest.fixture(name="small_env")
def small_env_fixture() -> GridEnvironment:
    """Return an open 5 x 5 grid of 4 m cells at a 2 m raster."""
    geom = MapGeometry(20.0, 5, 2.0)
    return GridEnvironment(geom, ObstacleMap.empty(geom), (), 10.0)


@pytest.fixture(name="uniform_belief")
def uniform_belief_fixture(geometry: MapGeometry) -> BeliefMap:
    """Return the uniform belief of the default map."""
    return BeliefMap.from_weights(np.ones((geometry.grid_n, geometry.grid_n)))


@pytest.fixture(name="rng")
def rng_fixture() -> np.random.Generator:
    """Return a seeded generator."""
    return np.random.default_rng(1234)


@pytest.fixture(name="corridor")
def corridor_fixture() -> Scenario:
    """Return the one-row corridor with the target at its far end."""
    return load_scenario_fixture("corridor.yaml")


@pytest.fixture(name="greedy_walk")
def greedy_walk_fixture() -> Scenario:
    """Return the 5 x 5 map with one peak on the target cell."""
    return load_scenario_fixture("greedy_walk.yaml")


@pytest.fixture(name="walled")
def walled_fixture() -> Scenario:
    """Return the 5 x 5 map with the target walled off at every altitude."""
    return load_scenario_fixture("walled.yaml")

