"""Helper functions for SarPomcp."""

from __future__ import annotations

import math
from statistics import fmean, stdev
from typing import TYPE_CHECKING

import numpy as np

if TYPE_CHECKING:
    from collections.abc import Sequence


def mean_and_standard_error(values: Sequence[float]) -> tuple[float, float | None]:
    """Return the mean and the standard error of the mean.

    The standard error is undefined for a single value and returned as None.
    """
    mean = fmean(values)
    if len(values) < 2:
        return mean, None
    return mean, stdev(values) / math.sqrt(len(values))


def episode_streams(seed: int, count: int) -> list[np.random.Generator]:
    """Spawn independent generators for the random streams of one episode."""
    return [
        np.random.default_rng(child)
        for child in np.random.SeedSequence(seed).spawn(count)
    ]


def format_optional(value: float | None, digits: int = 3) -> str:
    """Format a float for a table cell, rendering None as an empty cell."""
    if value is None:
        return ""
    return f"{value:.{digits}f}"
