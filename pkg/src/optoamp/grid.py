"""Two-dimensional parameter grids and a deterministic parallel map."""

from __future__ import annotations

import os
from concurrent.futures import ProcessPoolExecutor
from dataclasses import dataclass

import numpy as np

from .errors import EmptyGrid, ParamError


@dataclass(frozen=True)
class SweepGrid:
    """Scalar metric over a 2-D parameter plane.

    ``values`` and ``flags`` have shape ``(len(y_values), len(x_values))``.
    A nonempty flag is a reason code (``"unstable"``, ``"singular"``,
    ``"no_peak"``, ...) and the matching value is NaN.
    """

    x_name: str
    x_values: np.ndarray
    y_name: str
    y_values: np.ndarray
    values: np.ndarray
    flags: np.ndarray
    metric_name: str

    def __post_init__(self):
        shape = (len(self.y_values), len(self.x_values))
        if self.values.shape != shape or self.flags.shape != shape:
            raise ValueError(f"cell arrays must have shape {shape}")

    @property
    def valid(self) -> np.ndarray:
        return self.flags == ""

    def to_compact(self) -> dict:
        """Axes plus row-major values (``None`` for flagged cells)."""
        rows = [
            [None if flag else float(v) for v, flag in zip(vrow, frow)]
            for vrow, frow in zip(self.values, self.flags)
        ]
        return {
            "metric": self.metric_name,
            "x": {"name": self.x_name, "values": [float(v) for v in self.x_values]},
            "y": {"name": self.y_name, "values": [float(v) for v in self.y_values]},
            "values": rows,
        }


def make_axis(values, name: str = "grid") -> np.ndarray:
    """Validate a sorted, finite, nonempty axis."""
    axis = np.asarray(values, dtype=float).ravel()
    if axis.size == 0:
        raise EmptyGrid(f"{name} is empty")
    if not np.all(np.isfinite(axis)):
        raise ParamError(f"{name} contains non-finite values")
    if np.any(np.diff(axis) <= 0):
        raise ParamError(f"{name} must be strictly increasing")
    return axis


def resolve_jobs(jobs: int | None) -> int:
    if jobs is None:
        return os.cpu_count() or 1
    if jobs < 1:
        raise ParamError(f"jobs must be >= 1, got {jobs!r}")
    return jobs


def ordered_map(func, items, jobs: int = 1) -> list:
    """``list(map(func, items))``, optionally over a process pool; output order follows input."""
    items = list(items)
    if jobs <= 1 or len(items) < 2:
        return [func(item) for item in items]
    chunksize = max(1, len(items) // (4 * jobs))
    with ProcessPoolExecutor(max_workers=jobs) as pool:
        return list(pool.map(func, items, chunksize=chunksize))
