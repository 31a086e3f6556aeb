"""CSV and JSON writers for results.

CSV files are UTF-8 with a header row and LF line endings; numbers carry 17
significant digits so that doubles round-trip.
"""

from __future__ import annotations

import json
import math
from pathlib import Path

import numpy as np

from .grid import SweepGrid
from .scattering import CoefficientSpectrum, GainSpectrum
from .stability import BoundaryPoint, verdict_name

RATIO_HEADER = ("omega", "abs_B_over_A", "abs_C_over_A", "abs_D_over_A", "abs_E_over_A", "abs_F_over_A")


def fmt(x) -> str:
    x = float(x)
    if math.isnan(x):
        return "nan"
    return format(x, ".17g")


def write_csv(path, header, rows) -> Path:
    path = Path(path)
    lines = [",".join(header)]
    lines.extend(",".join(row) for row in rows)
    path.write_text("\n".join(lines) + "\n", encoding="utf-8", newline="\n")
    return path


def _jsonable(obj):
    if isinstance(obj, dict):
        return {k: _jsonable(v) for k, v in obj.items()}
    if isinstance(obj, (list, tuple)):
        return [_jsonable(v) for v in obj]
    if isinstance(obj, (np.floating, float)):
        return None if not math.isfinite(obj) else float(obj)
    if isinstance(obj, np.integer):
        return int(obj)
    if isinstance(obj, np.bool_):
        return bool(obj)
    return obj


def write_json(path, obj) -> Path:
    path = Path(path)
    text = json.dumps(_jsonable(obj), indent=2, allow_nan=False)
    path.write_text(text + "\n", encoding="utf-8", newline="\n")
    return path


def spectrum_csv(path, spec: GainSpectrum) -> Path:
    return write_csv(path, ("omega", "gain"), ((fmt(w), fmt(g)) for w, g in zip(spec.omega, spec.gain)))


def ratios_csv(path, spec: CoefficientSpectrum) -> Path:
    ratios = spec.ratios()
    rows = ([fmt(w)] + [fmt(r) for r in row] for w, row in zip(spec.omega, ratios))
    return write_csv(path, RATIO_HEADER, rows)


def stability_map_csv(path, grid: SweepGrid) -> Path:
    rows = []
    for i, g in enumerate(grid.y_values):
        for j, gamma in enumerate(grid.x_values):
            rows.append((fmt(gamma), fmt(g), verdict_name(grid.values[i, j])))
    return write_csv(path, ("gamma", "g", "verdict"), rows)


def boundary_csv(path, curves: list[tuple[float, BoundaryPoint]]) -> Path:
    rows = ((fmt(gamma), fmt(b.g_crit), fmt(b.omega_crit), b.branch) for gamma, b in curves)
    return write_csv(path, ("gamma", "g_crit", "omega_crit", "branch"), rows)


def sweep_csv(path, grid: SweepGrid) -> Path:
    rows = []
    for i, y in enumerate(grid.y_values):
        for j, x in enumerate(grid.x_values):
            rows.append((fmt(x), fmt(y), fmt(grid.values[i, j]), grid.flags[i, j]))
    return write_csv(path, ("x", "y", "value", "flag"), rows)


def contour_csv(path, polylines) -> Path:
    rows = []
    for k, line in enumerate(polylines):
        rows.extend((str(k), fmt(x), fmt(y)) for x, y in line)
    return write_csv(path, ("polyline_id", "x", "y"), rows)


def tune_csv(path, curve) -> Path:
    return write_csv(path, ("j", "center_frequency"), ((fmt(j), fmt(f)) for j, f in curve))
