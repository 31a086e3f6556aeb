"""Parameter-plane sweeps, level-set contours and the tuning curve."""

from __future__ import annotations

import math
from functools import partial

import numpy as np

from .errors import ComputeError, EmptyGrid, NotStable, ParamError, UnknownMetric, UnknownParam
from .grid import SweepGrid, make_axis, ordered_map
from .metrics import DEFAULT_DELTA, center_frequency, find_peak, lorentzian_params, peak_bracket
from .model import SWEEPABLE, SystemParams, validate_params
from .scattering import coefficients
from .stability import VERDICT_CODES, boundary_g1, eigen_spectrum, is_stable

METRICS = ("gbw_analytic", "gbw_numeric", "b_over_a_at_peak", "verdict")
# metrics evaluated at G = G1 - delta rather than at the given G
_NEAR_BOUNDARY = {"gbw_analytic", "gbw_numeric", "b_over_a_at_peak"}


def evaluate_metric(p: SystemParams, metric: str, delta: float = DEFAULT_DELTA) -> float:
    """Evaluate one sweep metric at a single parameter set.

    For the near-boundary metrics the coupling in ``p`` is ignored and
    replaced with ``G1(J, kappa1, gamma) - delta``.

    Raises
    ------
    NotStable
        The operating point is not stable.
    ComputeError
        The peak could not be located.
    """
    if metric == "verdict":
        return VERDICT_CODES[eigen_spectrum(p).verdict]
    if metric not in _NEAR_BOUNDARY:
        raise UnknownMetric(f"unknown metric {metric!r}; choose from {METRICS}")
    b1 = boundary_g1(p.coupling_j, p.kappa1, p.gamma)
    q = p.replace(coupling_g=max(b1.g_crit - delta, 0.0))
    if not is_stable(q):
        raise NotStable("unstable at G = G1 - delta")
    fit = lorentzian_params(p.coupling_j, p.kappa1, p.gamma, delta)
    if metric == "gbw_analytic":
        return fit.gbw
    peak = find_peak(q, peak_bracket(-b1.omega_crit, fit.bandwidth))
    if metric == "gbw_numeric":
        return peak.gbw_numeric
    co = coefficients(q, peak.omega_peak)
    return abs(co.b) / abs(co.a)


def _flag_for(exc: Exception) -> str:
    if isinstance(exc, NotStable):
        return "unstable"
    name = type(exc).__name__
    return {"NearSingular": "singular", "NoPeakInBracket": "no_peak", "MultiplePeaks": "multiple_peaks"}.get(
        name, "error"
    )


def _sweep_row(y_value, base, x_name, x_values, y_name, metric, delta):
    row = []
    for x_value in x_values:
        p = base.with_param(x_name, x_value).with_param(y_name, y_value)
        try:
            row.append((float(evaluate_metric(p, metric, delta)), ""))
        except ComputeError as exc:
            row.append((math.nan, _flag_for(exc)))
    return row


def sweep_plane(
    base: SystemParams,
    x: tuple[str, object],
    y: tuple[str, object],
    metric: str,
    delta: float = DEFAULT_DELTA,
    jobs: int = 1,
) -> SweepGrid:
    """Evaluate ``metric`` on the grid spanned by two named parameters.

    ``x`` and ``y`` are ``(name, values)`` pairs with names among
    ``j, kappa1, kappa2, gamma, g``. Cells where the computation fails are
    flagged with a reason code instead of aborting the sweep. Output is
    independent of ``jobs``.
    """
    x_name, x_raw = x
    y_name, y_raw = y
    for name in (x_name, y_name):
        if name not in SWEEPABLE:
            raise UnknownParam(f"cannot sweep {name!r}; choose from {SWEEPABLE}")
    if x_name == y_name:
        raise ParamError("x and y must be different parameters")
    if metric not in METRICS:
        raise UnknownMetric(f"unknown metric {metric!r}; choose from {METRICS}")
    if metric in _NEAR_BOUNDARY and "g" in (x_name, y_name):
        raise ParamError(f"metric {metric!r} derives G per cell; 'g' cannot be an axis")
    xs = make_axis(x_raw, f"{x_name} grid")
    ys = make_axis(y_raw, f"{y_name} grid")
    # reject invalid corners before spending time on the interior
    for xv in (xs[0], xs[-1]):
        for yv in (ys[0], ys[-1]):
            validate_params(base.with_param(x_name, xv).with_param(y_name, yv))

    worker = partial(_sweep_row, base=base, x_name=x_name, x_values=xs, y_name=y_name,
                     metric=metric, delta=delta)
    rows = ordered_map(worker, ys, jobs)
    values = np.array([[v for v, _ in row] for row in rows], dtype=float)
    flags = np.array([[f for _, f in row] for row in rows], dtype=object).astype(str)
    return SweepGrid(x_name, xs, y_name, ys, values, flags, metric)


def row_argmax(grid: SweepGrid, valid_only: bool = True) -> np.ndarray:
    """x value of the maximum along each row (NaN rows give NaN)."""
    out = np.full(len(grid.y_values), np.nan)
    vals = np.where(grid.valid, grid.values, np.nan) if valid_only else grid.values
    for i, row in enumerate(vals):
        if np.all(np.isnan(row)):
            continue
        out[i] = grid.x_values[int(np.nanargmax(row))]
    return out


# --- marching squares -------------------------------------------------------

# cell edges: 0 bottom (c0-c1), 1 right (c1-c2), 2 top (c2-c3), 3 left (c3-c0);
# corners: c0 (i, j), c1 (i, j+1), c2 (i+1, j+1), c3 (i+1, j)
_EDGE_CORNERS = ((0, 1), (1, 2), (2, 3), (3, 0))


def _edge_key(i: int, j: int, edge: int) -> tuple:
    if edge == 0:
        return ("h", i, j)
    if edge == 1:
        return ("v", i, j + 1)
    if edge == 2:
        return ("h", i + 1, j)
    return ("v", i, j)


def _cell_segments(corner_vals, above, level):
    crossed = [e for e, (a, b) in enumerate(_EDGE_CORNERS) if above[a] != above[b]]
    if len(crossed) == 2:
        return [tuple(crossed)]
    if len(crossed) == 4:
        center_above = float(np.mean(corner_vals)) > level
        if center_above == above[0]:
            # c0 and c2 connect through the center; cut off c1 and c3
            return [(0, 1), (2, 3)]
        return [(3, 0), (1, 2)]
    return []


def extract_contour(grid: SweepGrid, level: float) -> list[np.ndarray]:
    """Level set of ``grid.values`` as polylines of ``(x, y)`` points.

    Marching squares with linear interpolation along cell edges. Saddle
    cells are resolved by the mean of the four corners. Cells touching a
    flagged or NaN value are skipped, so flagged regions break contours.
    Closed polylines repeat their first point at the end.
    """
    V = np.where(grid.valid, grid.values, np.nan)
    ny, nx = V.shape
    if ny == 0 or nx == 0:
        raise EmptyGrid("grid is empty")
    xs, ys = grid.x_values, grid.y_values

    points: dict[tuple, tuple[float, float]] = {}
    adjacency: dict[tuple, list[tuple]] = {}

    def edge_point(key):
        if key in points:
            return
        kind, i, j = key
        if kind == "h":
            v0, v1 = V[i, j], V[i, j + 1]
            t = (level - v0) / (v1 - v0)
            points[key] = (xs[j] + t * (xs[j + 1] - xs[j]), ys[i])
        else:
            v0, v1 = V[i, j], V[i + 1, j]
            t = (level - v0) / (v1 - v0)
            points[key] = (xs[j], ys[i] + t * (ys[i + 1] - ys[i]))

    for i in range(ny - 1):
        for j in range(nx - 1):
            corner_vals = (V[i, j], V[i, j + 1], V[i + 1, j + 1], V[i + 1, j])
            if any(math.isnan(v) for v in corner_vals):
                continue
            above = [v > level for v in corner_vals]
            for e0, e1 in _cell_segments(corner_vals, above, level):
                k0, k1 = _edge_key(i, j, e0), _edge_key(i, j, e1)
                edge_point(k0)
                edge_point(k1)
                adjacency.setdefault(k0, []).append(k1)
                adjacency.setdefault(k1, []).append(k0)

    polylines = []
    visited_edges: set[frozenset] = set()

    def walk(start):
        path = [start]
        current = start
        while True:
            nxt = None
            for cand in adjacency[current]:
                if frozenset((current, cand)) not in visited_edges:
                    nxt = cand
                    break
            if nxt is None:
                return path
            visited_edges.add(frozenset((current, nxt)))
            path.append(nxt)
            current = nxt

    # open chains start at endpoints; whatever remains is closed loops
    for node in sorted(k for k, nbrs in adjacency.items() if len(nbrs) == 1):
        if any(frozenset((node, n)) not in visited_edges for n in adjacency[node]):
            polylines.append(walk(node))
    for node in sorted(adjacency):
        if any(frozenset((node, n)) not in visited_edges for n in adjacency[node]):
            polylines.append(walk(node))
    return [np.array([points[k] for k in path]) for path in polylines]


def bilinear(grid: SweepGrid, x: float, y: float) -> float:
    """Bilinear interpolation of the grid values at ``(x, y)``."""
    xs, ys, V = grid.x_values, grid.y_values, grid.values
    j = int(np.clip(np.searchsorted(xs, x) - 1, 0, len(xs) - 2))
    i = int(np.clip(np.searchsorted(ys, y) - 1, 0, len(ys) - 2))
    tx = (x - xs[j]) / (xs[j + 1] - xs[j])
    ty = (y - ys[i]) / (ys[i + 1] - ys[i])
    return float(
        V[i, j] * (1 - tx) * (1 - ty)
        + V[i, j + 1] * tx * (1 - ty)
        + V[i + 1, j] * (1 - tx) * ty
        + V[i + 1, j + 1] * tx * ty
    )


def tune_curve(kappa1: float, gamma: float, j_grid) -> list[tuple[float, float]]:
    """Amplifier center frequency as a function of the inter-cavity coupling."""
    js = np.asarray(j_grid, dtype=float).ravel()
    if js.size == 0:
        raise EmptyGrid("J grid is empty")
    if not np.all(np.isfinite(js)) or np.any(js < 0):
        raise ParamError("J grid must be finite and nonnegative")
    return [(float(j), center_frequency(j, kappa1, gamma)) for j in js]
