"""Command-line front end.

Every subcommand reads one JSON config, computes, and only then writes its
output files. Exit codes: 0 success, 1 verification failure, 2 configuration
error, 3 computation error.
"""

from __future__ import annotations

import argparse
import json
import os
import sys
from pathlib import Path

import jsonschema
import numpy as np

from . import export
from .errors import ComputeError, EmptyGrid, ParamError
from .grid import resolve_jobs
from .metrics import DEFAULT_DELTA, compare_params
from .model import SWEEPABLE, SystemParams
from .oracle import compare_scattering
from .scattering import added_noise, coefficient_spectrum, coefficients, gain_spectrum
from .stability import boundary_g1, boundary_g2, stability_map
from .sweep import METRICS, extract_contour, sweep_plane, tune_curve

EXIT_OK, EXIT_VERIFY, EXIT_CONFIG, EXIT_COMPUTE = 0, 1, 2, 3
SCHEMA_VERSION = 1
VERIFY_LIMIT = 1e-4

_NUMBER = {"type": "number"}
_GRID = {
    "oneOf": [
        {"type": "array", "items": _NUMBER},
        {
            "type": "object",
            "properties": {"start": _NUMBER, "stop": _NUMBER, "num": {"type": "integer", "minimum": 0}},
            "required": ["start", "stop", "num"],
            "additionalProperties": False,
        },
    ]
}
_PARAMS = {
    "type": "object",
    "properties": {k: _NUMBER for k in ("delta1", "delta2", "j", "g", "kappa1", "kappa2", "gamma")},
    "required": ["delta1", "delta2", "j", "g", "kappa1", "kappa2", "gamma"],
    "additionalProperties": False,
}
_AXIS = {
    "type": "object",
    "properties": {"param": {"enum": list(SWEEPABLE)}, "grid": _GRID},
    "required": ["param", "grid"],
    "additionalProperties": False,
}
_COMMON = {
    "schema_version": {"const": SCHEMA_VERSION},
    "params": _PARAMS,
    "delta": {"type": "number", "exclusiveMinimum": 0},
    "n_eff": {"type": "number", "minimum": 0},
}
_COMMAND_KEYS = {
    "spectrum": ({"omega": _GRID}, ["omega"]),
    "ratios": ({"omega": _GRID}, ["omega"]),
    "stability": ({"gamma_grid": _GRID, "g_grid": _GRID}, ["gamma_grid", "g_grid"]),
    "fit": ({"bracket": {"type": "array", "items": _NUMBER, "minItems": 2, "maxItems": 2}}, []),
    "sweep": (
        {"x": _AXIS, "y": _AXIS, "metric": {"enum": list(METRICS)},
         "levels": {"type": "array", "items": _NUMBER}},
        ["x", "y", "metric"],
    ),
    "tune": ({"j_grid": _GRID}, ["j_grid"]),
    "verify": ({"omegas": {"type": "array", "items": _NUMBER}}, ["omegas"]),
}


def config_schema(command: str) -> dict:
    extra, required = _COMMAND_KEYS[command]
    return {
        "type": "object",
        "properties": {**_COMMON, **extra},
        "required": ["schema_version", "params", *required],
        "additionalProperties": False,
    }


class ConfigError(Exception):
    pass


def load_config(path, command: str) -> tuple[dict, SystemParams]:
    try:
        raw = json.loads(Path(path).read_text(encoding="utf-8"))
    except (OSError, UnicodeDecodeError) as exc:
        raise ConfigError(f"cannot read config: {exc}") from exc
    except json.JSONDecodeError as exc:
        raise ConfigError(f"malformed JSON: {exc}") from exc
    try:
        jsonschema.validate(raw, config_schema(command))
    except jsonschema.ValidationError as exc:
        where = "/".join(str(p) for p in exc.absolute_path) or "<root>"
        raise ConfigError(f"invalid config at {where}: {exc.message}") from exc
    params = SystemParams.from_dict(raw["params"])
    return raw, params


def grid_values(spec, name: str) -> np.ndarray:
    if isinstance(spec, dict):
        values = np.linspace(spec["start"], spec["stop"], spec["num"])
    else:
        values = np.asarray(spec, dtype=float)
    if values.size == 0:
        raise EmptyGrid(f"{name} is empty")
    return values


def _prepare_out(out: Path, names: list[str]) -> list[Path]:
    try:
        out.mkdir(parents=True, exist_ok=True)
    except OSError as exc:
        raise ConfigError(f"cannot create output directory {out}: {exc}") from exc
    if not os.access(out, os.W_OK):
        raise ConfigError(f"output directory {out} is not writable")
    paths = [out / name for name in names]
    for path in paths:
        if path.exists() and not os.access(path, os.W_OK):
            raise ConfigError(f"output file {path} is not writable")
    return paths


def cmd_spectrum(cfg, params, out, jobs):
    omega = grid_values(cfg["omega"], "omega grid")
    (path,) = _prepare_out(out, ["spectrum.csv"])
    spec = gain_spectrum(params, omega)
    export.spectrum_csv(path, spec)
    if np.all(spec.flagged):
        print("peak: none (all points flagged)")
    else:
        w, g = spec.peak()
        print(f"peak omega={w:.10g} gain={g:.6g} flagged={int(spec.flagged.sum())}")
    return EXIT_OK


def cmd_ratios(cfg, params, out, jobs):
    omega = grid_values(cfg["omega"], "omega grid")
    (path,) = _prepare_out(out, ["ratios.csv"])
    export.ratios_csv(path, coefficient_spectrum(params, omega))
    return EXIT_OK


def cmd_stability(cfg, params, out, jobs):
    gammas = grid_values(cfg["gamma_grid"], "gamma grid")
    gs = grid_values(cfg["g_grid"], "g grid")
    if np.any(gammas <= 0):
        raise ParamError("gamma grid must be positive")
    map_path, curve_path = _prepare_out(out, ["stability_map.csv", "stability_boundaries.csv"])
    j, k1 = params.coupling_j, params.kappa1
    grid = stability_map(j, k1, gammas, gs, jobs=jobs)
    curves = [(g, boundary_g1(j, k1, g)) for g in gammas] + [(g, boundary_g2(j, k1, g)) for g in gammas]
    export.stability_map_csv(map_path, grid)
    export.boundary_csv(curve_path, curves)
    return EXIT_OK


def cmd_fit(cfg, params, out, jobs):
    (path,) = _prepare_out(out, ["fit.json"])
    bracket = tuple(cfg["bracket"]) if "bracket" in cfg else None
    report = compare_params(params, bracket)
    doc = report.to_dict()
    n_eff = cfg.get("n_eff", 0.0)
    co = coefficients(params, report.numeric.omega_peak)
    doc["at_peak"] = {
        "ratios": co.ratios(),
        "added_noise": added_noise(params, report.numeric.omega_peak, n_eff),
        "n_eff": n_eff,
    }
    doc["params"] = params.to_dict()
    export.write_json(path, doc)
    print(f"gbw={report.numeric.gbw_numeric:.6g} fwhm={report.numeric.fwhm:.6g} "
          f"omega_peak={report.numeric.omega_peak:.10g}")
    return EXIT_OK


def _level_name(level: float) -> str:
    return f"contour_{float(level)!r}.csv"


def cmd_sweep(cfg, params, out, jobs):
    x = (cfg["x"]["param"], grid_values(cfg["x"]["grid"], "x grid"))
    y = (cfg["y"]["param"], grid_values(cfg["y"]["grid"], "y grid"))
    levels = cfg.get("levels", [])
    names = ["sweep_grid.csv", "sweep_grid.json"] + [_level_name(lv) for lv in levels]
    paths = _prepare_out(out, names)
    grid = sweep_plane(params, x, y, cfg["metric"], delta=cfg.get("delta", DEFAULT_DELTA), jobs=jobs)
    contours = [extract_contour(grid, lv) for lv in levels]
    export.sweep_csv(paths[0], grid)
    export.write_json(paths[1], grid.to_compact())
    for path, lines in zip(paths[2:], contours):
        export.contour_csv(path, lines)
    return EXIT_OK


def cmd_tune(cfg, params, out, jobs):
    js = grid_values(cfg["j_grid"], "J grid")
    (path,) = _prepare_out(out, ["tune.csv"])
    export.tune_csv(path, tune_curve(params.kappa1, params.gamma, js))
    return EXIT_OK


def cmd_verify(cfg, params, out, jobs):
    (path,) = _prepare_out(out, ["verify.json"])
    if not cfg["omegas"]:
        raise EmptyGrid("omegas is empty")
    report = compare_scattering(params, cfg["omegas"], jobs=jobs)
    doc = report.to_dict()
    doc["limit"] = VERIFY_LIMIT
    doc["passed"] = bool(report.max_defect < VERIFY_LIMIT)
    export.write_json(path, doc)
    print(f"max defect {report.max_defect:.3g} (limit {VERIFY_LIMIT:g})")
    return EXIT_OK if doc["passed"] else EXIT_VERIFY


COMMANDS = {
    "spectrum": (cmd_spectrum, "power gain |A|^2 on a frequency grid"),
    "ratios": (cmd_ratios, "|B|/|A| .. |F|/|A| on a frequency grid"),
    "stability": (cmd_stability, "stability map over (gamma, G) plus analytic boundaries"),
    "fit": (cmd_fit, "Lorentzian parameters vs numeric peak, FWHM and gain-bandwidth"),
    "sweep": (cmd_sweep, "metric over a 2-D parameter plane with optional contours"),
    "tune": (cmd_tune, "center frequency as a function of J"),
    "verify": (cmd_verify, "time-domain check of the scattering coefficients"),
}


def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(prog="optoamp", description=__doc__.splitlines()[0])
    sub = parser.add_subparsers(dest="command", required=True)
    for name, (_, help_text) in COMMANDS.items():
        p = sub.add_parser(name, help=help_text)
        p.add_argument("--config", required=True, help="path to the JSON config")
        p.add_argument("--out", default=".", help="output directory (default: current)")
        p.add_argument("--jobs", type=int, default=None,
                       help="worker processes (default: number of logical cores)")
    return parser


def main(argv=None) -> int:
    parser = build_parser()
    try:
        args = parser.parse_args(argv)
    except SystemExit as exc:
        return EXIT_CONFIG if exc.code else EXIT_OK
    func = COMMANDS[args.command][0]
    try:
        jobs = resolve_jobs(args.jobs)
        cfg, params = load_config(args.config, args.command)
        return func(cfg, params, Path(args.out), jobs)
    except (ConfigError, ParamError) as exc:
        print(f"configuration error: {exc}", file=sys.stderr)
        return EXIT_CONFIG
    except ComputeError as exc:
        print(f"computation error: {type(exc).__name__}: {exc}", file=sys.stderr)
        return EXIT_COMPUTE


if __name__ == "__main__":
    sys.exit(main())
