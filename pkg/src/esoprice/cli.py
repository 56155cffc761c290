"""Batch front end: ``price``, ``surface``, ``threshold``, ``firm-cost``, ``sweep``.

Each command reads a preset and/or JSON config, writes CSV/JSON files under
the output directory and prints a JSON summary to standard output.
"""

from __future__ import annotations

import argparse
import csv
import dataclasses
import json
import logging
import sys
from concurrent.futures import ThreadPoolExecutor
from pathlib import Path
from typing import Any, Sequence

import numpy as np

from . import kernel
from .config import PRESETS, ConfigError, RunConfig, deep_merge, load_raw, validate
from .errors import EsoPriceError, InfeasibleProbabilities, NoThreshold
from .exercise import ExerciseMode, OptionSpec, critical_surface, employee_value, solve, surface_consistency
from .lattice import ContinuousParams, StepParams, build, calibrate, perfectly_correlated
from .montecarlo import simulate_cost
from .reference import bs_reference

log = logging.getLogger("esoprice")

EXIT_OK, EXIT_CONFIG, EXIT_INFEASIBLE, EXIT_NUMERICAL = 0, 2, 3, 4

SWEEP_COLUMNS = (
    "axis",
    "value",
    "per_unit_partial",
    "per_unit_constrained",
    "bs_discounted",
    "bs_standard",
    "status",
)
THRESHOLD_COLUMNS = ("a_total", "y_star_complete", "y_star_correlated", "y_star_uncorrelated")


def fmt(x: float | None) -> str:
    return "" if x is None else format(float(x), ".17g")


def _step_dict(sp: StepParams) -> dict[str, float]:
    return {**dataclasses.asdict(sp), "q": sp.q}


def _write_csv(path: Path, header: Sequence[str], rows: list[list[str]]) -> None:
    path.parent.mkdir(parents=True, exist_ok=True)
    with path.open("w", encoding="utf-8", newline="") as fh:
        writer = csv.writer(fh, lineterminator="\n")
        writer.writerow(header)
        writer.writerows(rows)


def _write_json(path: Path, payload: dict[str, Any]) -> None:
    path.parent.mkdir(parents=True, exist_ok=True)
    path.write_text(json.dumps(payload, indent=2, sort_keys=True) + "\n", encoding="utf-8")


def _bs(cfg_market: ContinuousParams, strike: float) -> dict[str, float]:
    m = cfg_market
    return bs_reference(m.y0, strike, m.beta, m.r, m.delta, m.t_max)


def cmd_price(cfg: RunConfig) -> dict[str, Any]:
    cp, spec = cfg.market, cfg.option
    sp, grid = build(cp, cfg.n_steps)
    pt, vt = solve(grid, sp, cfg.gamma, spec, cfg.mode)
    package, per_unit = employee_value(vt, spec)
    n, a_total = grid.center, spec.a_total
    a0 = int(pt.a[a_total, n, 0])
    residual = a_total - a0
    excess = 0.0
    if residual:
        excess = kernel.excess_hedge(
            vt.c[residual, n - 1, 1], vt.c[residual, n + 1, 1], sp, cfg.gamma, cp.s0
        )
    summary = {
        "command": "price",
        "config": cfg.to_dict(),
        "step_params": _step_dict(sp),
        "package_value": package,
        "per_unit_value": per_unit,
        "root_exercise": a0,
        "merton_hedge": kernel.merton_hedge(sp, cfg.gamma, cp.s0),
        "excess_hedge": float(excess),
        "bs_reference": _bs(cp, spec.strike),
    }
    _write_json(cfg.output_dir / "price.json", summary)
    return summary


def cmd_surface(cfg: RunConfig) -> dict[str, Any]:
    sp, grid = build(cfg.market, cfg.n_steps)
    pt, vt = solve(grid, sp, cfg.gamma, cfg.option, cfg.mode, keep_values=False)
    surface = critical_surface(pt, cfg.option)
    header = ["y"] + [f"n{j}" for j in range(grid.n_steps + 1)]
    rows = [[fmt(y)] + [str(int(v)) for v in surface[i]] for i, y in enumerate(grid.values)]
    path = cfg.output_dir / "surface.csv"
    _write_csv(path, header, rows)
    interior = (surface > 0) & (surface < cfg.option.a_total)
    summary = {
        "command": "surface",
        "config": cfg.to_dict(),
        "step_params": _step_dict(sp),
        "per_unit_value": employee_value(vt, cfg.option)[1],
        "interior_cells": int(interior.sum()),
        "max_interior_rows_per_step": int(interior.sum(axis=0).max()),
        "surface_csv": str(path),
    }
    _write_json(cfg.output_dir / "surface.json", summary)
    return summary


def _threshold_or_none(a: int, strike: float, sp: StepParams, gamma: float) -> float | None:
    try:
        return kernel.exercise_threshold(a, strike, sp, gamma)
    except NoThreshold:
        return None


def cmd_threshold(cfg: RunConfig) -> dict[str, Any]:
    """One-period thresholds against package size.

    Columns: p2 = p3 = 0 step, configured rho, rho = 0.
    """
    cp, strike, gamma = cfg.market, cfg.option.strike, cfg.gamma
    sp = calibrate(cp, cfg.n_steps)
    sp_zero = calibrate(dataclasses.replace(cp, rho=0.0), cfg.n_steps)
    sp_full = perfectly_correlated(sp)
    rows = []
    for a in range(1, cfg.threshold_a_max + 1):
        cols = [_threshold_or_none(a, strike, s, gamma) for s in (sp_full, sp, sp_zero)]
        rows.append([str(a)] + [fmt(c) for c in cols])
    path = cfg.output_dir / "threshold.csv"
    _write_csv(path, THRESHOLD_COLUMNS, rows)
    summary = {
        "command": "threshold",
        "config": cfg.to_dict(),
        "step_params": {
            "complete": _step_dict(sp_full),
            "correlated": _step_dict(sp),
            "uncorrelated": _step_dict(sp_zero),
        },
        "threshold_csv": str(path),
    }
    _write_json(cfg.output_dir / "threshold.json", summary)
    return summary


def cmd_firm_cost(cfg: RunConfig, threads: int = 1) -> dict[str, Any]:
    cp, spec = cfg.market, cfg.option
    sp, grid = build(cp, cfg.n_steps)
    pt, vt = solve(grid, sp, cfg.gamma, spec, cfg.mode, keep_values=False)
    package, per_unit = employee_value(vt, spec)
    est = simulate_cost(pt, grid, cp, spec, cfg.mc, workers=threads)
    summary = {
        "command": "firm-cost",
        "config": cfg.to_dict(),
        "step_params": _step_dict(sp),
        "employee_package_value": package,
        "employee_per_unit_value": per_unit,
        "firm_cost": est.to_dict(),
        "firm_cost_per_unit": est.mean / spec.a_total,
        "firm_cost_per_unit_std_error": est.std_error / spec.a_total,
        "bs_reference": _bs(cp, spec.strike),
        "surface_consistency": surface_consistency(pt),
    }
    _write_json(cfg.output_dir / "firm_cost.json", summary)
    return summary


def sweep_point(cfg: RunConfig, axis: str, value: float) -> dict[str, Any]:
    cp, spec, gamma = cfg.market, cfg.option, cfg.gamma
    if axis == "maturity":
        cp = dataclasses.replace(cp, t_max=value)
    elif axis == "gamma":
        gamma = value
    elif axis == "volatility":
        cp = dataclasses.replace(cp, sigma=value, beta=value)
    elif axis == "rho":
        cp = dataclasses.replace(cp, rho=value)
    elif axis == "package_size":
        spec = OptionSpec(int(value), spec.strike)
    else:
        raise ConfigError("sweep.axis", f"unknown axis {axis!r}")
    bs = _bs(cp, spec.strike)
    point = {"axis": axis, "value": value, "bs_discounted": bs["discounted"], "bs_standard": bs["standard"]}
    try:
        sp, grid = build(cp, cfg.n_steps)
    except InfeasibleProbabilities as exc:
        log.warning("sweep point %s=%g infeasible: %s", axis, value, exc)
        return {**point, "per_unit_partial": None, "per_unit_constrained": None, "status": "infeasible"}
    per_unit = {}
    for mode in ExerciseMode:
        _, vt = solve(grid, sp, gamma, spec, mode, keep_values=False)
        per_unit[mode] = employee_value(vt, spec)[1]
    return {
        **point,
        "per_unit_partial": per_unit[ExerciseMode.PARTIAL],
        "per_unit_constrained": per_unit[ExerciseMode.CONSTRAINED],
        "status": "ok",
    }


def rho_asymmetry(points: list[dict[str, Any]]) -> dict[str, float]:
    """Relative gap ``|v(rho) - v(-rho)| / max`` for every mirrored pair."""
    by_rho = {p["value"]: p["per_unit_partial"] for p in points if p["status"] == "ok"}
    out = {}
    for rho, v in sorted(by_rho.items()):
        if rho > 0.0 and -rho in by_rho:
            w = by_rho[-rho]
            out[format(rho, "g")] = abs(v - w) / max(v, w)
    return out


def cmd_sweep(cfg: RunConfig, threads: int = 1) -> dict[str, Any]:
    if cfg.sweep is None:
        raise ConfigError("sweep", "the sweep command needs a sweep section")
    axis, values = cfg.sweep.axis, cfg.sweep.values
    with ThreadPoolExecutor(max_workers=max(threads, 1)) as pool:
        points = list(pool.map(lambda v: sweep_point(cfg, axis, v), values))
    rows = [
        [
            p["axis"],
            fmt(p["value"]),
            fmt(p["per_unit_partial"]),
            fmt(p["per_unit_constrained"]),
            fmt(p["bs_discounted"]),
            fmt(p["bs_standard"]),
            p["status"],
        ]
        for p in points
    ]
    path = cfg.output_dir / f"sweep_{axis}.csv"
    _write_csv(path, SWEEP_COLUMNS, rows)
    summary: dict[str, Any] = {
        "command": "sweep",
        "config": cfg.to_dict(),
        "points": len(points),
        "infeasible": sum(p["status"] != "ok" for p in points),
        "sweep_csv": str(path),
    }
    if axis == "rho":
        summary["rho_asymmetry"] = rho_asymmetry(points)
    _write_json(cfg.output_dir / f"sweep_{axis}.json", summary)
    return summary


COMMANDS = {
    "price": lambda cfg, threads: cmd_price(cfg),
    "surface": lambda cfg, threads: cmd_surface(cfg),
    "threshold": lambda cfg, threads: cmd_threshold(cfg),
    "firm-cost": cmd_firm_cost,
    "sweep": cmd_sweep,
}


def build_parser() -> argparse.ArgumentParser:
    common = argparse.ArgumentParser(add_help=False)
    common.add_argument("--config", help="JSON run configuration")
    common.add_argument("--preset", choices=sorted(PRESETS), help="named parameter set")
    common.add_argument("--out", help="output directory")
    common.add_argument("--seed", type=int, help="Monte Carlo seed (unsigned 64-bit)")
    common.add_argument("--threads", type=int, default=1, help="worker threads")
    common.add_argument("--mode", choices=[m.value for m in ExerciseMode])
    common.add_argument("-v", "--verbose", action="store_true")

    parser = argparse.ArgumentParser(prog="esoprice", description=__doc__.splitlines()[0])
    sub = parser.add_subparsers(dest="command", required=True)
    for name in COMMANDS:
        sub.add_parser(name, parents=[common])
    return parser


def resolve_config(args: argparse.Namespace) -> RunConfig:
    if args.config is None and args.preset is None:
        raise ConfigError("config", "give --config and/or --preset")
    raw = load_raw(args.preset, args.config)
    overrides: dict[str, Any] = {}
    if args.out is not None:
        overrides["output_dir"] = args.out
    if args.seed is not None:
        overrides["mc"] = {"seed": args.seed}
    if args.mode is not None:
        overrides["mode"] = args.mode
    if args.threads < 1:
        raise ConfigError("threads", "must be >= 1")
    return validate(deep_merge(raw, overrides))


def main(argv: Sequence[str] | None = None) -> int:
    args = build_parser().parse_args(argv)
    logging.basicConfig(
        level=logging.INFO if args.verbose else logging.WARNING,
        format="%(levelname)s %(name)s: %(message)s",
    )
    try:
        cfg = resolve_config(args)
        summary = COMMANDS[args.command](cfg, args.threads)
    except ConfigError as exc:
        print(f"config error: {exc}", file=sys.stderr)
        return EXIT_CONFIG
    except InfeasibleProbabilities as exc:
        print(f"infeasible calibration: {exc}", file=sys.stderr)
        return EXIT_INFEASIBLE
    except (EsoPriceError, FloatingPointError, np.linalg.LinAlgError) as exc:
        print(f"numerical failure: {exc}", file=sys.stderr)
        return EXIT_NUMERICAL
    json.dump(summary, sys.stdout, indent=2, sort_keys=True)
    sys.stdout.write("\n")
    return EXIT_OK


if __name__ == "__main__":
    raise SystemExit(main())
