"""Run configuration: JSON files, named presets and validation."""

from __future__ import annotations

import copy
import json
import math
from dataclasses import asdict, dataclass, fields
from pathlib import Path
from typing import Any

from .exercise import ExerciseMode, OptionSpec
from .lattice import ContinuousParams
from .montecarlo import SimConfig

SWEEP_AXES = ("maturity", "gamma", "volatility", "rho", "package_size")


class ConfigError(ValueError):
    def __init__(self, field: str, message: str):
        self.field = field
        super().__init__(f"{field}: {message}")


_PAR1_MARKET = {
    "mu": 0.09, "sigma": 0.40, "alpha": 0.08, "beta": 0.45, "r": 0.06,
    "delta": 0.0, "rho": 0.6, "s0": 1.2, "y0": 1.0, "t_max": 5.0,
}

PRESETS: dict[str, dict[str, Any]] = {
    "base_5_1": {
        "market": {
            "mu": 0.12, "sigma": 0.2, "alpha": 0.15, "beta": 0.3, "r": 0.07,
            "delta": 0.075, "rho": -0.5, "s0": 1.2, "y0": 1.0, "t_max": 5.0,
        },
        "option": {"a_total": 10, "strike": 1.0},
        "gamma": 0.125,
        "n_steps": 500,
    },
    # rho, T and gamma vary across studies; defaults match par2
    "par1": {
        "market": dict(_PAR1_MARKET),
        "option": {"a_total": 10, "strike": 1.0},
        "gamma": 0.5,
        "n_steps": 100,
    },
    "par2": {
        "market": dict(_PAR1_MARKET),
        "option": {"a_total": 10, "strike": 1.0},
        "gamma": 0.5,
        "n_steps": 100,
        "mc": {"n_paths": 100_000, "seed": 0, "antithetic": False},
    },
}

_DEFAULTS: dict[str, Any] = {
    "mode": "partial",
    "mc": {"n_paths": 100_000, "seed": 0, "antithetic": False},
    "threshold": {"a_max": 20},
    "sweep": None,
    "output_dir": "out",
}


@dataclass(frozen=True)
class SweepSpec:
    axis: str
    values: tuple[float, ...]


@dataclass(frozen=True)
class RunConfig:
    market: ContinuousParams
    option: OptionSpec
    gamma: float
    n_steps: int
    mode: ExerciseMode
    mc: SimConfig
    threshold_a_max: int
    sweep: SweepSpec | None
    output_dir: Path

    def to_dict(self) -> dict[str, Any]:
        return {
            "market": asdict(self.market),
            "option": asdict(self.option),
            "gamma": self.gamma,
            "n_steps": self.n_steps,
            "mode": self.mode.value,
            "mc": asdict(self.mc),
            "threshold": {"a_max": self.threshold_a_max},
            "sweep": None
            if self.sweep is None
            else {"axis": self.sweep.axis, "values": list(self.sweep.values)},
            "output_dir": str(self.output_dir),
        }


def deep_merge(base: dict, override: dict) -> dict:
    out = copy.deepcopy(base)
    for key, value in override.items():
        if isinstance(value, dict) and isinstance(out.get(key), dict):
            out[key] = deep_merge(out[key], value)
        else:
            out[key] = copy.deepcopy(value)
    return out


def load_raw(preset: str | None = None, path: str | Path | None = None) -> dict[str, Any]:
    raw = copy.deepcopy(_DEFAULTS)
    if preset is not None:
        if preset not in PRESETS:
            raise ConfigError("preset", f"unknown preset {preset!r}; choose from {sorted(PRESETS)}")
        raw = deep_merge(raw, PRESETS[preset])
    if path is not None:
        try:
            data = json.loads(Path(path).read_text(encoding="utf-8"))
        except OSError as exc:
            raise ConfigError("config", f"cannot read {path}: {exc}") from exc
        except json.JSONDecodeError as exc:
            raise ConfigError("config", f"invalid JSON in {path}: {exc}") from exc
        if not isinstance(data, dict):
            raise ConfigError("config", "top level must be an object")
        raw = deep_merge(raw, data)
    return raw


def _number(section: dict, key: str, where: str) -> float:
    if key not in section:
        raise ConfigError(f"{where}.{key}" if where else key, "missing")
    value = section[key]
    if isinstance(value, bool) or not isinstance(value, (int, float)) or not math.isfinite(value):
        raise ConfigError(f"{where}.{key}" if where else key, f"expected a finite number, got {value!r}")
    return float(value)


def _integer(section: dict, key: str, where: str, minimum: int) -> int:
    name = f"{where}.{key}" if where else key
    if key not in section:
        raise ConfigError(name, "missing")
    value = section[key]
    if isinstance(value, bool) or not isinstance(value, int):
        raise ConfigError(name, f"expected an integer, got {value!r}")
    if value < minimum:
        raise ConfigError(name, f"must be >= {minimum}, got {value}")
    return value


def _sweep_values(sweep: dict) -> tuple[float, ...]:
    if "values" in sweep:
        values = sweep["values"]
        if not isinstance(values, list) or not values:
            raise ConfigError("sweep.values", "expected a non-empty list")
        return tuple(_number({"v": v}, "v", "sweep.values") for v in values)
    start = _number(sweep, "start", "sweep")
    stop = _number(sweep, "stop", "sweep")
    step = _number(sweep, "step", "sweep")
    if step <= 0.0 or stop < start:
        raise ConfigError("sweep.step", "need step > 0 and stop >= start")
    count = int(math.floor((stop - start) / step + 1e-9)) + 1
    return tuple(round(start + i * step, 12) for i in range(count))


def validate(raw: dict[str, Any]) -> RunConfig:
    market = raw.get("market")
    if not isinstance(market, dict):
        raise ConfigError("market", "missing section")
    names = [f.name for f in fields(ContinuousParams)]
    unknown = set(market) - set(names)
    if unknown:
        raise ConfigError(f"market.{sorted(unknown)[0]}", "unknown field")
    values = {name: _number(market, name, "market") for name in names}
    try:
        cp = ContinuousParams(**values)
    except ValueError as exc:
        first = str(exc).split()[0]
        raise ConfigError(f"market.{first}" if first in names else "market", str(exc)) from exc

    option = raw.get("option")
    if not isinstance(option, dict):
        raise ConfigError("option", "missing section")
    a_total = _integer(option, "a_total", "option", 1)
    strike = _number(option, "strike", "option")
    if strike <= 0.0:
        raise ConfigError("option.strike", "must be positive")
    spec = OptionSpec(a_total, strike)

    gamma = _number(raw, "gamma", "")
    if gamma <= 0.0:
        raise ConfigError("gamma", "must be positive")
    n_steps = _integer(raw, "n_steps", "", 1)
    try:
        mode = ExerciseMode(raw.get("mode", "partial"))
    except ValueError as exc:
        raise ConfigError("mode", f"expected 'partial' or 'constrained', got {raw.get('mode')!r}") from exc

    mc = raw.get("mc") or {}
    n_paths = _integer(mc, "n_paths", "mc", 1)
    seed = _integer(mc, "seed", "mc", 0)
    if seed >= 2**64:
        raise ConfigError("mc.seed", "must fit in an unsigned 64-bit integer")
    antithetic = mc.get("antithetic", False)
    if not isinstance(antithetic, bool):
        raise ConfigError("mc.antithetic", "expected true or false")
    if antithetic and n_paths % 2:
        raise ConfigError("mc.n_paths", "must be even with antithetic sampling")
    sim = SimConfig(n_paths=n_paths, seed=seed, antithetic=antithetic)

    threshold = raw.get("threshold") or {}
    a_max = _integer(threshold, "a_max", "threshold", 1) if "a_max" in threshold else 20

    sweep = raw.get("sweep")
    sweep_spec = None
    if sweep is not None:
        if not isinstance(sweep, dict):
            raise ConfigError("sweep", "expected an object")
        axis = sweep.get("axis")
        if axis not in SWEEP_AXES:
            raise ConfigError("sweep.axis", f"expected one of {SWEEP_AXES}, got {axis!r}")
        sweep_spec = SweepSpec(axis, _sweep_values(sweep))
        if axis == "package_size" and any(v < 1 or v != int(v) for v in sweep_spec.values):
            raise ConfigError("sweep.values", "package sizes must be positive integers")

    out = raw.get("output_dir", "out")
    if not isinstance(out, str) or not out:
        raise ConfigError("output_dir", "expected a non-empty path string")

    return RunConfig(
        market=cp,
        option=spec,
        gamma=gamma,
        n_steps=n_steps,
        mode=mode,
        mc=sim,
        threshold_a_max=a_max,
        sweep=sweep_spec,
        output_dir=Path(out),
    )
