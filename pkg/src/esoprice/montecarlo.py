"""Firm cost of an exercise policy by simulation of the discounted
risk-neutral dynamics ``dY = -delta Y dt + beta Y dW``.

Paths are generated in fixed-size chunks, each with its own Philox stream
keyed by ``(seed, chunk index)``. Chunk results are concatenated in chunk
order and reduced with ``math.fsum``, so estimates do not depend on how many
worker threads run the chunks.
"""

from __future__ import annotations

import math
from concurrent.futures import ThreadPoolExecutor
from dataclasses import asdict, dataclass

import numpy as np

from .errors import EmptyPolicy, InconsistentGrid
from .exercise import OptionSpec, PolicyTable
from .lattice import ContinuousParams, Grid

CHUNK_PATHS = 4096  # must stay even so antithetic pairs never straddle chunks


@dataclass(frozen=True)
class SimConfig:
    n_paths: int
    seed: int = 0
    antithetic: bool = False

    def __post_init__(self) -> None:
        if self.n_paths < 1:
            raise ValueError(f"n_paths must be >= 1, got {self.n_paths!r}")
        if not 0 <= self.seed < 2**64:
            raise ValueError(f"seed must be an unsigned 64-bit integer, got {self.seed!r}")
        if self.antithetic and self.n_paths % 2:
            raise ValueError("antithetic sampling needs an even n_paths")


@dataclass(frozen=True)
class CostEstimate:
    mean: float
    std_error: float
    n_paths: int

    def to_dict(self) -> dict:
        return asdict(self)


def snap_to_grid(y, grid: Grid):
    """Nearest grid row in log space; exact midpoints go to the higher value."""
    x = grid.n_steps - np.log(np.asarray(y, dtype=float) / grid.y0) / math.log(grid.h)
    rows = np.clip(np.ceil(x - 0.5), 0, grid.n_rows - 1).astype(np.intp)
    return rows if rows.ndim else int(rows)


def _check_inputs(pt: PolicyTable, grid: Grid, cp: ContinuousParams, spec: OptionSpec) -> None:
    if spec.a_total == 0:
        raise EmptyPolicy("cannot simulate a package with no options")
    if pt.a_total != spec.a_total:
        raise InconsistentGrid(f"policy holds {pt.a_total} options, spec has {spec.a_total}")
    if pt.n_steps != grid.n_steps or pt.a.shape[1] != grid.n_rows:
        raise InconsistentGrid("policy shape does not match the grid")
    if grid.y0 != cp.y0:
        raise InconsistentGrid(f"grid centre {grid.y0!r} differs from y0={cp.y0!r}")
    expected_h = math.exp(cp.beta * math.sqrt(cp.t_max / grid.n_steps))
    if abs(grid.h - expected_h) > 1e-12 * expected_h:
        raise InconsistentGrid(f"grid h={grid.h!r} does not match beta/T/N (h={expected_h!r})")


def simulate_chunk(
    chunk: int,
    size: int,
    pt: PolicyTable,
    grid: Grid,
    cp: ContinuousParams,
    spec: OptionSpec,
    sim: SimConfig,
) -> tuple[np.ndarray, np.ndarray]:
    """Payouts and options still held at expiry for one chunk of paths."""
    rng = np.random.Generator(np.random.Philox(np.random.SeedSequence([sim.seed, chunk])))
    n_steps = grid.n_steps
    dt = cp.t_max / n_steps
    drift = (-cp.delta - 0.5 * cp.beta**2) * dt
    vol = cp.beta * math.sqrt(dt)
    policy = pt.a

    y = np.full(size, grid.y0)
    held = np.full(size, spec.a_total, dtype=np.intp)
    payout = np.zeros(size)
    for n in range(n_steps + 1):
        rows = snap_to_grid(y, grid)
        a = policy[held, rows, n]
        payout += a * np.maximum(y - spec.strike, 0.0)
        held -= a
        if n == n_steps:
            break
        if sim.antithetic:
            z = rng.standard_normal(size // 2)
            z = np.stack([z, -z], axis=1).ravel()
        else:
            z = rng.standard_normal(size)
        y = y * np.exp(drift + vol * z)
    return payout, held


def path_payouts(
    pt: PolicyTable,
    grid: Grid,
    cp: ContinuousParams,
    spec: OptionSpec,
    sim: SimConfig,
    workers: int = 1,
) -> np.ndarray:
    """Total exercise payout of every path, in path order.

    Antithetic partners sit next to each other (paths ``2j`` and ``2j + 1``).
    """
    _check_inputs(pt, grid, cp, spec)
    sizes = [
        min(CHUNK_PATHS, sim.n_paths - start) for start in range(0, sim.n_paths, CHUNK_PATHS)
    ]
    args = list(enumerate(sizes))
    if workers <= 1 or len(args) == 1:
        parts = [simulate_chunk(c, s, pt, grid, cp, spec, sim) for c, s in args]
    else:
        with ThreadPoolExecutor(max_workers=workers) as pool:
            parts = list(pool.map(lambda cs: simulate_chunk(*cs, pt, grid, cp, spec, sim), args))
    return np.concatenate([payout for payout, _ in parts])


def summarize(payouts: np.ndarray, antithetic: bool = False) -> CostEstimate:
    """Mean and standard error; antithetic pairs are averaged first."""
    n = payouts.size
    mean = math.fsum(payouts) / n
    samples = payouts.reshape(-1, 2).mean(axis=1) if antithetic else payouts
    m = samples.size
    if m < 2:
        return CostEstimate(mean=mean, std_error=0.0, n_paths=n)
    centre = math.fsum(samples) / m
    var = math.fsum((samples - centre) ** 2) / (m - 1)
    return CostEstimate(mean=mean, std_error=math.sqrt(var / m), n_paths=n)


def simulate_cost(
    pt: PolicyTable,
    grid: Grid,
    cp: ContinuousParams,
    spec: OptionSpec,
    sim: SimConfig,
    workers: int = 1,
) -> CostEstimate:
    payouts = path_payouts(pt, grid, cp, spec, sim, workers=workers)
    return summarize(payouts, antithetic=sim.antithetic)
