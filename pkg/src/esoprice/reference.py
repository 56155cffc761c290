"""Independent reference values used to check the engine.

Nothing here shares code with the tabulated solver except the one-period
price ``g`` itself.
"""

from __future__ import annotations

import math
from dataclasses import dataclass
from functools import lru_cache
from typing import Callable

import numpy as np

from .errors import SizeGuard
from .exercise import ExerciseMode, OptionSpec, ValueTable
from .kernel import price_g
from .lattice import Grid, StepParams

NAIVE_MAX_STEPS = 6
NAIVE_MAX_OPTIONS = 4


@dataclass(frozen=True)
class BsInputs:
    spot: float
    strike: float
    vol: float
    rate: float
    div: float
    tenor: float

    def __post_init__(self) -> None:
        if not (self.spot > 0.0 and self.strike > 0.0 and self.tenor > 0.0):
            raise ValueError("spot, strike and tenor must be positive")
        if self.vol < 0.0:
            raise ValueError("vol must be non-negative")


def _norm_cdf(x: float) -> float:
    return 0.5 * math.erfc(-x / math.sqrt(2.0))


def bs_call(inp: BsInputs) -> float:
    """Black-Scholes call with a continuous dividend yield."""
    fwd_disc = inp.spot * math.exp(-inp.div * inp.tenor)
    k_disc = inp.strike * math.exp(-inp.rate * inp.tenor)
    std = inp.vol * math.sqrt(inp.tenor)
    if std == 0.0:
        return max(fwd_disc - k_disc, 0.0)
    d1 = (math.log(fwd_disc / k_disc) + 0.5 * std * std) / std
    return fwd_disc * _norm_cdf(d1) - k_disc * _norm_cdf(d1 - std)


def bs_reference(
    y0: float, strike: float, beta: float, r: float, delta: float, t_max: float
) -> dict[str, float]:
    """Both normalizations: ``discounted`` (rate 0) and ``standard`` (rate r)."""
    return {
        "discounted": bs_call(BsInputs(y0, strike, beta, 0.0, delta, t_max)),
        "standard": bs_call(BsInputs(y0, strike, beta, r, delta, t_max)),
    }


def binomial_expectation(grid: Grid, payoff: Callable[[np.ndarray], np.ndarray], q_y: float) -> float:
    """Exact expectation of ``payoff(Y_N)`` when Y steps up with prob ``q_y``."""
    if not 0.0 < q_y < 1.0:
        raise ValueError(f"q_y must lie in (0, 1), got {q_y!r}")
    n = grid.n_steps
    ups = np.arange(n + 1)
    log_w = np.array(
        [
            math.lgamma(n + 1) - math.lgamma(j + 1) - math.lgamma(n - j + 1)
            + j * math.log(q_y) + (n - j) * math.log1p(-q_y)
            for j in ups
        ]
    )
    # j ups land on row 2N - 2j
    y_terminal = grid.values[2 * n - 2 * ups]
    return math.fsum(np.exp(log_w) * np.asarray(payoff(y_terminal), dtype=float))


def martingale_up_prob(h: float) -> float:
    """Up-probability making the ladder process a martingale."""
    ell = 1.0 / h
    return (1.0 - ell) / (h - ell)


def naive_value(
    grid: Grid,
    sp: StepParams,
    gamma: float,
    spec: OptionSpec,
    mode: ExerciseMode = ExerciseMode.PARTIAL,
) -> ValueTable:
    """Node-by-node recursive evaluation of the exercise problem.

    Each node value is computed from its two children by direct recursion
    (memoized), with scalar loops in place of the solver's array sweeps.
    """
    n_steps, a_total = grid.n_steps, spec.a_total
    if n_steps > NAIVE_MAX_STEPS or a_total > NAIVE_MAX_OPTIONS:
        raise SizeGuard(
            f"naive evaluator limited to N <= {NAIVE_MAX_STEPS}, A <= {NAIVE_MAX_OPTIONS}"
        )
    mode = ExerciseMode(mode)
    last_row = 2 * n_steps
    y = [float(v) for v in grid.values]
    strike = spec.strike

    def payoff(row: int) -> float:
        return max(y[row] - strike, 0.0)

    @lru_cache(maxsize=None)
    def value(k: int, row: int, n: int) -> float:
        if k == 0:
            return 0.0
        if n == n_steps:
            return k * payoff(row)
        if row == 0:
            return k * payoff(row)
        down = row + 1 if row < last_row else row
        if row == last_row:
            return price_g(value(k, row - 1, n + 1), value(k, down, n + 1), sp, gamma)
        choices = range(k + 1) if mode is ExerciseMode.PARTIAL else (0, k)
        best = -math.inf
        for a in choices:
            j = k - a
            cont = price_g(value(j, row - 1, n + 1), value(j, down, n + 1), sp, gamma) if j else 0.0
            v = a * payoff(row) + cont
            if v > best:
                best = v
        return best

    c = np.zeros((a_total + 1, last_row + 1, n_steps + 1))
    for k in range(a_total + 1):
        for row in range(last_row + 1):
            for n in range(n_steps + 1):
                c[k, row, n] = value(k, row, n)
    return ValueTable(c, full=True)


def two_period_value(
    y0: float, strike: float, a_total: int, sp: StepParams, gamma: float
) -> tuple[int, float]:
    """Hand recursion for two periods: terminal payoffs, the two mid nodes,
    then the root. Returns the root exercise count and package value."""
    h = sp.h

    def node(j: int) -> float:
        # same power form as the grid ladder, so node values agree bit for bit
        return y0 * math.pow(h, j)

    def call(y: float) -> float:
        return max(y - strike, 0.0)

    def mid_node(y_mid: float, y_up: float, y_down: float, k: int) -> float:
        best = -math.inf
        for a in range(k + 1):
            v = a * call(y_mid) + price_g((k - a) * call(y_up), (k - a) * call(y_down), sp, gamma)
            best = max(best, v)
        return best

    # h*ell == 1, so the middle terminal value is y0
    c_h = [mid_node(node(1), node(2), y0, k) for k in range(a_total + 1)]
    c_l = [mid_node(node(-1), y0, node(-2), k) for k in range(a_total + 1)]

    a0, best = 0, -math.inf
    for a in range(a_total + 1):
        j = a_total - a
        v = a * call(y0) + price_g(c_h[j], c_l[j], sp, gamma)
        if v > best:
            a0, best = a, v
    return a0, best
