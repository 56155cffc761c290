"""Backward dynamic program for packages of American calls on the Y ladder.

The state at a node is the number ``k`` of unexercised calls, so values and
decisions are tabulated as ``[k, row, n]``. At each interior node the holder
picks the integer ``a`` maximizing

    a * (Y - K)^+ + g(C[k - a, up, n + 1], C[k - a, down, n + 1])

where ``g`` is the one-period indifference price with the Y-up child first.
"""

from __future__ import annotations

import enum
from dataclasses import dataclass

import numpy as np

from .errors import DimensionMismatch
from .kernel import price_g
from .lattice import Grid, StepParams


class ExerciseMode(str, enum.Enum):
    PARTIAL = "partial"
    CONSTRAINED = "constrained"  # all-or-nothing at every node


@dataclass(frozen=True)
class OptionSpec:
    a_total: int  # package size
    strike: float

    def __post_init__(self) -> None:
        if int(self.a_total) != self.a_total or self.a_total < 0:
            raise ValueError(f"a_total must be a non-negative integer, got {self.a_total!r}")
        if not self.strike > 0.0:
            raise ValueError(f"strike must be positive, got {self.strike!r}")


@dataclass(frozen=True)
class PolicyTable:
    """Exercise counts ``a[k, row, n]`` for holdings ``k`` at node ``(row, n)``."""

    a: np.ndarray

    @property
    def a_total(self) -> int:
        return self.a.shape[0] - 1

    @property
    def n_steps(self) -> int:
        return self.a.shape[2] - 1


@dataclass(frozen=True)
class ValueTable:
    """Package values ``c[k, row, n]``.

    When built without full retention only the time-0 column is stored, so
    ``c`` has shape ``(A + 1, rows, 1)``.
    """

    c: np.ndarray
    full: bool = True

    def root(self, k: int | None = None) -> float:
        k = self.c.shape[0] - 1 if k is None else k
        return float(self.c[k, self.c.shape[1] // 2, 0])


def _check_consistent(grid: Grid, sp: StepParams) -> None:
    if abs(grid.h - sp.h) > 1e-12 * sp.h:
        raise DimensionMismatch(f"grid h={grid.h!r} does not match step h={sp.h!r}")
    if abs(grid.h * sp.ell - 1.0) > 1e-12:
        raise DimensionMismatch("grid ladder requires h * ell == 1")


def solve(
    grid: Grid,
    sp: StepParams,
    gamma: float,
    spec: OptionSpec,
    mode: ExerciseMode = ExerciseMode.PARTIAL,
    keep_values: bool = True,
) -> tuple[PolicyTable, ValueTable]:
    _check_consistent(grid, sp)
    mode = ExerciseMode(mode)
    n_steps, n_rows, a_total = grid.n_steps, grid.n_rows, spec.a_total
    holdings = np.arange(a_total + 1)

    payoff = np.maximum(grid.values - spec.strike, 0.0)
    policy = np.zeros((a_total + 1, n_rows, n_steps + 1), dtype=np.int16)
    values = (
        np.zeros((a_total + 1, n_rows, n_steps + 1)) if keep_values else None
    )

    nxt = holdings[:, None] * payoff[None, :]
    policy[:, :, n_steps] = np.where(grid.values >= spec.strike, holdings[:, None], 0)
    if keep_values:
        values[:, :, n_steps] = nxt

    for n in range(n_steps - 1, -1, -1):
        # cont[j, r]: price of holding j calls one step from row r.
        cont = np.empty((a_total + 1, n_rows))
        cont[:, 1:-1] = price_g(nxt[:, :-2], nxt[:, 2:], sp, gamma)
        # Bottom row has no down child; its own value stands in for it.
        cont[:, -1] = price_g(nxt[:, -2], nxt[:, -1], sp, gamma)
        cont[:, 0] = 0.0
        cont[0] = 0.0

        cur = np.empty_like(nxt)
        a_col = np.zeros((a_total + 1, n_rows), dtype=np.int16)
        cur[0] = 0.0
        for k in range(1, a_total + 1):
            if mode is ExerciseMode.PARTIAL:
                a = np.arange(k + 1)
                obj = a[:, None] * payoff[None, 1:-1] + cont[k::-1, 1:-1]
                best = np.argmax(obj, axis=0)
                a_col[k, 1:-1] = best
                cur[k, 1:-1] = np.take_along_axis(obj, best[None, :], axis=0)[0]
            else:
                hold = cont[k, 1:-1]
                full = k * payoff[1:-1]
                take = full > hold
                a_col[k, 1:-1] = np.where(take, k, 0)
                cur[k, 1:-1] = np.where(take, full, hold)
        # Top row exercises everything, bottom row holds everything.
        a_col[:, 0] = holdings
        cur[:, 0] = holdings * payoff[0]
        a_col[:, -1] = 0
        cur[:, -1] = cont[:, -1]

        policy[:, :, n] = a_col
        if keep_values:
            values[:, :, n] = cur
        nxt = cur

    policy.setflags(write=False)
    if keep_values:
        vt = ValueTable(values, full=True)
    else:
        vt = ValueTable(nxt[:, :, None].copy(), full=False)
    return PolicyTable(policy), vt


def employee_value(vt: ValueTable, spec: OptionSpec) -> tuple[float, float]:
    """Package value and per-unit value at the root node."""
    if spec.a_total == 0:
        return 0.0, 0.0
    package = vt.root(spec.a_total)
    return package, package / spec.a_total


def critical_surface(pt: PolicyTable, spec: OptionSpec) -> np.ndarray:
    """Calls the holder of the full package keeps at each ``(row, n)``."""
    return spec.a_total - pt.a[spec.a_total].astype(np.int64)


def surface_consistency(pt: PolicyTable) -> float:
    """Fraction of ``(m, row, n)`` cells where the holdings-indexed policy
    agrees with exercising down to the full-package critical surface."""
    a_total = pt.a_total
    if a_total == 0:
        return 1.0
    m = np.arange(1, a_total + 1)[:, None, None]
    target = np.clip(a_total - pt.a[a_total][None].astype(np.int64), 0, m)
    kept = m - pt.a[1:].astype(np.int64)
    return float(np.mean(kept == target))


def hold_to_maturity(grid: Grid, spec: OptionSpec) -> PolicyTable:
    """Policy that never exercises early and exercises in the money at expiry."""
    n_steps, a_total = grid.n_steps, spec.a_total
    a = np.zeros((a_total + 1, grid.n_rows, n_steps + 1), dtype=np.int16)
    holdings = np.arange(a_total + 1)[:, None]
    a[:, :, n_steps] = np.where(grid.values >= spec.strike, holdings, 0)
    return PolicyTable(a)
