"""One-period exponential indifference pricing.

For a claim paying ``c_h`` when Y moves up and ``c_l`` when it moves down,
the buyer's indifference price under ``U(x) = -exp(-gamma x)`` is

    g = q * CE(c | S up) + (1 - q) * CE(c | S down)

where ``CE(c | branch) = -log E[exp(-gamma c) | branch] / gamma`` is the
certainty equivalent of the claim conditional on the S move and ``q`` is the
risk-neutral up-probability of S. All price functions broadcast over numpy
arrays of payoffs.
"""

from __future__ import annotations

import math

import numpy as np

from .errors import DegenerateBranch, NoThreshold
from .lattice import StepParams

# Below this value of gamma * max|c| the second-order expansion is used.
SMALL_GAMMA_CUTOFF = 1e-8
THRESHOLD_BRACKET_STEPS = 64


def _check_gamma(gamma: float) -> None:
    if not gamma > 0.0:
        raise ValueError(f"gamma must be positive, got {gamma!r}")


def _branch_weights(sp: StepParams) -> tuple[float, float, float, float]:
    up_mass = sp.p1 + sp.p2
    down_mass = sp.p3 + sp.p4
    if up_mass <= 0.0 or down_mass <= 0.0:
        raise DegenerateBranch(
            f"S-branch with zero mass: p1+p2={up_mass!r}, p3+p4={down_mass!r}"
        )
    return sp.p1 / up_mass, sp.p2 / up_mass, sp.p3 / down_mass, sp.p4 / down_mass


def certainty_equivalent(x_up, x_down, w_up: float, w_down: float, gamma: float):
    """``-log(w_up e^{-gamma x_up} + w_down e^{-gamma x_down}) / gamma``.

    Shifted by the smaller payoff so that large payoffs and large gamma do not
    overflow; small exponents go through ``log1p``/``expm1``.
    """
    x_up = np.asarray(x_up, dtype=float)
    x_down = np.asarray(x_down, dtype=float)
    lo = np.minimum(x_up, x_down)
    spread = np.abs(x_up - x_down)
    up_is_hi = x_up >= x_down
    w_hi = np.where(up_is_hi, w_up, w_down)
    w_lo = np.where(up_is_hi, w_down, w_up)
    z = gamma * spread

    with np.errstate(divide="ignore", invalid="ignore", over="ignore"):
        near = -np.log1p(w_hi * np.expm1(-np.minimum(z, 1.0))) / gamma
        far = -np.logaddexp(np.log(w_lo), np.log(w_hi) - z) / gamma
        excess = np.where(z <= 1.0, near, far)

        scale = gamma * np.maximum(np.abs(x_up), np.abs(x_down))
        mean = w_up * x_up + w_down * x_down
        taylor = mean - 0.5 * gamma * w_up * w_down * (x_up - x_down) ** 2
    return np.where(scale < SMALL_GAMMA_CUTOFF, taylor, lo + excess)


def price_g(c_h, c_l, sp: StepParams, gamma: float):
    """Indifference price of a one-period claim; broadcasts over arrays."""
    _check_gamma(gamma)
    w1, w2, w3, w4 = _branch_weights(sp)
    q = sp.q
    out = q * certainty_equivalent(c_h, c_l, w1, w2, gamma) + (1.0 - q) * certainty_equivalent(
        c_h, c_l, w3, w4, gamma
    )
    return out if np.ndim(out) else float(out)


def _log_mix(pa: float, pb: float, xa, xb, gamma: float):
    with np.errstate(divide="ignore"):
        return np.logaddexp(np.log(pa) - gamma * xa, np.log(pb) - gamma * xb)


def optimal_hedge(c_h, c_l, sp: StepParams, gamma: float, s0: float):
    """Shares of S held by the claim owner in the optimal portfolio."""
    _check_gamma(gamma)
    if not s0 > 0.0:
        raise ValueError(f"s0 must be positive, got {s0!r}")
    _branch_weights(sp)
    c_h = np.asarray(c_h, dtype=float)
    c_l = np.asarray(c_l, dtype=float)
    shift = np.minimum(c_h, c_l)
    xh, xl = c_h - shift, c_l - shift
    log_ratio = (
        _log_mix(sp.p3, sp.p4, xh, xl, gamma)
        - _log_mix(sp.p1, sp.p2, xh, xl, gamma)
        + math.log((1.0 - sp.d) / (sp.u - 1.0))
    )
    out = -log_ratio / (gamma * (sp.u - sp.d) * s0)
    return out if np.ndim(out) else float(out)


def merton_hedge(sp: StepParams, gamma: float, s0: float) -> float:
    return optimal_hedge(0.0, 0.0, sp, gamma, s0)


def excess_hedge(c_h, c_l, sp: StepParams, gamma: float, s0: float):
    """Extra shares needed on top of the claim-free position."""
    return optimal_hedge(c_h, c_l, sp, gamma, s0) - merton_hedge(sp, gamma, s0)


def minimal_measure(sp: StepParams) -> tuple[float, float, float, float]:
    """Minimal martingale measure on the four joint states."""
    w1, w2, w3, w4 = _branch_weights(sp)
    q = sp.q
    return (q * w1, q * w2, (1.0 - q) * w3, (1.0 - q) * w4)


def minimal_measure_price(c_h, c_l, sp: StepParams):
    """Expectation of the claim under the minimal martingale measure."""
    q1, q2, q3, q4 = minimal_measure(sp)
    return (q1 + q3) * np.asarray(c_h, dtype=float) + (q2 + q4) * np.asarray(c_l, dtype=float)


def exercise_gap(y, a_count: int, strike: float, sp: StepParams, gamma: float):
    """Immediate exercise value minus continuation value for ``a_count`` calls."""
    y = np.asarray(y, dtype=float)
    now = a_count * np.maximum(y - strike, 0.0)
    cont = price_g(
        a_count * np.maximum(sp.h * y - strike, 0.0),
        a_count * np.maximum(sp.ell * y - strike, 0.0),
        sp,
        gamma,
    )
    return now - cont


def exercise_threshold(a_count: int, strike: float, sp: StepParams, gamma: float) -> float:
    """Smallest Y above the strike at which exercising the whole package
    immediately is worth as much as holding it one more period.

    Scans ``strike * h**j`` for the first sign change, then bisects to an
    absolute tolerance of ``1e-10 * strike``.
    """
    if a_count < 1:
        raise ValueError(f"a_count must be >= 1, got {a_count!r}")
    if not strike > 0.0:
        raise ValueError(f"strike must be positive, got {strike!r}")
    _check_gamma(gamma)

    lo = strike
    hi = None
    for j in range(1, THRESHOLD_BRACKET_STEPS + 1):
        y = strike * sp.h**j
        gap = exercise_gap(y, a_count, strike, sp, gamma)
        if gap == 0.0:
            return float(y)
        if gap > 0.0:
            hi = y
            break
        lo = y
    if hi is None:
        raise NoThreshold(
            f"exercise never beats continuation on (K, K*h^{THRESHOLD_BRACKET_STEPS}] "
            f"for a_count={a_count}, gamma={gamma}"
        )

    tol = 1e-10 * strike
    while hi - lo > tol:
        mid = 0.5 * (lo + hi)
        if exercise_gap(mid, a_count, strike, sp, gamma) >= 0.0:
            hi = mid
        else:
            lo = mid
    return 0.5 * (lo + hi)


def one_period_partial_exercise(
    a_total: int, y0: float, strike: float, sp: StepParams, gamma: float
) -> tuple[int, float]:
    """Optimal number of calls to exercise now, holding the rest one period.

    Ties go to the smaller exercise count.
    """
    if a_total < 0:
        raise ValueError(f"a_total must be >= 0, got {a_total!r}")
    a = np.arange(a_total + 1)
    residual = a_total - a
    cont = price_g(
        residual * max(sp.h * y0 - strike, 0.0),
        residual * max(sp.ell * y0 - strike, 0.0),
        sp,
        gamma,
    )
    objective = a * max(y0 - strike, 0.0) + np.atleast_1d(cont)
    best = int(np.argmax(objective))
    return best, float(objective[best])
