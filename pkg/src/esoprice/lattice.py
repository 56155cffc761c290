"""Two-factor lattice: calibration of the joint (S, Y) move and the Y ladder.

Each step moves the traded asset S by ``u`` or ``d`` and the non-traded asset
Y by ``h`` or ``ell``, giving four joint states with probabilities

    p1: (u, h)    p2: (u, ell)    p3: (d, h)    p4: (d, ell)

Multipliers match the continuous-time variances, the S- and Y-marginals match
the discounted drifts, and ``p1*p4 - p2*p3`` matches the correlation.
"""

from __future__ import annotations

import math
from dataclasses import dataclass, field

import numpy as np

from .errors import InfeasibleProbabilities

_PROB_TOL = 1e-12


@dataclass(frozen=True)
class ContinuousParams:
    mu: float  # drift of S
    sigma: float  # vol of S
    alpha: float  # drift of Y
    beta: float  # vol of Y
    r: float  # riskless rate
    delta: float  # dividend yield of Y
    rho: float  # correlation between S and Y
    s0: float
    y0: float
    t_max: float  # horizon in years

    def __post_init__(self) -> None:
        for name in ("sigma", "beta", "s0", "y0", "t_max"):
            value = getattr(self, name)
            if not value > 0.0:
                raise ValueError(f"{name} must be positive, got {value!r}")
        if self.delta < 0.0:
            raise ValueError(f"delta must be non-negative, got {self.delta!r}")
        if not -1.0 <= self.rho <= 1.0:
            raise ValueError(f"rho must lie in [-1, 1], got {self.rho!r}")


@dataclass(frozen=True)
class StepParams:
    """One-period joint law of (S, Y) multipliers.

    ``u*d == 1`` and ``h*ell == 1`` hold for calibrated parameters but are
    not enforced here, so hand-built one-period examples remain expressible.
    """

    u: float
    d: float
    h: float
    ell: float
    p1: float
    p2: float
    p3: float
    p4: float
    dt: float = 1.0

    def __post_init__(self) -> None:
        if not 0.0 < self.d < 1.0 < self.u:
            raise ValueError(f"need 0 < d < 1 < u, got d={self.d!r}, u={self.u!r}")
        if not 0.0 < self.ell < 1.0 < self.h:
            raise ValueError(f"need 0 < ell < 1 < h, got ell={self.ell!r}, h={self.h!r}")
        probs = self.probs
        if any(not 0.0 <= p <= 1.0 for p in probs) or abs(math.fsum(probs) - 1.0) > _PROB_TOL:
            raise InfeasibleProbabilities(probs)

    @property
    def probs(self) -> tuple[float, float, float, float]:
        return (self.p1, self.p2, self.p3, self.p4)

    @property
    def q(self) -> float:
        """Risk-neutral up-probability of S."""
        return (1.0 - self.d) / (self.u - self.d)

    @property
    def s_up_prob(self) -> float:
        return self.p1 + self.p2

    @property
    def y_up_prob(self) -> float:
        return self.p1 + self.p3


@dataclass(frozen=True)
class Grid:
    """Geometric ladder of Y values over ``n_steps`` periods.

    Rows are 0-based: row ``r`` holds ``h**(n_steps - r) * y0``, so row 0 is
    the highest value, row ``n_steps`` is ``y0`` and row ``2*n_steps`` the
    lowest. The Y-up child of row ``r`` is row ``r - 1``.
    """

    n_steps: int
    y0: float
    h: float
    values: np.ndarray = field(repr=False)

    @property
    def n_rows(self) -> int:
        return 2 * self.n_steps + 1

    @property
    def center(self) -> int:
        return self.n_steps


def marginals(cp: ContinuousParams, n_steps: int) -> tuple[float, float]:
    """S-up and Y-up marginal probabilities for a step of ``t_max / n_steps``."""
    dt = cp.t_max / n_steps
    u = math.exp(cp.sigma * math.sqrt(dt))
    h = math.exp(cp.beta * math.sqrt(dt))
    d, ell = 1.0 / u, 1.0 / h
    m1 = (math.exp((cp.mu - cp.r) * dt) - d) / (u - d)
    m2 = (math.exp((cp.alpha - cp.r - cp.delta) * dt) - ell) / (h - ell)
    return m1, m2


def calibrate(cp: ContinuousParams, n_steps: int) -> StepParams:
    """Match the one-step lattice to the continuous two-factor dynamics.

    With the marginals ``m1 = p1 + p2`` and ``m2 = p1 + p3`` fixed, the
    covariance condition reduces to ``p1 - m1*m2 = rho*beta*sigma*dt /
    ((u - d)(h - ell))``, which gives all four probabilities in closed form.

    Raises InfeasibleProbabilities when any probability leaves [0, 1].
    """
    if n_steps < 1:
        raise ValueError(f"n_steps must be >= 1, got {n_steps!r}")
    dt = cp.t_max / n_steps
    u = math.exp(cp.sigma * math.sqrt(dt))
    h = math.exp(cp.beta * math.sqrt(dt))
    d, ell = 1.0 / u, 1.0 / h
    m1, m2 = marginals(cp, n_steps)

    p1 = m1 * m2 + cp.rho * cp.beta * cp.sigma * dt / ((u - d) * (h - ell))
    p2 = m1 - p1
    p3 = m2 - p1
    p4 = 1.0 - m1 - m2 + p1
    probs = (p1, p2, p3, p4)
    if any(not 0.0 <= p <= 1.0 for p in probs):
        raise InfeasibleProbabilities(
            probs,
            f"calibration infeasible for n_steps={n_steps} (dt={dt:.6g}): "
            + ", ".join(f"p{i + 1}={p:.6g}" for i, p in enumerate(probs)),
        )
    return StepParams(u=u, d=d, h=h, ell=ell, p1=p1, p2=p2, p3=p3, p4=p4, dt=dt)


def perfectly_correlated(sp: StepParams) -> StepParams:
    """Same multipliers with Y moving in lockstep with S (p2 = p3 = 0)."""
    m1 = sp.s_up_prob
    return StepParams(
        u=sp.u, d=sp.d, h=sp.h, ell=sp.ell, p1=m1, p2=0.0, p3=0.0, p4=1.0 - m1, dt=sp.dt
    )


def grid_values(n_steps: int, y0: float, h: float) -> Grid:
    if n_steps < 1:
        raise ValueError(f"n_steps must be >= 1, got {n_steps!r}")
    if not y0 > 0.0:
        raise ValueError(f"y0 must be positive, got {y0!r}")
    if not h > 1.0:
        raise ValueError(f"h must exceed 1, got {h!r}")
    # scalar pow: the vectorized np.power can be off by an ulp
    values = np.array([y0 * math.pow(h, j) for j in range(n_steps, -n_steps - 1, -1)])
    values[n_steps] = y0
    values.setflags(write=False)
    return Grid(n_steps=n_steps, y0=y0, h=h, values=values)


def build(cp: ContinuousParams, n_steps: int) -> tuple[StepParams, Grid]:
    """Calibrate and build the matching grid in one call."""
    sp = calibrate(cp, n_steps)
    return sp, grid_values(n_steps, cp.y0, sp.h)
