import math

import numpy as np
import pytest

from esoprice.lattice import ContinuousParams, StepParams

ACCEPTANCE_LINES: list[str] = []


def random_step_params(rng: np.random.Generator, dt: float = 1.0) -> StepParams:
    """Feasible recombining step with all four probabilities bounded away from 0."""
    u = math.exp(rng.uniform(0.05, 0.4))
    h = math.exp(rng.uniform(0.05, 0.4))
    m1 = rng.uniform(0.35, 0.65)
    m2 = rng.uniform(0.35, 0.65)
    lo = max(0.0, m1 + m2 - 1.0) + 0.02
    hi = min(m1, m2) - 0.02
    p1 = rng.uniform(lo, hi)
    p2, p3 = m1 - p1, m2 - p1
    p4 = 1.0 - p1 - p2 - p3
    return StepParams(u=u, d=1.0 / u, h=h, ell=1.0 / h, p1=p1, p2=p2, p3=p3, p4=p4, dt=dt)


def par1(t_max: float = 5.0, rho: float = 0.6, **kw) -> ContinuousParams:
    values = dict(
        mu=0.09, sigma=0.40, alpha=0.08, beta=0.45, r=0.06,
        delta=0.0, rho=rho, s0=1.2, y0=1.0, t_max=t_max,
    )
    values.update(kw)
    return ContinuousParams(**values)


def base_case(**kw) -> ContinuousParams:
    values = dict(
        mu=0.12, sigma=0.2, alpha=0.15, beta=0.3, r=0.07,
        delta=0.075, rho=-0.5, s0=1.2, y0=1.0, t_max=5.0,
    )
    values.update(kw)
    return ContinuousParams(**values)


@pytest.fixture
def rng():
    return np.random.default_rng(20240611)


@pytest.fixture
def quarter_step():
    # symmetric four-state step with q = 1/2
    return StepParams(u=1.2, d=0.8, h=1.3, ell=1 / 1.3, p1=0.25, p2=0.25, p3=0.25, p4=0.25)


@pytest.fixture
def acceptance_report():
    return ACCEPTANCE_LINES


def pytest_terminal_summary(terminalreporter):
    if ACCEPTANCE_LINES:
        terminalreporter.section("acceptance criteria")
        for line in sorted(ACCEPTANCE_LINES, key=lambda s: int(s.split()[1].rstrip(":"))):
            terminalreporter.write_line(line)
