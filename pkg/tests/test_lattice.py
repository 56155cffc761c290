import math

import numpy as np
import pytest
from hypothesis import given, settings
from hypothesis import strategies as st
from scipy.optimize import fsolve

from esoprice.errors import InfeasibleProbabilities
from esoprice.lattice import (
    ContinuousParams,
    StepParams,
    calibrate,
    grid_values,
    marginals,
    perfectly_correlated,
)

from conftest import base_case, par1


def solve_system(cp, n_steps):
    """Generic root-find of the four moment conditions, nonlinear form."""
    dt = cp.t_max / n_steps
    u, h = math.exp(cp.sigma * math.sqrt(dt)), math.exp(cp.beta * math.sqrt(dt))
    d, ell = 1 / u, 1 / h
    m1 = (math.exp((cp.mu - cp.r) * dt) - d) / (u - d)
    m2 = (math.exp((cp.alpha - cp.r - cp.delta) * dt) - ell) / (h - ell)
    target = cp.rho * cp.beta * cp.sigma * dt

    def eqs(p):
        p1, p2, p3, p4 = p
        return [
            p1 + p2 - m1,
            p1 + p3 - m2,
            (u - d) * (h - ell) * (p1 * p4 - p2 * p3) - target,
            p1 + p2 + p3 + p4 - 1.0,
        ]

    return fsolve(eqs, [0.25] * 4, xtol=1e-14)


class TestCalibrate:
    def test_base_case_multipliers(self):
        sp = calibrate(base_case(), 500)
        assert sp.dt == pytest.approx(0.01, rel=1e-15)
        assert sp.u == pytest.approx(math.exp(0.2 * 0.1), rel=1e-15)
        assert sp.h == pytest.approx(math.exp(0.3 * 0.1), rel=1e-15)
        assert sp.u * sp.d == pytest.approx(1.0, abs=1e-15)
        assert sp.h * sp.ell == pytest.approx(1.0, abs=1e-15)

    @pytest.mark.parametrize(
        "cp,n",
        [(base_case(), 500), (base_case(rho=0.95), 500), (par1(), 100), (par1(t_max=2, rho=-0.9), 100)],
    )
    def test_matches_generic_solver(self, cp, n):
        sp = calibrate(cp, n)
        np.testing.assert_allclose(sp.probs, solve_system(cp, n), atol=1e-12)

    def test_zero_correlation_factorizes(self):
        cp = par1(rho=0.0)
        sp = calibrate(cp, 50)
        m1, m2 = marginals(cp, 50)
        np.testing.assert_allclose(
            sp.probs, [m1 * m2, m1 * (1 - m2), (1 - m1) * m2, (1 - m1) * (1 - m2)], atol=1e-15
        )

    def test_high_correlation_becomes_infeasible_for_coarse_steps(self):
        cp = par1(rho=0.99, t_max=1.0)
        feasible_at = []
        for n in (1000, 100, 10, 3, 2, 1):
            try:
                calibrate(cp, n)
                feasible_at.append(n)
            except InfeasibleProbabilities as exc:
                assert any(p < 0 for p in exc.probs)
                assert "p" in str(exc)
                break
        else:
            pytest.fail("expected a coarse step to be infeasible")
        assert 1000 in feasible_at

    def test_rejects_bad_steps(self):
        with pytest.raises(ValueError):
            calibrate(par1(), 0)

    def test_marginals_approach_half(self):
        cp = base_case()
        gaps = [abs(m - 0.5) for n in (10, 20, 40, 80, 160) for m in marginals(cp, n)]
        s_gaps, y_gaps = gaps[0::2], gaps[1::2]
        assert all(np.diff(s_gaps) < 0) and all(np.diff(y_gaps) < 0)
        # gap shrinks like sqrt(dt)
        np.testing.assert_allclose(np.array(s_gaps[:-1]) / s_gaps[1:], math.sqrt(2), rtol=0.02)
        np.testing.assert_allclose(np.array(y_gaps[:-1]) / y_gaps[1:], math.sqrt(2), rtol=0.02)

    @settings(max_examples=200, deadline=None)
    @given(
        rho=st.floats(-0.9, 0.9),
        sigma=st.floats(0.1, 0.6),
        beta=st.floats(0.1, 0.6),
        mu=st.floats(0.0, 0.15),
        alpha=st.floats(0.0, 0.15),
        n=st.integers(50, 400),
    )
    def test_moment_identities(self, rho, sigma, beta, mu, alpha, n):
        cp = ContinuousParams(mu, sigma, alpha, beta, 0.05, 0.02, rho, 1.0, 1.0, 3.0)
        try:
            sp = calibrate(cp, n)
        except InfeasibleProbabilities:
            return
        m1, m2 = marginals(cp, n)
        assert abs(math.fsum(sp.probs) - 1.0) <= 1e-12
        assert abs(sp.p1 + sp.p2 - m1) <= 1e-12
        assert abs(sp.p1 + sp.p3 - m2) <= 1e-12
        cov = rho * beta * sigma * sp.dt / ((sp.u - sp.d) * (sp.h - sp.ell))
        assert abs(sp.p1 * sp.p4 - sp.p2 * sp.p3 - cov) <= 1e-12
        assert sp.q == (1 - sp.d) / (sp.u - sp.d)
        assert 0 < sp.q < 1


class TestStepParams:
    def test_rejects_negative_probability(self):
        with pytest.raises(InfeasibleProbabilities):
            StepParams(1.2, 0.8, 1.3, 1 / 1.3, 0.6, -0.1, 0.25, 0.25)

    def test_rejects_bad_multipliers(self):
        with pytest.raises(ValueError):
            StepParams(0.9, 0.8, 1.3, 1 / 1.3, 0.25, 0.25, 0.25, 0.25)

    def test_perfectly_correlated_keeps_s_marginal(self):
        sp = calibrate(par1(), 100)
        full = perfectly_correlated(sp)
        assert full.p2 == full.p3 == 0.0
        assert full.p1 == pytest.approx(sp.p1 + sp.p2, abs=1e-15)


class TestContinuousParams:
    @pytest.mark.parametrize("field", ["sigma", "beta", "s0", "y0", "t_max"])
    def test_positive_fields(self, field):
        with pytest.raises(ValueError, match=field):
            par1(**{field: 0.0})

    def test_rho_range(self):
        with pytest.raises(ValueError, match="rho"):
            par1(rho=1.5)


class TestGrid:
    def test_one_step(self):
        assert list(grid_values(1, 1.0, 2.0).values) == [2.0, 1.0, 0.5]

    def test_two_steps(self):
        np.testing.assert_allclose(
            grid_values(2, 1.0, 1.1).values, [1.21, 1.1, 1.0, 1 / 1.1, 1 / 1.21], rtol=1e-15
        )

    @pytest.mark.parametrize("n", [1, 7, 100, 500])
    def test_shape_and_symmetry(self, n):
        g = grid_values(n, 1.7, math.exp(0.3 * math.sqrt(5 / n)))
        v = g.values
        assert v.size == 2 * n + 1
        assert v[n] == 1.7
        assert np.all(np.diff(v) < 0)
        np.testing.assert_allclose(v[:-1] / v[1:], g.h, rtol=1e-13)
        np.testing.assert_allclose(v * v[::-1], 1.7**2, rtol=1e-13)
        assert v[0] == pytest.approx(g.h**n * 1.7, rel=1e-13)

    @pytest.mark.parametrize("args", [(0, 1.0, 1.1), (2, 0.0, 1.1), (2, 1.0, 1.0)])
    def test_preconditions(self, args):
        with pytest.raises(ValueError):
            grid_values(*args)
