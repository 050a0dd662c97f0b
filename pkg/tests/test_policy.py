import math

import numpy as np
import pytest
from hypothesis import given, settings, strategies as st
from mpmath import mp, mpf, exp as mexp, log as mlog

from conftest import agent_with_discount
from tcequilibrium.errors import InvalidParams, PreconditionViolated
from tcequilibrium.model import AgentParams, Continuous, Discrete
from tcequilibrium.policy import (
    PolicyContext,
    expected_next_value,
    holdings,
    optimal_consumption_cts,
    optimal_consumption_discrete,
    optimal_wealth_cts,
    optimal_wealth_discrete,
    trade_per_step,
    trade_rate_cts,
    value_cts,
    value_discrete,
)

mp.dps = 40


def dctx(r=0.2, alpha=1.0, bt=0.1, delta=1.0, theta0=0.5, **kw):
    return PolicyContext(agent_with_discount(alpha, bt, theta0=theta0, **kw), r, Discrete(delta))


def cctx(r=0.2, alpha=1.0, bt=0.1, theta0=0.5, **kw):
    return PolicyContext(agent_with_discount(alpha, bt, theta0=theta0, **kw), r, Continuous())


def test_context_validation():
    with pytest.raises(InvalidParams):
        PolicyContext(agent_with_discount(1, 0.1), 0.0, Continuous())
    with pytest.raises(PreconditionViolated):
        optimal_wealth_discrete(cctx(), 1)
    with pytest.raises(PreconditionViolated):
        optimal_wealth_cts(dctx(), 1.0)


class TestDiscrete:
    def test_wealth_examples(self):
        ctx = dctx()
        assert optimal_wealth_discrete(ctx, 0) == pytest.approx(2.5, abs=1e-15)
        oracle = mpf("2.5") + 2 / mpf("0.2") * (mlog(mpf("1.2")) - mpf("0.1"))
        assert optimal_wealth_discrete(ctx, 2) == pytest.approx(float(oracle), rel=1e-14)
        assert optimal_wealth_discrete(ctx, 2) == pytest.approx(3.32321557, abs=1e-8)

    def test_wealth_constant_at_autarky_rate(self):
        ctx = dctx(r=math.expm1(0.1 * 0.5) / 0.5, delta=0.5)
        x = optimal_wealth_discrete(ctx, np.arange(50))
        assert np.all(np.abs(x - 0.5 / ctx.shadow_rate) < 1e-13)

    def test_consumption_examples(self):
        ctx = dctx()
        oracle = mpf("0.5") + 1 + (mpf("0.1") - mlog(mpf("1.2"))) / mpf("0.2")
        assert optimal_consumption_discrete(ctx, 2.5, 1.0) == pytest.approx(float(oracle), rel=1e-14)
        assert optimal_consumption_discrete(ctx, 2.5, 1.0) == pytest.approx(1.08839222, abs=1e-8)
        root = dctx(r=math.expm1(0.1))
        assert optimal_consumption_discrete(root, 2.5, 1.0) == pytest.approx(root.shadow_rate * 2.5 + 1.0, abs=1e-15)

    def test_consumption_affine(self):
        ctx = dctx()
        x, y = 2.5, 1.0
        c1 = optimal_consumption_discrete(ctx, x, y)
        c2 = optimal_consumption_discrete(ctx, 2 * x, 2 * y)
        assert c2 - c1 == pytest.approx(ctx.shadow_rate * x + y, abs=1e-14)

    def test_value_example(self):
        oracle = -(1 / mpf("0.2")) * mpf("1.2") ** 6 * mexp(mpf("-0.5"))
        assert value_discrete(dctx(), 0.0, 0.0) == pytest.approx(float(oracle), rel=1e-14)
        assert value_discrete(dctx(), 0.0, 0.0) == pytest.approx(-9.05546, abs=1e-5)

    @given(st.floats(-5, 5), st.floats(-5, 5), st.floats(-2, 2))
    def test_value_shift_and_sign(self, x, y, h):
        ctx = dctx(alpha=1.3, r=0.15, delta=0.25)
        v = value_discrete(ctx, x, y)
        assert v < 0
        assert value_discrete(ctx, x + h, y) == pytest.approx(v * math.exp(-1.3 * 0.15 * h), rel=1e-12)

    @pytest.mark.parametrize("delta", [1e-2, 1e-4])
    def test_value_times_delta_tends_to_continuous(self, delta):
        x, y = 1.2, 0.4
        vd = value_discrete(dctx(delta=delta), x, y) * delta
        vc = value_cts(cctx(), x, y)
        # first-order error in r*delta
        assert abs(vd / vc - 1) < 2 * 0.2 * delta

    @pytest.mark.parametrize("delta", [1e-2, 1e-4, 1e-6])
    def test_consumption_tends_to_continuous(self, delta):
        x, y = 2.5, 1.0
        cd = optimal_consumption_discrete(dctx(delta=delta), x, y)
        cc = optimal_consumption_cts(cctx(), x, y)
        assert abs(cd - cc) < 10 * delta

    def test_trade_constant_and_holdings_identity(self):
        ctx = dctx(r=0.3, alpha=2.0, bt=0.1, delta=0.5)
        n = np.arange(100)
        x = optimal_wealth_discrete(ctx, n)
        th = holdings(ctx, x)
        np.testing.assert_allclose(np.diff(th), trade_per_step(ctx), rtol=0, atol=1e-13)
        expected = (math.log1p(0.15) - 0.05) / 2.0
        assert trade_per_step(ctx) == pytest.approx(expected, rel=1e-14)

    @settings(max_examples=50)
    @given(st.floats(0.02, 1.0), st.floats(0.2, 3.0), st.floats(0.01, 0.5), st.floats(0.01, 1.0),
           st.lists(st.floats(-10, 10), min_size=5, max_size=30))
    def test_self_financing_along_any_income_path(self, r, alpha, bt, delta, ys):
        ctx = dctx(r=r, alpha=alpha, bt=bt, delta=delta)
        y = np.array(ys)
        n = np.arange(y.size + 1)
        th = ctx.shadow_rate * optimal_wealth_discrete(ctx, n)
        c = optimal_consumption_discrete(ctx, optimal_wealth_discrete(ctx, n[:-1]), y)
        lhs = np.diff(th) / r
        rhs = (y - c + th[:-1]) * delta
        scale = 1 + np.abs(c) * delta
        assert np.all(np.abs(lhs - rhs) <= 1e-12 * scale)

    def test_wealth_recursion_matches_closed_form(self):
        ctx = dctx(r=0.2083, alpha=1.0, bt=0.1, delta=0.5)
        rng = np.random.default_rng(3)
        n_steps = 10_000
        y = 1.0 + np.cumsum(rng.normal(0, 0.07, n_steps))
        x = np.empty(n_steps + 1)
        x[0] = 0.5 / ctx.shadow_rate
        for k in range(n_steps):
            c = optimal_consumption_discrete(ctx, x[k], y[k])
            x[k + 1] = x[k] + (x[k] * ctx.shadow_rate + y[k] - c) * 0.5
        closed = optimal_wealth_discrete(ctx, np.arange(n_steps + 1))
        # machine precision relative to the size of the accumulated wealth
        assert np.max(np.abs(x - closed)) < 1e-12 * np.max(np.abs(closed)) * 100

    @pytest.mark.parametrize("alpha,bt,sigma,mu,r,delta", [
        (1.0, 0.1, 0.1, 0.005, 0.19, 0.5),
        (2.5, 0.3, 0.4, -0.1, 0.05, 1.0),
        (0.5, 0.05, 0.0, 0.05, 0.7, 0.01),
    ])
    def test_bellman_identity_against_quadrature(self, alpha, bt, sigma, mu, r, delta):
        """-exp(-alpha c*) + exp(-beta delta) E J(X', Y') = J(x, y) at the optimal c*."""
        ctx = dctx(r=r, alpha=alpha, bt=bt, delta=delta, sigma=sigma, mu=mu)
        a = ctx.agent
        x, y = 1.7, -0.3
        c = optimal_consumption_discrete(ctx, x, y)
        # Gauss-Hermite (probabilists') quadrature of E[J] over the income shock
        nodes, weights = np.polynomial.hermite_e.hermegauss(60)
        weights = weights / weights.sum()
        x1 = x + (x * r + y - c) * delta
        y1 = y + a.mu * delta + a.sigma * math.sqrt(delta) * nodes
        quad = float(np.sum(weights * value_discrete(ctx, x1, y1)))
        assert expected_next_value(ctx, x, y, c) == pytest.approx(quad, rel=1e-12)
        lhs = -math.exp(-a.alpha * c) + math.exp(-a.beta * delta) * quad
        assert lhs == pytest.approx(value_discrete(ctx, x, y), rel=1e-12)

    def test_optimal_consumption_maximizes_one_step_objective(self):
        ctx = dctx(r=0.19, alpha=1.0, bt=0.1, delta=0.5, sigma=0.1, mu=0.005)
        a = ctx.agent
        x, y = 2.0, 1.0
        c_star = optimal_consumption_discrete(ctx, x, y)

        def objective(c):
            return -math.exp(-a.alpha * c) + math.exp(-a.beta * 0.5) * expected_next_value(ctx, x, y, c)

        grid = c_star + np.linspace(-0.5, 0.5, 201)
        vals = np.array([objective(c) for c in grid])
        assert grid[np.argmax(vals)] == pytest.approx(c_star, abs=0.005)
        assert objective(c_star) == pytest.approx(value_discrete(ctx, x, y), rel=1e-12)


class TestContinuous:
    def test_wealth(self):
        ctx = cctx()
        t = np.array([0.0, 1.0, 7.5])
        np.testing.assert_allclose(optimal_wealth_cts(ctx, t), 2.5 + 0.5 * t, rtol=0, atol=1e-14)
        flat = cctx(r=0.1)
        np.testing.assert_allclose(optimal_wealth_cts(flat, t), 0.5 / 0.1, atol=1e-14)

    def test_wealth_slope_is_excess_demand_and_trade_rate(self):
        from tcequilibrium.model import excess_demand_cts
        ctx = cctx(r=0.3, alpha=2.0, bt=0.12)
        slope = optimal_wealth_cts(ctx, 1.0) - optimal_wealth_cts(ctx, 0.0)
        assert slope == pytest.approx(excess_demand_cts(0.3, ctx.agent), rel=1e-14)
        assert trade_rate_cts(ctx) == pytest.approx(0.3 * slope, rel=1e-14)
        assert trade_rate_cts(ctx) == pytest.approx((0.3 - 0.12) / 2.0, rel=1e-14)

    def test_consumption(self):
        assert optimal_consumption_cts(cctx(), 2.5, 1.0) == pytest.approx(1.0, abs=1e-15)
        c = cctx(r=0.1)
        assert optimal_consumption_cts(c, 2.5, 1.0) == pytest.approx(0.1 * 2.5 + 1.0, abs=1e-15)

    def test_value(self):
        assert value_cts(cctx(), 0.0, 0.0) == pytest.approx(float(-5 * mexp(mpf("0.5"))), rel=1e-14)
        assert value_cts(cctx(), 0.0, 0.0) == pytest.approx(-8.24361, abs=1e-5)
        assert value_cts(cctx(r=0.1), 0.0, 0.0) == pytest.approx(-1 / 0.1, rel=1e-14)
        v = value_cts(cctx(), 1.0, 0.2)
        assert value_cts(cctx(), 1.5, 0.2) == pytest.approx(v * math.exp(-0.2 * 0.5), rel=1e-13)
