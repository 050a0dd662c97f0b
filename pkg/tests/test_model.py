import math

import pytest
from hypothesis import given, strategies as st
from mpmath import mp, mpf, log as mlog

from conftest import agent_with_discount
from tcequilibrium.errors import InvalidParams
from tcequilibrium.model import (
    AgentParams,
    Continuous,
    Discrete,
    MarketParams,
    Regime,
    classify_regime,
    effective_discount,
    excess_demand_cts,
    excess_demand_discrete,
)

mp.dps = 40

pos = st.floats(0.01, 2.0)
lams = st.floats(0.0, 0.9)


@pytest.mark.parametrize("alpha,beta,mu,sigma,expected", [
    (2, 0.1, 0.1, 0.1, 0.28),
    (1, 0.1, 0.0, 0.0, 0.1),
    (1, 0.05, 0.1, 0.3, 0.105),
])
def test_effective_discount(alpha, beta, mu, sigma, expected):
    assert effective_discount(AgentParams(alpha, beta, mu, sigma)) == pytest.approx(expected, abs=1e-15)


@given(st.floats(0.1, 3), st.floats(0.01, 1), st.floats(-1, 1), st.floats(0, 1), st.floats(0, 1))
def test_effective_discount_depends_on_mu_sigma_only_through_combination(alpha, beta, mu, sigma, sigma2):
    # pick mu2 so that alpha*mu - alpha^2 sigma^2 / 2 is unchanged
    mu2 = mu + 0.5 * alpha * (sigma2**2 - sigma**2)
    a = AgentParams(alpha, beta, mu, sigma)
    b = AgentParams(alpha, beta, mu2, sigma2)
    assert effective_discount(a) == pytest.approx(effective_discount(b), abs=1e-12)


@pytest.mark.parametrize("kwargs,msg", [
    (dict(alpha=0, beta=0.1, mu=0, sigma=0), "alpha"),
    (dict(alpha=1, beta=-0.1, mu=0, sigma=0), "beta"),
    (dict(alpha=1, beta=0.1, mu=0, sigma=-1), "sigma"),
])
def test_agent_invariants(kwargs, msg):
    with pytest.raises(InvalidParams, match=msg):
        AgentParams(**kwargs)


def test_market_invariants():
    with pytest.raises(InvalidParams, match=r"lambda must be in \[0,1\)"):
        MarketParams(1.0)
    with pytest.raises(InvalidParams):
        MarketParams(-0.1)
    with pytest.raises(InvalidParams):
        Discrete(0.0)


def _f_oracle(r, alpha, bt, delta):
    r, bt, delta = mpf(r), mpf(bt), mpf(delta)
    return (mlog(1 + r * delta) - bt * delta) / (alpha * r)


def test_excess_demand_discrete_examples():
    a = agent_with_discount(1.0, 0.1)
    assert excess_demand_discrete(0.2, a, 1.0) == pytest.approx(0.41160778, abs=1e-8)
    assert excess_demand_discrete(0.05, a, 1.0) == pytest.approx(-1.02419672, abs=1e-8)
    assert excess_demand_discrete(0.2, a, 1.0) == pytest.approx(float(_f_oracle(0.2, 1, 0.1, 1)), rel=1e-14)
    root = math.expm1(0.1 * 0.5) / 0.5
    assert abs(excess_demand_discrete(root, a, 0.5)) < 1e-16


def test_excess_demand_cts_examples():
    assert excess_demand_cts(0.2, agent_with_discount(1.0, 0.1)) == pytest.approx(0.5, abs=1e-15)
    assert excess_demand_cts(0.2, agent_with_discount(2.0, 0.3)) == pytest.approx(-0.25, abs=1e-15)
    assert excess_demand_cts(0.1, agent_with_discount(1.0, 0.1)) == pytest.approx(0.0, abs=1e-15)


@pytest.mark.parametrize("f", [lambda r, a: excess_demand_discrete(r, a, 1.0), excess_demand_cts])
def test_excess_demand_rejects_nonpositive_rate(f):
    with pytest.raises(InvalidParams):
        f(0.0, agent_with_discount(1.0, 0.1))


@given(pos, pos, st.floats(0.001, 1.0), st.floats(0.01, 1.0), st.floats(0.01, 1.0))
def test_excess_demand_discrete_sign_and_monotone(alpha, bt, delta, r, dr):
    a = agent_with_discount(alpha, bt)
    f = excess_demand_discrete(r, a, delta)
    gap = r * delta - math.expm1(bt * delta)
    if abs(gap) > 1e-12:
        assert math.copysign(1, f) == math.copysign(1, gap)
    # alpha * r * F(r) = log(1 + r delta) - bt delta is increasing in r
    g0 = alpha * r * f
    g1 = alpha * (r + dr) * excess_demand_discrete(r + dr, a, delta)
    assert g1 > g0


@pytest.mark.parametrize("delta,tol", [(1e-2, 1e-2), (1e-4, 1e-4), (1e-6, 1e-6)])
@pytest.mark.parametrize("r", [0.05, 0.2, 0.7])
def test_discrete_excess_demand_per_unit_time_tends_to_continuous(r, delta, tol):
    a = agent_with_discount(1.5, 0.1)
    assert abs(excess_demand_discrete(r, a, delta) / delta - excess_demand_cts(r, a)) < tol


def test_classify_examples():
    m = MarketParams(0.1, Discrete(0.5))
    ag = agent_with_discount(1, 0.1), agent_with_discount(1, 0.3)
    assert classify_regime(ag, m) is Regime.AGENT1_BUYS
    ratio = math.expm1(0.15) / math.expm1(0.05)
    assert ratio == pytest.approx(3.15644, abs=1e-5)

    cts = MarketParams(0.1, Continuous())
    assert classify_regime((agent_with_discount(1, 0.2), agent_with_discount(1, 0.21)), cts) is Regime.NO_TRADE
    assert classify_regime((agent_with_discount(1, 0.3), agent_with_discount(1, 0.1)), cts) is Regime.AGENT2_BUYS


def test_classify_boundary_is_no_trade():
    # lam = 0.5 and discounts (0.25, 0.75) put the ratio exactly on the edge 3
    ag = agent_with_discount(1, 0.25), agent_with_discount(1, 0.75)
    assert ag[1].beta_tilde / ag[0].beta_tilde == 3.0
    assert classify_regime(ag, MarketParams(0.5, Continuous())) is Regime.NO_TRADE
    assert classify_regime(ag[::-1], MarketParams(0.5, Continuous())) is Regime.NO_TRADE


def test_classify_rejects_nonpositive_discount():
    ag = AgentParams(1, 0.01, -1.0, 0.0), agent_with_discount(1, 0.1)
    with pytest.raises(InvalidParams, match="beta_tilde"):
        classify_regime(ag, MarketParams(0.1))


@given(pos, pos, pos, pos, lams, st.one_of(st.none(), st.floats(0.01, 2.0)))
def test_classify_swap_symmetry(a1, a2, b1, b2, lam, delta):
    grid = Continuous() if delta is None else Discrete(delta)
    m = MarketParams(lam, grid)
    x, y = agent_with_discount(a1, b1), agent_with_discount(a2, b2)
    assert classify_regime((y, x), m) is classify_regime((x, y), m).swapped()
