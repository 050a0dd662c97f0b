"""Model primitives: agent and market parameters, excess demand, regimes.

Two CARA agents with arithmetic Brownian income trade a single annuity
(one unit per unit time forever) under a proportional transaction cost
``lam``.  Everything here is a pure function of frozen dataclasses.
"""
from __future__ import annotations

import enum
import math
from dataclasses import dataclass
from typing import Union

from .errors import InvalidParams


@dataclass(frozen=True)
class AgentParams:
    """Preferences, income law and endowment of one agent.

    alpha  -- absolute risk aversion
    beta   -- time preference rate
    mu     -- income drift per unit time
    sigma  -- income volatility per sqrt(time)
    theta0 -- initial annuity shares
    y0     -- initial income level
    """

    alpha: float
    beta: float
    mu: float
    sigma: float
    theta0: float = 0.5
    y0: float = 0.0

    def __post_init__(self):
        problems = []
        for name in ("alpha", "beta", "mu", "sigma", "theta0", "y0"):
            if not math.isfinite(getattr(self, name)):
                problems.append(f"{name} must be finite")
        if not self.alpha > 0:
            problems.append("alpha must be > 0")
        if not self.beta > 0:
            problems.append("beta must be > 0")
        if not self.sigma >= 0:
            problems.append("sigma must be >= 0")
        if problems:
            raise InvalidParams("; ".join(problems))

    @property
    def beta_tilde(self) -> float:
        return effective_discount(self)


@dataclass(frozen=True)
class Discrete:
    delta: float

    def __post_init__(self):
        if not (math.isfinite(self.delta) and self.delta > 0):
            raise InvalidParams("delta must be > 0")


@dataclass(frozen=True)
class Continuous:
    pass


Grid = Union[Discrete, Continuous]


@dataclass(frozen=True)
class MarketParams:
    lam: float
    grid: Grid = Continuous()

    def __post_init__(self):
        check_lambda(self.lam)

    @property
    def delta(self) -> float | None:
        return self.grid.delta if isinstance(self.grid, Discrete) else None


class Regime(enum.Enum):
    NO_TRADE = "no_trade"
    AGENT1_BUYS = "agent1_buys"
    AGENT2_BUYS = "agent2_buys"

    def swapped(self) -> "Regime":
        if self is Regime.AGENT1_BUYS:
            return Regime.AGENT2_BUYS
        if self is Regime.AGENT2_BUYS:
            return Regime.AGENT1_BUYS
        return self


def check_lambda(lam: float) -> None:
    if not (0.0 <= lam < 1.0):
        raise InvalidParams("lambda must be in [0,1)")


def effective_discount(agent: AgentParams) -> float:
    """beta + alpha*mu - alpha**2 * sigma**2 / 2."""
    return agent.beta + agent.alpha * agent.mu - 0.5 * agent.alpha**2 * agent.sigma**2


def require_positive_discount(agents) -> tuple[float, float]:
    bt = tuple(effective_discount(a) for a in agents)
    bad = [f"agents[{i}]: beta_tilde = {b!r} must be > 0" for i, b in enumerate(bt) if not b > 0]
    if bad:
        raise InvalidParams("; ".join(bad))
    return bt


def autarky_rate(beta_tilde: float, delta: float | None = None) -> float:
    """Shadow rate at which an agent does not trade: expm1(bt*delta)/delta, or bt."""
    if delta is None:
        return beta_tilde
    return math.expm1(beta_tilde * delta) / delta


def excess_demand_discrete(r: float, agent: AgentParams, delta: float) -> float:
    """Per-period value of the agent's desired annuity trade at shadow rate r.

    F(r) = (log(1 + r*delta) - beta_tilde*delta) / (alpha*r).  Its sign is the
    sign of r*delta - expm1(beta_tilde*delta).
    """
    if not r > 0:
        raise InvalidParams(f"shadow rate must be > 0, got {r!r}")
    return (math.log1p(r * delta) - effective_discount(agent) * delta) / (agent.alpha * r)


def excess_demand_cts(r: float, agent: AgentParams) -> float:
    """Continuous-time analog: (1 - beta_tilde/r) / alpha."""
    if not r > 0:
        raise InvalidParams(f"shadow rate must be > 0, got {r!r}")
    return (1.0 - effective_discount(agent) / r) / agent.alpha


def band(lam: float) -> tuple[float, float]:
    """Closed interval allowed for the ratio of shadow annuity values."""
    return (1.0 - lam) / (1.0 + lam), (1.0 + lam) / (1.0 - lam)


def discount_ratio(agents, market: MarketParams) -> float:
    """expm1(bt2*delta)/expm1(bt1*delta) in discrete time, bt2/bt1 in continuous time."""
    b1, b2 = require_positive_discount(agents)
    delta = market.delta
    if delta is None:
        return b2 / b1
    return math.expm1(b2 * delta) / math.expm1(b1 * delta)


def classify_regime(agents, market: MarketParams) -> Regime:
    ratio = discount_ratio(agents, market)
    lo, hi = band(market.lam)
    if ratio > hi:
        return Regime.AGENT1_BUYS
    if ratio < lo:
        return Regime.AGENT2_BUYS
    return Regime.NO_TRADE
