"""Closed-form optimal policies and value functions for one agent.

The agent faces a constant shadow interest rate ``r`` (annuity value 1/r)
in a frictionless shadow market.  Wealth is X = theta/r, so holdings are
always ``r * X``.  Functions broadcast over numpy arrays in the state
arguments.
"""
from __future__ import annotations

import math
from dataclasses import dataclass

import numpy as np

from .errors import InvalidParams, PreconditionViolated
from .model import AgentParams, Continuous, Discrete, Grid, effective_discount


@dataclass(frozen=True)
class PolicyContext:
    agent: AgentParams
    shadow_rate: float
    grid: Grid

    def __post_init__(self):
        if not self.shadow_rate > 0:
            raise InvalidParams(f"shadow_rate must be > 0, got {self.shadow_rate!r}")

    @property
    def annuity_value(self) -> float:
        return 1.0 / self.shadow_rate

    @property
    def delta(self) -> float:
        if not isinstance(self.grid, Discrete):
            raise PreconditionViolated("operation requires a discrete grid")
        return self.grid.delta

    def _require_cts(self):
        if not isinstance(self.grid, Continuous):
            raise PreconditionViolated("operation requires continuous time")


def holdings(ctx: PolicyContext, wealth):
    return ctx.shadow_rate * np.asarray(wealth)


# -- discrete time -----------------------------------------------------------

def trade_per_step(ctx: PolicyContext) -> float:
    """Shares bought each period: (log(1 + r*delta) - bt*delta) / alpha."""
    a = ctx.agent
    d = ctx.delta
    return (math.log1p(ctx.shadow_rate * d) - effective_discount(a) * d) / a.alpha


def optimal_wealth_discrete(ctx: PolicyContext, n):
    """theta0/r + t_n/(alpha r) * (log(1 + r delta)/delta - bt); deterministic in n."""
    r, d = ctx.shadow_rate, ctx.delta
    a = ctx.agent
    drift = (math.log1p(r * d) - effective_discount(a) * d) / (a.alpha * r)
    return a.theta0 / r + np.asarray(n) * drift


def optimal_consumption_discrete(ctx: PolicyContext, wealth, income):
    r, d = ctx.shadow_rate, ctx.delta
    a = ctx.agent
    adj = (effective_discount(a) * d - math.log1p(r * d)) / (a.alpha * r * d)
    return r * np.asarray(wealth) + np.asarray(income) + adj


def value_discrete(ctx: PolicyContext, x, y):
    """J(x, y) = -(1/(r d)) (1 + r d)^(1 + 1/(r d)) exp(-alpha r x - alpha y - bt/r)."""
    r, d = ctx.shadow_rate, ctx.delta
    a = ctx.agent
    rd = r * d
    log_k = -math.log(rd) + (1.0 + 1.0 / rd) * math.log1p(rd)
    return -np.exp(log_k - a.alpha * r * np.asarray(x) - a.alpha * np.asarray(y)
                   - effective_discount(a) / r)


def expected_next_value(ctx: PolicyContext, x, y, c):
    """E[J(X', Y')] one period after consuming c in state (x, y).

    X' = x + (x r + y - c) delta and Y' = y + mu delta + sigma sqrt(delta) Z;
    the Gaussian term integrates to exp(alpha^2 sigma^2 delta / 2).
    """
    r, d = ctx.shadow_rate, ctx.delta
    a = ctx.agent
    x = np.asarray(x)
    y = np.asarray(y)
    x_next = x + (x * r + y - np.asarray(c)) * d
    return value_discrete(ctx, x_next, y + a.mu * d) * math.exp(0.5 * (a.alpha * a.sigma) ** 2 * d)


# -- continuous time ---------------------------------------------------------

def trade_rate_cts(ctx: PolicyContext) -> float:
    """d theta / dt = (r - bt) / alpha."""
    ctx._require_cts()
    return (ctx.shadow_rate - effective_discount(ctx.agent)) / ctx.agent.alpha


def optimal_wealth_cts(ctx: PolicyContext, t):
    ctx._require_cts()
    a = ctx.agent
    r = ctx.shadow_rate
    return a.theta0 / r + (1.0 - effective_discount(a) / r) / a.alpha * np.asarray(t)


def optimal_consumption_cts(ctx: PolicyContext, wealth, income):
    ctx._require_cts()
    a = ctx.agent
    r = ctx.shadow_rate
    return r * np.asarray(wealth) + np.asarray(income) + effective_discount(a) / (r * a.alpha) - 1.0 / a.alpha


def value_cts(ctx: PolicyContext, x, y):
    ctx._require_cts()
    a = ctx.agent
    r = ctx.shadow_rate
    return -np.exp(-a.alpha * r * np.asarray(x) - a.alpha * np.asarray(y)
                   + 1.0 - effective_discount(a) / r) / r
