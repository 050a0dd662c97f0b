"""Constant-rate equilibria with a traded annuity, plus the bank-account verdict.

Without trade each agent sits at its autarky shadow rate and the market
rate is only pinned down to an interval.  With trade the buyer's shadow
rate is r/(1+lam) and the seller's r/(1-lam); in continuous time r is
explicit, in discrete time it is the root of a strictly increasing
function found by bisection on a guaranteed bracket.
"""
from __future__ import annotations

import math
from dataclasses import dataclass, field, replace
from typing import Callable, Union

from .errors import InvalidParams, NumericalFailure, PreconditionViolated
from .model import (
    AgentParams,
    Continuous,
    Discrete,
    Grid,
    MarketParams,
    Regime,
    autarky_rate,
    check_lambda,
    classify_regime,
    effective_discount,
    require_positive_discount,
)

BISECT_MAX_ITER = 200
BISECT_RTOL = 1e-14
BANK_EQ_RTOL = 1e-12
BRACKET_SLACK = 1e-12


@dataclass(frozen=True)
class RateInterval:
    lo: float
    hi: float

    def __post_init__(self):
        if not (0 < self.lo <= self.hi):
            raise InvalidParams(f"invalid rate interval [{self.lo!r}, {self.hi!r}]")

    @property
    def mid(self) -> float:
        return 0.5 * (self.lo + self.hi)

    def __contains__(self, r: float) -> bool:
        return self.lo <= r <= self.hi


@dataclass(frozen=True)
class EquilibriumSolution:
    """Equilibrium shadow rates, market rate and agent 1's trade.

    ``trade_per_step`` is agent 1's share purchase per period in discrete
    time and its purchase rate d(theta_1)/dt in continuous time.
    """

    regime: Regime
    shadow_rate_1: float
    shadow_rate_2: float
    market_rate: Union[float, RateInterval]
    trade_per_step: float
    lam: float
    grid: Grid
    agents: tuple[AgentParams, AgentParams] = field(repr=False)

    @property
    def delta(self) -> float | None:
        return self.grid.delta if isinstance(self.grid, Discrete) else None

    @property
    def shadow_rates(self) -> tuple[float, float]:
        return self.shadow_rate_1, self.shadow_rate_2

    @property
    def annuity_values(self) -> tuple[float, float]:
        return 1.0 / self.shadow_rate_1, 1.0 / self.shadow_rate_2

    @property
    def r_lo(self) -> float:
        m = self.market_rate
        return m.lo if isinstance(m, RateInterval) else m

    @property
    def r_hi(self) -> float:
        m = self.market_rate
        return m.hi if isinstance(m, RateInterval) else m

    @property
    def r_mid(self) -> float:
        m = self.market_rate
        return m.mid if isinstance(m, RateInterval) else m

    @property
    def market(self) -> MarketParams:
        return MarketParams(self.lam, self.grid)


@dataclass(frozen=True)
class Infeasible:
    reason: str


@dataclass(frozen=True)
class NoTradeOnly:
    rate: float


BankVerdict = Union[Infeasible, NoTradeOnly]


def bisect(f: Callable[[float], float], lo: float, hi: float,
           rtol: float = BISECT_RTOL, max_iter: int = BISECT_MAX_ITER) -> float:
    """Root of an increasing f on [lo, hi] with f(lo) <= 0 <= f(hi)."""
    flo, fhi = f(lo), f(hi)
    if flo > 0 or fhi < 0:
        raise NumericalFailure(f"bracket [{lo!r}, {hi!r}] does not straddle a root "
                               f"(f = {flo!r}, {fhi!r})")
    if flo == 0:
        return lo
    if fhi == 0:
        return hi
    for _ in range(max_iter):
        mid = 0.5 * (lo + hi)
        if mid <= lo or mid >= hi:
            return mid
        fm = f(mid)
        if fm == 0:
            return mid
        if fm < 0:
            lo = mid
        else:
            hi = mid
        if hi - lo <= rtol * abs(mid):
            return 0.5 * (lo + hi)
    raise NumericalFailure(f"bisection did not reach rtol={rtol} in {max_iter} iterations")


# -- continuous time ---------------------------------------------------------

def case2_rate_cts(buyer: AgentParams, seller: AgentParams, lam: float) -> float:
    """(bt_b/alpha_b + bt_s/alpha_s) / (1/(alpha_b(1+lam)) + 1/(alpha_s(1-lam)))."""
    num = effective_discount(buyer) / buyer.alpha + effective_discount(seller) / seller.alpha
    den = 1.0 / (buyer.alpha * (1.0 + lam)) + 1.0 / (seller.alpha * (1.0 - lam))
    return num / den


def no_trade_interval(b1: float, b2: float, lam: float, delta: float | None = None) -> RateInterval:
    r1, r2 = autarky_rate(b1, delta), autarky_rate(b2, delta)
    lo, hi = (1.0 - lam) * max(r1, r2), (1.0 + lam) * min(r1, r2)
    if lo > hi and lo - hi <= 1e-12 * hi:
        # ratio sits on the band edge; rounding crossed the endpoints
        lo = hi = 0.5 * (lo + hi)
    return RateInterval(lo, hi)


def solve_cts(agents, lam: float) -> EquilibriumSolution:
    agents = tuple(agents)
    check_lambda(lam)
    b1, b2 = require_positive_discount(agents)
    regime = classify_regime(agents, MarketParams(lam, Continuous()))
    if regime is Regime.NO_TRADE:
        return EquilibriumSolution(regime, b1, b2, no_trade_interval(b1, b2, lam),
                                   0.0, lam, Continuous(), agents)
    if regime is Regime.AGENT1_BUYS:
        r = case2_rate_cts(agents[0], agents[1], lam)
        r1, r2 = r / (1.0 + lam), r / (1.0 - lam)
    else:
        r = case2_rate_cts(agents[1], agents[0], lam)
        r1, r2 = r / (1.0 - lam), r / (1.0 + lam)
    trade = (r1 - b1) / agents[0].alpha
    return EquilibriumSolution(regime, r1, r2, r, trade, lam, Continuous(), agents)


# -- discrete time -----------------------------------------------------------

def case2_bracket(buyer: AgentParams, seller: AgentParams, lam: float, delta: float) -> tuple[float, float]:
    """Open interval for the market rate when ``buyer`` buys."""
    lo = (1.0 + lam) * math.expm1(effective_discount(buyer) * delta) / delta
    hi = (1.0 - lam) * math.expm1(effective_discount(seller) * delta) / delta
    return lo, hi


def log_g(buyer: AgentParams, seller: AgentParams, lam: float, delta: float, r: float) -> float:
    """Logarithm of the market-clearing product G(delta, r); delta = 0 is the limit."""
    if delta == 0:
        return r * (1.0 / (buyer.alpha * (1.0 + lam)) + 1.0 / (seller.alpha * (1.0 - lam)))
    u = r * delta
    return (math.log1p(u / (1.0 + lam)) / buyer.alpha
            + math.log1p(u / (1.0 - lam)) / seller.alpha) / delta


def log_g_target(buyer: AgentParams, seller: AgentParams) -> float:
    return effective_discount(buyer) / buyer.alpha + effective_discount(seller) / seller.alpha


def root_residual(buyer: AgentParams, seller: AgentParams, lam: float, delta: float, r: float) -> float:
    """Relative residual G(delta, r)/exp(target) - 1."""
    return math.expm1(log_g(buyer, seller, lam, delta, r) - log_g_target(buyer, seller))


def case2_rate_discrete(buyer: AgentParams, seller: AgentParams, lam: float, delta: float) -> float:
    # Solve in u = r*delta so small steps do not cancel.
    target = log_g_target(buyer, seller) * delta
    ab, as_ = buyer.alpha, seller.alpha

    def h(u):
        return math.log1p(u / (1.0 + lam)) / ab + math.log1p(u / (1.0 - lam)) / as_ - target

    lo, hi = case2_bracket(buyer, seller, lam, delta)
    # h is strictly increasing; the slack absorbs rounding near a degenerate bracket
    u = bisect(h, lo * delta * (1 - BRACKET_SLACK), hi * delta * (1 + BRACKET_SLACK))
    r = min(max(u / delta, lo), hi)
    if abs(root_residual(buyer, seller, lam, delta, r)) > 1e-10:
        raise NumericalFailure(f"root residual too large at r={r!r}")
    return r


def solve_discrete(agents, lam: float, delta: float) -> EquilibriumSolution:
    agents = tuple(agents)
    check_lambda(lam)
    grid = Discrete(delta)
    b1, b2 = require_positive_discount(agents)
    regime = classify_regime(agents, MarketParams(lam, grid))
    if regime is Regime.NO_TRADE:
        return EquilibriumSolution(regime, autarky_rate(b1, delta), autarky_rate(b2, delta),
                                   no_trade_interval(b1, b2, lam, delta), 0.0, lam, grid, agents)
    if regime is Regime.AGENT1_BUYS:
        r = case2_rate_discrete(agents[0], agents[1], lam, delta)
        r1, r2 = r / (1.0 + lam), r / (1.0 - lam)
    else:
        r = case2_rate_discrete(agents[1], agents[0], lam, delta)
        r1, r2 = r / (1.0 - lam), r / (1.0 + lam)
    trade = (math.log1p(r1 * delta) - b1 * delta) / agents[0].alpha
    return EquilibriumSolution(regime, r1, r2, r, trade, lam, grid, agents)


def solve(agents, market: MarketParams) -> EquilibriumSolution:
    if market.delta is None:
        return solve_cts(agents, market.lam)
    return solve_discrete(agents, market.lam, market.delta)


def buyer_seller(solution: EquilibriumSolution) -> tuple[AgentParams, AgentParams]:
    a1, a2 = solution.agents
    if solution.regime is Regime.AGENT1_BUYS:
        return a1, a2
    if solution.regime is Regime.AGENT2_BUYS:
        return a2, a1
    raise PreconditionViolated("no buyer in a no-trade equilibrium")


def with_market_rate(solution: EquilibriumSolution, rate: float) -> EquilibriumSolution:
    """Replace the market rate by an externally supplied value.

    In a trade regime the shadow rates stay pinned to the band edges around
    ``rate`` and agent 1's trade is recomputed from its own policy, so
    clearing generally breaks.  Without trade only the quoted rate changes.
    """
    if not rate > 0:
        raise InvalidParams(f"market rate must be > 0, got {rate!r}")
    lam = solution.lam
    if solution.regime is Regime.NO_TRADE:
        return replace(solution, market_rate=RateInterval(rate, rate))
    if solution.regime is Regime.AGENT1_BUYS:
        r1, r2 = rate / (1.0 + lam), rate / (1.0 - lam)
    else:
        r1, r2 = rate / (1.0 - lam), rate / (1.0 + lam)
    a1 = solution.agents[0]
    bt1 = effective_discount(a1)
    if solution.delta is None:
        trade = (r1 - bt1) / a1.alpha
    else:
        d = solution.delta
        trade = (math.log1p(r1 * d) - bt1 * d) / a1.alpha
    return replace(solution, shadow_rate_1=r1, shadow_rate_2=r2, market_rate=rate, trade_per_step=trade)


# -- bank account ------------------------------------------------------------

def check_bank_constant_equilibrium(agents, lam: float, delta: float) -> BankVerdict:
    """Can a traded bank account support constant shadow rates?

    Closeness must hold for every power ((1 + r1 d)/(1 + r2 d))^n, which for
    lam > 0 forces r1 = r2 and no trade, hence F1(r1) = F2(r2) = 0.  That
    system is solvable only when the effective discounts coincide.
    """
    agents = tuple(agents)
    if lam == 0:
        raise PreconditionViolated("bank-account theorem needs lambda > 0")
    check_lambda(lam)
    Discrete(delta)
    b1, b2 = require_positive_discount(agents)
    if abs(b1 - b2) > BANK_EQ_RTOL * max(1.0, abs(b1)):
        return Infeasible(
            "constant shadow rates force r1 = r2 with no trade, so F1(r1) = F2(r2) = 0 "
            f"would need log(1 + r delta) = bt1*delta = bt2*delta, but bt1 = {b1!r} != bt2 = {b2!r}"
        )
    return NoTradeOnly(autarky_rate(b1, delta))
