"""Comparative statics in the transaction cost and the time step."""
from __future__ import annotations

from dataclasses import dataclass

import numpy as np

from .errors import RegimeMismatch
from .model import Continuous, MarketParams, Regime, classify_regime, require_positive_discount
from .solver import (
    EquilibriumSolution,
    buyer_seller,
    case2_rate_cts,
    log_g,
    log_g_target,
    solve_cts,
    solve_discrete,
)

FD_STEP = 1e-6


@dataclass(frozen=True)
class SweepRow:
    param: float
    regime: Regime
    r_lo: float
    r_mid: float
    r_hi: float
    r1: float
    r2: float
    trade_rate: float

    @classmethod
    def from_solution(cls, param: float, sol: EquilibriumSolution) -> "SweepRow":
        return cls(param, sol.regime, sol.r_lo, sol.r_mid, sol.r_hi,
                   sol.shadow_rate_1, sol.shadow_rate_2, sol.trade_per_step)


def sweep_lambda(agents, lams) -> list[SweepRow]:
    agents = tuple(agents)
    return [SweepRow.from_solution(lam, solve_cts(agents, lam)) for lam in sorted(lams)]


def _trade_roles(agents, lam):
    regime = classify_regime(agents, MarketParams(lam, Continuous()))
    if regime is Regime.AGENT1_BUYS:
        return agents[0], agents[1]
    if regime is Regime.AGENT2_BUYS:
        return agents[1], agents[0]
    raise RegimeMismatch(f"no trade at lambda={lam!r}; the rate is not a smooth function there")


def rate_sensitivity(agents, lam: float, h: float = FD_STEP) -> tuple[float, float]:
    """dr/dlam of the continuous-time trade rate: (analytic, central difference).

    With N = bt_b/alpha_b + bt_s/alpha_s and D(lam) = 1/(alpha_b(1+lam)) +
    1/(alpha_s(1-lam)), r = N/D and dr/dlam = -N D'/D**2.  The difference
    quotient evaluates the rate formula directly, so it is defined at lam = 0.
    """
    agents = tuple(agents)
    require_positive_discount(agents)
    buyer, seller = _trade_roles(agents, lam)
    num = buyer.beta_tilde / buyer.alpha + seller.beta_tilde / seller.alpha
    den = 1.0 / (buyer.alpha * (1.0 + lam)) + 1.0 / (seller.alpha * (1.0 - lam))
    dden = -1.0 / (buyer.alpha * (1.0 + lam) ** 2) + 1.0 / (seller.alpha * (1.0 - lam) ** 2)
    analytic = -num * dden / den**2
    fd = (case2_rate_cts(buyer, seller, lam + h) - case2_rate_cts(buyer, seller, lam - h)) / (2 * h)
    return analytic, fd


@dataclass(frozen=True)
class DeltaSweep:
    rows: list[SweepRow]
    r0: float
    errors: np.ndarray
    g_residuals: np.ndarray
    g0_residual: float
    order: float
    constant: float


def convergence_order(deltas, errors) -> tuple[float, float]:
    """Fit |r(delta) - r(0)| ~ C * delta**p on a log-log scale; returns (p, C)."""
    p, logc = np.polyfit(np.log(deltas), np.log(errors), 1)
    return float(p), float(np.exp(logc))


def sweep_delta(agents, lam: float, deltas) -> DeltaSweep:
    agents = tuple(agents)
    cts = solve_cts(agents, lam)
    if cts.regime is Regime.NO_TRADE:
        raise RegimeMismatch("the continuous-time limit has no trade; r(delta) -> r(0) needs a trade regime")
    buyer, seller = buyer_seller(cts)
    target = log_g_target(buyer, seller)
    rows, errs, resid = [], [], []
    for d in deltas:
        sol = solve_discrete(agents, lam, d)
        rows.append(SweepRow.from_solution(d, sol))
        errs.append(abs(sol.r_mid - cts.r_mid))
        if sol.regime is cts.regime:
            resid.append(np.expm1(log_g(buyer, seller, lam, d, sol.r_mid) - target))
        else:
            resid.append(np.nan)
    errs = np.array(errs)
    g0 = float(np.expm1(log_g(buyer, seller, lam, 0.0, cts.r_mid) - target))
    ok = errs > 0
    if ok.sum() >= 2:
        order, const = convergence_order(np.asarray(deltas, dtype=float)[ok], errs[ok])
    else:
        order, const = float("nan"), float("nan")
    return DeltaSweep(rows, cts.r_mid, errs, np.array(resid), g0, order, const)
