"""Monte Carlo income paths and numerical checks of the equilibrium conditions.

Each path draws from its own Philox stream keyed by (seed, path index), so
results do not depend on how paths are split across workers.
"""
from __future__ import annotations

import math
from concurrent.futures import ThreadPoolExecutor
from dataclasses import dataclass
from typing import NamedTuple

import numpy as np

from .errors import InvalidParams, MismatchedInputs, PreconditionViolated
from .model import AgentParams, Regime, band
from .policy import (
    PolicyContext,
    optimal_consumption_discrete,
    optimal_wealth_discrete,
    value_discrete,
)
from .solver import EquilibriumSolution, no_trade_interval

_MASK64 = (1 << 64) - 1


@dataclass(frozen=True)
class SimConfig:
    n_paths: int
    n_steps: int
    seed: int = 0
    rho: float = 0.0

    def __post_init__(self):
        problems = []
        if self.n_paths < 1:
            problems.append("n_paths must be >= 1")
        if self.n_steps < 1:
            problems.append("n_steps must be >= 1")
        if not -1.0 <= self.rho <= 1.0:
            problems.append("rho must be in [-1, 1]")
        if problems:
            raise InvalidParams("; ".join(problems))


@dataclass(frozen=True)
class IncomePaths:
    times: np.ndarray    # (n_steps + 1,)
    income: np.ndarray   # (2, n_paths, n_steps + 1)
    agents: tuple[AgentParams, AgentParams]
    delta: float
    cfg: SimConfig


@dataclass(frozen=True)
class PathBundle:
    """Equilibrium paths; every series has shape (n_paths, n_steps + 1) per agent.

    Wealth, holdings and the financial residual are deterministic and are
    stored as read-only broadcasts.
    """

    times: np.ndarray
    income: np.ndarray
    consumption: np.ndarray
    wealth: np.ndarray
    holdings: np.ndarray
    real_residual: np.ndarray
    fin_residual: np.ndarray
    self_financing_residual: np.ndarray

    @property
    def n_paths(self) -> int:
        return self.income.shape[1]

    @property
    def n_steps(self) -> int:
        return self.income.shape[2] - 1


def path_rng(seed: int, path: int) -> np.random.Generator:
    return np.random.Generator(np.random.Philox(key=(path << 64) | (seed & _MASK64)))


def correlated_normals(seed: int, paths: range, n_steps: int, rho: float) -> np.ndarray:
    """(2, len(paths), n_steps) standard normals with correlation rho across agents."""
    out = np.empty((2, len(paths), n_steps))
    s = math.sqrt(1.0 - rho * rho)
    for j, p in enumerate(paths):
        z = path_rng(seed, p).standard_normal((2, n_steps))
        out[0, j] = z[0]
        out[1, j] = rho * z[0] + s * z[1]
    return out


def _chunks(n: int, k: int) -> list[range]:
    bounds = np.linspace(0, n, k + 1).astype(int)
    return [range(a, b) for a, b in zip(bounds[:-1], bounds[1:]) if b > a]


def simulate_income(agents, delta: float, cfg: SimConfig, workers: int = 1) -> IncomePaths:
    """Y_{n+1} = Y_n + mu delta + sqrt(delta) sigma Z_{n+1} for both agents."""
    agents = tuple(agents)
    if not delta > 0:
        raise PreconditionViolated("income simulation needs a discrete grid")
    chunks = _chunks(cfg.n_paths, max(1, workers))
    if workers > 1:
        with ThreadPoolExecutor(workers) as ex:
            parts = list(ex.map(lambda c: correlated_normals(cfg.seed, c, cfg.n_steps, cfg.rho), chunks))
    else:
        parts = [correlated_normals(cfg.seed, c, cfg.n_steps, cfg.rho) for c in chunks]
    z = np.concatenate(parts, axis=1)

    income = np.empty((2, cfg.n_paths, cfg.n_steps + 1))
    sq = math.sqrt(delta)
    for i, a in enumerate(agents):
        incr = a.mu * delta + sq * a.sigma * z[i]
        income[i, :, 0] = a.y0
        np.cumsum(incr, axis=1, out=income[i, :, 1:])
        income[i, :, 1:] += a.y0
    times = np.arange(cfg.n_steps + 1) * delta
    return IncomePaths(times, income, agents, delta, cfg)


def _contexts(solution: EquilibriumSolution) -> tuple[PolicyContext, PolicyContext]:
    return tuple(PolicyContext(a, r, solution.grid)
                 for a, r in zip(solution.agents, solution.shadow_rates))


def simulate_equilibrium_paths(solution: EquilibriumSolution, incomes: IncomePaths) -> PathBundle:
    if solution.delta is None:
        raise PreconditionViolated("path simulation needs a discrete-time solution")
    if solution.agents != incomes.agents or solution.delta != incomes.delta:
        raise MismatchedInputs("solution and income paths were built from different agents or time step")
    d = solution.delta
    n_paths, n_cols = incomes.income.shape[1:]
    steps = np.arange(n_cols + 1)
    shape = (n_paths, n_cols)

    wealth, hold, cons, sf = [], [], [], []
    for i, ctx in enumerate(_contexts(solution)):
        x = optimal_wealth_discrete(ctx, steps)            # one extra point for the last trade
        th = ctx.shadow_rate * x
        y = incomes.income[i]
        c = optimal_consumption_discrete(ctx, x[:-1], y)
        # (theta_{n+1} - theta_n) / r = (Y_n - c_n + theta_n) delta
        sf.append(np.diff(th) / ctx.shadow_rate - (y - c + th[:-1]) * d)
        wealth.append(np.broadcast_to(x[:-1], shape))
        hold.append(th)
        cons.append(c)

    dtheta1 = np.diff(hold[0])
    a1, a2 = solution.annuity_values
    lam = solution.lam
    # quoted annuity value: the buyer's shadow value / (1 + lam); no trade, no cost
    a_mkt = np.where(dtheta1 > 0, a1, a2) / (1.0 + lam)
    cost = np.where(dtheta1 != 0, 2.0 * lam * np.abs(dtheta1) * a_mkt, 0.0)
    y_sum = incomes.income[0] + incomes.income[1]
    real = (cons[0] + cons[1]) * d - d - y_sum * d + cost
    fin = hold[0][:-1] + hold[1][:-1] - 1.0

    holdings = np.stack([np.broadcast_to(h[:-1], shape) for h in hold])
    return PathBundle(
        times=incomes.times,
        income=incomes.income,
        consumption=np.stack(cons),
        wealth=np.stack(wealth),
        holdings=holdings,
        real_residual=real,
        fin_residual=np.broadcast_to(fin, shape),
        self_financing_residual=np.stack(sf),
    )


def clearing_residuals(bundle: PathBundle) -> tuple[float, float]:
    """Max |real| and max |financial| clearing residual over all paths and steps."""
    return float(np.max(np.abs(bundle.real_residual))), float(np.max(np.abs(bundle.fin_residual)))


def check_closeness(solution: EquilibriumSolution, tol: float = 1e-12) -> bool:
    """A1/A2 lies in the lam band, on the buyer's edge whenever agent 1 trades."""
    a1, a2 = solution.annuity_values
    ratio = a1 / a2
    lo, hi = band(solution.lam)
    if not (lo * (1 - tol) <= ratio <= hi * (1 + tol)):
        return False
    if solution.trade_per_step > 0:
        return math.isclose(ratio, hi, rel_tol=tol)
    if solution.trade_per_step < 0:
        return math.isclose(ratio, lo, rel_tol=tol)
    return True


def check_market_rate(solution: EquilibriumSolution, tol: float = 1e-12) -> bool:
    """The quoted rate is consistent with the shadow rates.

    With trade r = (1 + lam) r_buyer = (1 - lam) r_seller; without trade the
    quote must lie in the no-trade interval.
    """
    lam = solution.lam
    r1, r2 = solution.shadow_rates
    if solution.regime is Regime.NO_TRADE:
        b = tuple(a.beta_tilde for a in solution.agents)
        iv = no_trade_interval(*b, lam, solution.delta)
        return iv.lo * (1 - tol) <= solution.r_lo and solution.r_hi <= iv.hi * (1 + tol)
    r = solution.r_mid
    if solution.regime is Regime.AGENT1_BUYS:
        rb, rs = r1, r2
    else:
        rb, rs = r2, r1
    return math.isclose(r, (1 + lam) * rb, rel_tol=tol) and math.isclose(r, (1 - lam) * rs, rel_tol=tol)


class MCEstimate(NamedTuple):
    closed_form: float
    mc_estimate: float
    std_error: float


def _mean_se(samples: np.ndarray) -> tuple[float, float]:
    m = float(np.mean(samples))
    se = float(np.std(samples, ddof=1) / math.sqrt(samples.size))
    return m, se


def default_mc_config(n: int) -> SimConfig:
    return SimConfig(n_paths=100_000, n_steps=n, seed=0)


def _agent_income(solution, agent_index, n, cfg, incomes):
    if solution.delta is None:
        raise PreconditionViolated("Monte Carlo checks need a discrete-time solution")
    if incomes is None:
        incomes = simulate_income(solution.agents, solution.delta, cfg or default_mc_config(n))
    elif incomes.agents != solution.agents or incomes.delta != solution.delta:
        raise MismatchedInputs("income paths were simulated for different agents or time step")
    if incomes.income.shape[2] <= n:
        raise InvalidParams(f"income paths have {incomes.income.shape[2] - 1} steps < n={n}")
    return incomes.income[agent_index, :, : n + 1]


def check_transversality(solution: EquilibriumSolution, agent_index: int, n: int,
                         cfg: SimConfig | None = None, incomes: IncomePaths | None = None) -> MCEstimate:
    """E[exp(-beta t_n - alpha r X_n - alpha Y_n)] against (1 + r d)^-n exp(-alpha r X_0 - alpha Y_0)."""
    agent = solution.agents[agent_index]
    ctx = _contexts(solution)[agent_index]
    r, d = ctx.shadow_rate, solution.delta
    y = _agent_income(solution, agent_index, n, cfg, incomes)[:, n]
    x_n = optimal_wealth_discrete(ctx, n)
    x_0 = agent.theta0 / r
    closed = math.exp(-n * math.log1p(r * d) - agent.alpha * r * x_0 - agent.alpha * agent.y0)
    samples = np.exp(-agent.beta * n * d - agent.alpha * r * x_n - agent.alpha * y)
    return MCEstimate(closed, *_mean_se(samples))


def value_process(solution: EquilibriumSolution, agent_index: int, income: np.ndarray,
                  eps: float = 0.0) -> np.ndarray:
    """M_n = -sum_{k<n} exp(-beta t_k - alpha c_k) + exp(-beta t_n) J(X_n, Y_n) along paths.

    Consumption is the optimal feedback rule plus ``eps``; wealth follows
    X_{n+1} = X_n + (X_n r + Y_n - c_n) delta.  Returns (n_paths, n_steps + 1).
    """
    agent = solution.agents[agent_index]
    ctx = _contexts(solution)[agent_index]
    r, d = ctx.shadow_rate, solution.delta
    n_paths, n_cols = income.shape
    m = np.empty((n_paths, n_cols))
    x = np.full(n_paths, agent.theta0 / r)
    running = np.zeros(n_paths)
    for k in range(n_cols):
        y = income[:, k]
        disc = math.exp(-agent.beta * k * d)
        m[:, k] = running + disc * value_discrete(ctx, x, y)
        c = optimal_consumption_discrete(ctx, x, y) + eps
        running = running - disc * np.exp(-agent.alpha * c)
        x = x + (x * r + y - c) * d
    return m


def check_value_martingale(solution: EquilibriumSolution, agent_index: int, n: int,
                           cfg: SimConfig | None = None, eps: float = 0.0,
                           incomes: IncomePaths | None = None) -> MCEstimate:
    """(M_0, sample mean of M_n, standard error); M is a martingale only at eps = 0."""
    y = _agent_income(solution, agent_index, n, cfg, incomes)
    m = value_process(solution, agent_index, y, eps)
    m0 = float(m[0, 0])
    return MCEstimate(m0, *_mean_se(m[:, n]))
