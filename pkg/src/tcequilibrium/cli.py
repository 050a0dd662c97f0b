"""Command-line entry point.

    tcequilibrium solve        --config cfg.json [--mode discrete|continuous]
    tcequilibrium simulate     --config cfg.json [--paths N --steps N --seed S --rho R]
    tcequilibrium sweep-lambda --config cfg.json [--grid 0:0.9:0.05]
    tcequilibrium sweep-delta  --config cfg.json [--grid 0.5,0.25,0.1]
    tcequilibrium bank-check   --config cfg.json
    tcequilibrium verify       --config cfg.json [--override-rate R]

Exit status: 0 ok, 1 verification failure, 2 bad config or parameters,
3 regime mismatch or violated precondition.
"""
from __future__ import annotations

import argparse
import contextlib
import csv
import json
import math
import sys
from dataclasses import dataclass

import numpy as np

from . import analysis
from .config import (
    PATH_COLUMNS,
    SWEEP_COLUMNS,
    Config,
    ConfigError,
    load_config,
    solution_to_dict,
    sweep_row_values,
    verdict_to_dict,
)
from .errors import InvalidParams, MismatchedInputs, NumericalFailure, PreconditionViolated, RegimeMismatch
from .model import (
    Continuous,
    Discrete,
    MarketParams,
    Regime,
    classify_regime,
    excess_demand_cts,
    excess_demand_discrete,
)
from .policy import PolicyContext, optimal_consumption_cts, optimal_wealth_cts, trade_rate_cts
from .simulate import (
    SimConfig,
    check_closeness,
    check_market_rate,
    check_transversality,
    check_value_martingale,
    clearing_residuals,
    simulate_equilibrium_paths,
    simulate_income,
)
from .solver import (
    EquilibriumSolution,
    buyer_seller,
    case2_bracket,
    check_bank_constant_equilibrium,
    root_residual,
    solve,
    with_market_rate,
)

DEFAULT_SIM = SimConfig(n_paths=10, n_steps=100, seed=0)
DEFAULT_VERIFY_SIM = SimConfig(n_paths=2000, n_steps=50, seed=0)
DEFAULT_DELTAS = (0.5, 0.25, 0.1, 0.01, 1e-3, 1e-4)
RESIDUAL_TOL = 1e-10
IDENTITY_TOL = 1e-12
MC_Z = 4.0   # verify runs on arbitrary configs; a wider gate than the 3 SE used in tests


def parse_grid(text: str) -> list[float]:
    """'start:stop:step' (stop included) or a comma-separated list."""
    if ":" in text:
        start, stop, step = (float(s) for s in text.split(":"))
        if not step > 0 or stop < start:
            raise InvalidParams(f"bad grid {text!r}")
        n = int(math.floor((stop - start) / step + 1e-9)) + 1
        return [float(f"{start + k * step:.12g}") for k in range(n)]
    return [float(s) for s in text.split(",") if s.strip()]


def _market(cfg: Config, mode: str | None) -> MarketParams:
    if mode == "continuous":
        return MarketParams(cfg.lam, Continuous())
    if mode == "discrete":
        if cfg.delta is None:
            raise PreconditionViolated("discrete mode needs 'delta' in the config")
        return MarketParams(cfg.lam, Discrete(cfg.delta))
    return cfg.market


def _sim_config(cfg: Config, args, default: SimConfig) -> SimConfig:
    base = cfg.sim or default
    return SimConfig(
        n_paths=args.paths if args.paths is not None else base.n_paths,
        n_steps=args.steps if args.steps is not None else base.n_steps,
        seed=args.seed if args.seed is not None else base.seed,
        rho=args.rho if args.rho is not None else base.rho,
    )


def _fmt(v):
    if isinstance(v, (np.floating, float)):
        return repr(float(v))
    return v


# -- subcommands ---------------------------------------------------------------

def cmd_solve(cfg, args, out):
    sol = solve(cfg.agents, _market(cfg, args.mode))
    json.dump(solution_to_dict(sol), out, indent=2)
    out.write("\n")
    return 0


def cmd_simulate(cfg, args, out):
    market = _market(cfg, args.mode or "discrete")
    if market.delta is None:
        raise PreconditionViolated("simulate needs a discrete grid")
    sim = _sim_config(cfg, args, DEFAULT_SIM)
    sol = solve(cfg.agents, market)
    bundle = simulate_equilibrium_paths(sol, simulate_income(cfg.agents, market.delta, sim))
    w = csv.writer(out, lineterminator="\n")
    w.writerow(PATH_COLUMNS)
    steps = np.arange(bundle.n_steps + 1)
    for p in range(bundle.n_paths):
        cols = [
            np.full(steps.size, p), steps, bundle.times,
            bundle.income[0, p], bundle.income[1, p],
            bundle.consumption[0, p], bundle.consumption[1, p],
            bundle.wealth[0, p], bundle.wealth[1, p],
            bundle.holdings[0, p], bundle.holdings[1, p],
            bundle.real_residual[p], bundle.fin_residual[p],
        ]
        ints = [c.tolist() for c in cols[:2]]
        floats = [c.tolist() for c in cols[2:]]
        for row in zip(*ints, *floats):
            w.writerow(row)
    return 0


def _write_sweep(rows, out):
    w = csv.writer(out, lineterminator="\n")
    w.writerow(SWEEP_COLUMNS)
    for row in rows:
        w.writerow([_fmt(v) for v in sweep_row_values(row)])


def cmd_sweep_lambda(cfg, args, out):
    lams = parse_grid(args.grid) if args.grid else parse_grid("0:0.95:0.05")
    if (args.mode or "continuous") == "discrete":
        market = _market(cfg, "discrete")
        rows = [analysis.SweepRow.from_solution(lam, solve(cfg.agents, MarketParams(lam, market.grid)))
                for lam in sorted(lams)]
    else:
        rows = analysis.sweep_lambda(cfg.agents, lams)
    _write_sweep(rows, out)
    return 0


def cmd_sweep_delta(cfg, args, out):
    deltas = parse_grid(args.grid) if args.grid else list(DEFAULT_DELTAS)
    res = analysis.sweep_delta(cfg.agents, cfg.lam, deltas)
    cts = solve(cfg.agents, MarketParams(cfg.lam, Continuous()))
    # the continuous-time limit is the param = 0 row
    _write_sweep(res.rows + [analysis.SweepRow.from_solution(0.0, cts)], out)
    for row, err in zip(res.rows, res.errors):
        print(f"delta={row.param!r} |r(delta) - r(0)|={float(err)!r}", file=sys.stderr)
    print(f"r(0)={res.r0!r} empirical order={res.order:.4f} constant={res.constant:.6g}", file=sys.stderr)
    return 0


def cmd_bank_check(cfg, args, out):
    if cfg.delta is None:
        raise PreconditionViolated("bank-check is a discrete-time result; set 'delta'")
    verdict = check_bank_constant_equilibrium(cfg.agents, cfg.lam, cfg.delta)
    json.dump(verdict_to_dict(verdict), out, indent=2)
    out.write("\n")
    return 0


# -- verify --------------------------------------------------------------------

@dataclass
class Check:
    name: str
    ok: bool
    detail: str = ""


def _excess_demands(sol: EquilibriumSolution):
    r1, r2 = sol.shadow_rates
    a1, a2 = sol.agents
    if sol.delta is None:
        return excess_demand_cts(r1, a1), excess_demand_cts(r2, a2)
    return excess_demand_discrete(r1, a1, sol.delta), excess_demand_discrete(r2, a2, sol.delta)


def solution_checks(sol: EquilibriumSolution) -> list[Check]:
    checks = []
    regime = classify_regime(sol.agents, sol.market)
    checks.append(Check("regime", regime is sol.regime, f"{sol.regime.value}"))
    checks.append(Check("market_rate", check_market_rate(sol), f"r_mid={sol.r_mid!r}"))
    checks.append(Check("closeness", check_closeness(sol), f"A1/A2={sol.shadow_rate_2 / sol.shadow_rate_1!r}"))

    f1, f2 = _excess_demands(sol)
    scale = max(1.0, abs(f1) + abs(f2))
    if sol.regime is Regime.NO_TRADE:
        wealth_res = max(abs(f1), abs(f2)) / scale
    else:
        wealth_res = abs(f1 + f2 - sol.lam * (abs(f1) + abs(f2))) / scale
    checks.append(Check("clearing_wealth", wealth_res <= IDENTITY_TOL, f"residual={wealth_res:.3e}"))
    r1, r2 = sol.shadow_rates
    share_res = abs(r1 * f1 + r2 * f2) / max(1.0, abs(r1 * f1))
    checks.append(Check("clearing_shares", share_res <= IDENTITY_TOL, f"residual={share_res:.3e}"))

    if sol.regime is not Regime.NO_TRADE and sol.delta is not None:
        buyer, seller = buyer_seller(sol)
        res = abs(root_residual(buyer, seller, sol.lam, sol.delta, sol.r_mid))
        checks.append(Check("root_residual", res <= IDENTITY_TOL, f"residual={res:.3e}"))
        lo, hi = case2_bracket(buyer, seller, sol.lam, sol.delta)
        checks.append(Check("bracket", lo < sol.r_mid < hi, f"{lo!r} < {sol.r_mid!r} < {hi!r}"))
    return checks


def continuous_path_checks(sol: EquilibriumSolution, times=(0.0, 1.0, 10.0, 100.0)) -> list[Check]:
    """Clearing identities along deterministic continuous-time states."""
    ctxs = [PolicyContext(a, r, Continuous()) for a, r in zip(sol.agents, sol.shadow_rates)]
    t = np.asarray(times)
    ys = [a.y0 + a.mu * t for a in sol.agents]
    xs = [optimal_wealth_cts(c, t) for c in ctxs]
    cs = [optimal_consumption_cts(c, x, y) for c, x, y in zip(ctxs, xs, ys)]
    thetas = [c.shadow_rate * x for c, x in zip(ctxs, xs)]
    d1 = trade_rate_cts(ctxs[0])
    a1, a2 = sol.annuity_values
    a_mkt = (a1 if d1 > 0 else a2) / (1 + sol.lam)
    cost = 2 * sol.lam * abs(d1) * a_mkt if sol.regime is not Regime.NO_TRADE else 0.0
    real = np.max(np.abs(cs[0] + cs[1] - 1.0 - ys[0] - ys[1] + cost))
    fin = np.max(np.abs(thetas[0] + thetas[1] - 1.0))
    return [Check("real_clearing_paths", real <= RESIDUAL_TOL, f"max={real:.3e}"),
            Check("financial_clearing_paths", fin <= RESIDUAL_TOL, f"max={fin:.3e}")]


def _zscore(est) -> float:
    gap = abs(est.mc_estimate - est.closed_form)
    # floor the error for noiseless income, where only rounding is left
    return gap / max(est.std_error, 1e-10 * abs(est.closed_form))


def discrete_path_checks(sol: EquilibriumSolution, sim: SimConfig) -> list[Check]:
    incomes = simulate_income(sol.agents, sol.delta, sim)
    bundle = simulate_equilibrium_paths(sol, incomes)
    real, fin = clearing_residuals(bundle)
    sf = float(np.max(np.abs(bundle.self_financing_residual)))
    checks = [Check("real_clearing_paths", real <= RESIDUAL_TOL, f"max={real:.3e}"),
              Check("financial_clearing_paths", fin <= RESIDUAL_TOL, f"max={fin:.3e}"),
              Check("self_financing", sf <= RESIDUAL_TOL, f"max={sf:.3e}")]
    n = min(20, sim.n_steps)
    for i in (0, 1):
        tv = check_transversality(sol, i, n, incomes=incomes)
        z = _zscore(tv)
        checks.append(Check(f"transversality_agent{i + 1}", z <= MC_Z,
                            f"n={n} closed={tv.closed_form:.6g} mc={tv.mc_estimate:.6g} z={z:.2f}"))
        mg = check_value_martingale(sol, i, n, incomes=incomes)
        z = _zscore(mg)
        checks.append(Check(f"martingale_agent{i + 1}", z <= MC_Z,
                            f"n={n} M0={mg.closed_form:.6g} E[Mn]={mg.mc_estimate:.6g} z={z:.2f}"))
    return checks


def run_verify(cfg: Config, market: MarketParams, sim: SimConfig,
               override_rate: float | None = None) -> list[Check]:
    sol = solve(cfg.agents, market)
    if override_rate is not None:
        sol = with_market_rate(sol, override_rate)
    checks = solution_checks(sol)
    if sol.delta is None:
        checks += continuous_path_checks(sol)
    else:
        checks += discrete_path_checks(sol, sim)
    return checks


def cmd_verify(cfg, args, out):
    checks = run_verify(cfg, _market(cfg, args.mode), _sim_config(cfg, args, DEFAULT_VERIFY_SIM),
                        args.override_rate)
    for c in checks:
        out.write(f"{'PASS' if c.ok else 'FAIL'} {c.name} {c.detail}\n")
    failed = [c.name for c in checks if not c.ok]
    if failed:
        print(f"verification failed: {', '.join(failed)}", file=sys.stderr)
        return 1
    return 0


COMMANDS = {
    "solve": cmd_solve,
    "simulate": cmd_simulate,
    "sweep-lambda": cmd_sweep_lambda,
    "sweep-delta": cmd_sweep_delta,
    "bank-check": cmd_bank_check,
    "verify": cmd_verify,
}


def build_parser() -> argparse.ArgumentParser:
    p = argparse.ArgumentParser(prog="tcequilibrium",
                                description="Two-agent annuity equilibrium with proportional transaction costs")
    p.add_argument("command", choices=sorted(COMMANDS))
    p.add_argument("--config", required=True, help="JSON config path")
    p.add_argument("--out", help="write output here instead of stdout")
    p.add_argument("--grid", help="start:stop:step (stop included) or comma list")
    p.add_argument("--paths", type=int)
    p.add_argument("--steps", type=int)
    p.add_argument("--seed", type=int)
    p.add_argument("--rho", type=float)
    p.add_argument("--mode", choices=("discrete", "continuous"))
    p.add_argument("--override-rate", type=float, help="verify only: replace the market rate")
    return p


def main(argv=None) -> int:
    args = build_parser().parse_args(argv)
    if args.override_rate is not None and args.command != "verify":
        print("--override-rate is only valid with verify", file=sys.stderr)
        return 2
    try:
        cfg = load_config(args.config)
        with contextlib.ExitStack() as stack:
            out = stack.enter_context(open(args.out, "w", newline="")) if args.out else sys.stdout
            return COMMANDS[args.command](cfg, args, out)
    except (ConfigError, InvalidParams, MismatchedInputs) as e:
        print(f"error: {e}", file=sys.stderr)
        return 2
    except (RegimeMismatch, PreconditionViolated) as e:
        print(f"error: {e}", file=sys.stderr)
        return 3
    except NumericalFailure as e:
        print(f"numerical failure: {e}", file=sys.stderr)
        return 1


if __name__ == "__main__":
    sys.exit(main())
