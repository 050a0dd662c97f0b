"""Monte Carlo checks of optimality for a discrete-time equilibrium.

For each agent: transversality against its closed form, the value process
at the optimum (a martingale), and under perturbed consumption c + eps
(a strict supermartingale).  Also reports clearing residuals along the
simulated paths.

    python3 scripts/mc_verification.py [--config configs/case2.json] [--paths 100000]
"""
import argparse
import time

from tcequilibrium.config import load_config
from tcequilibrium.simulate import (
    SimConfig,
    check_transversality,
    check_value_martingale,
    clearing_residuals,
    simulate_equilibrium_paths,
    simulate_income,
)
from tcequilibrium.solver import solve


def main():
    p = argparse.ArgumentParser(description=__doc__.splitlines()[0])
    p.add_argument("--config", default="configs/case2.json")
    p.add_argument("--paths", type=int, default=100_000)
    p.add_argument("--steps", type=int, default=20)
    p.add_argument("--seed", type=int, default=0)
    p.add_argument("--workers", type=int, default=4)
    p.add_argument("--eps", type=float, nargs="+", default=[-0.1, 0.1])
    args = p.parse_args()

    cfg = load_config(args.config)
    if cfg.delta is None:
        raise SystemExit("config has no delta; Monte Carlo checks are discrete-time only")
    sol = solve(cfg.agents, cfg.market)
    rho = cfg.sim.rho if cfg.sim else 0.0
    t0 = time.perf_counter()
    inc = simulate_income(cfg.agents, cfg.delta, SimConfig(args.paths, args.steps, args.seed, rho),
                          workers=args.workers)
    print(f"{sol.regime.value}: r = {sol.r_mid:.10f}, shadow rates {sol.shadow_rates}")
    print(f"simulated {args.paths} x {args.steps} in {time.perf_counter() - t0:.2f}s")

    real, fin = clearing_residuals(simulate_equilibrium_paths(sol, inc))
    print(f"max clearing residuals: real {real:.2e}, financial {fin:.2e}")

    for i in (0, 1):
        print(f"\nagent {i + 1}")
        for n in sorted({5, 10, args.steps}):
            tv = check_transversality(sol, i, n, incomes=inc)
            z = (tv.mc_estimate - tv.closed_form) / tv.std_error
            print(f"  transversality n={n:3d}: closed {tv.closed_form:.6f}  mc {tv.mc_estimate:.6f}  z {z:+.2f}")
        for eps in [0.0] + args.eps:
            mg = check_value_martingale(sol, i, args.steps, eps=eps, incomes=inc)
            gap = (mg.closed_form - mg.mc_estimate) / mg.std_error
            print(f"  value process eps={eps:+.2f}: M0 {mg.closed_form:.6f}  E[Mn] {mg.mc_estimate:.6f}  "
                  f"(M0 - E[Mn])/SE {gap:+.2f}")


if __name__ == "__main__":
    main()
