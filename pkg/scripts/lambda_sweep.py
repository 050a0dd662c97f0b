"""Equilibrium rate as a function of the proportional cost.

Prints r(lam) and the sign of dr/dlam for three risk-aversion orderings.
With equal risk aversion the rate is flat to first order at lam = 0; with
unequal risk aversion it rises or falls depending on which agent is more
risk averse.  Past the boundary lam* the agents stop trading and only an
interval of rates is pinned down.

    python3 scripts/lambda_sweep.py [--out sweep.csv]
"""
import argparse
import csv

import numpy as np

from tcequilibrium import AgentParams, Regime
from tcequilibrium.analysis import rate_sensitivity, sweep_lambda
from tcequilibrium.config import SWEEP_COLUMNS, sweep_row_values

BETA_TILDE = (0.1, 0.3)
ALPHAS = {"equal": (1.0, 1.0), "agent2 more averse": (1.0, 2.0), "agent1 more averse": (2.0, 1.0)}


def agents_for(alphas):
    # sigma = mu = 0 so that beta is the effective discount
    return tuple(AgentParams(a, b, 0.0, 0.0) for a, b in zip(alphas, BETA_TILDE))


def main():
    p = argparse.ArgumentParser(description=__doc__.splitlines()[0])
    p.add_argument("--out", help="write all sweeps to one CSV")
    p.add_argument("--step", type=float, default=0.05)
    args = p.parse_args()

    lams = np.round(np.arange(0.0, 0.95 + 1e-9, args.step), 12)
    writer = None
    if args.out:
        fh = open(args.out, "w", newline="")
        writer = csv.writer(fh, lineterminator="\n")
        writer.writerow(("case",) + SWEEP_COLUMNS)

    for name, alphas in ALPHAS.items():
        ag = agents_for(alphas)
        rows = sweep_lambda(ag, lams)
        d0, _ = rate_sensitivity(ag, 0.0)
        print(f"\n{name}: alpha={alphas}  dr/dlam at 0 = {d0:+.6f}")
        print(f"{'lam':>6} {'regime':>12} {'r_lo':>10} {'r_mid':>10} {'r_hi':>10} {'trade':>10}")
        for r in rows:
            print(f"{r.param:6.2f} {r.regime.value:>12} {r.r_lo:10.6f} {r.r_mid:10.6f} "
                  f"{r.r_hi:10.6f} {r.trade_rate:10.6f}")
            if writer:
                writer.writerow([name] + sweep_row_values(r))
        first = next((r.param for r in rows if r.regime is Regime.NO_TRADE), None)
        print(f"first no-trade grid point: {first}")

    if writer:
        fh.close()
        print(f"\nwrote {args.out}")


if __name__ == "__main__":
    main()
