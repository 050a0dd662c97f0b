"""Discrete-time rate r(delta) approaching the continuous-time rate r(0).

Reports |r(delta) - r(0)|, the clearing-equation residual at every step
size, and a log-log fit of the error.  The observed order is about one.

    python3 scripts/delta_convergence.py [--lam 0.1] [--alphas 1,1]
"""
import argparse

import numpy as np

from tcequilibrium import AgentParams
from tcequilibrium.analysis import sweep_delta


def main():
    p = argparse.ArgumentParser(description=__doc__.splitlines()[0])
    p.add_argument("--lam", type=float, default=0.1)
    p.add_argument("--alphas", default="1,1")
    p.add_argument("--betas", default="0.1,0.3", help="effective discounts")
    args = p.parse_args()

    alphas = [float(s) for s in args.alphas.split(",")]
    betas = [float(s) for s in args.betas.split(",")]
    agents = tuple(AgentParams(a, b, 0.0, 0.0) for a, b in zip(alphas, betas))
    deltas = np.array([1.0, 0.5, 0.25, 0.1, 0.05, 0.01, 1e-3, 1e-4, 1e-5])

    res = sweep_delta(agents, args.lam, deltas)
    print(f"r(0) = {res.r0:.15f}   G residual at 0: {res.g0_residual:.1e}")
    print(f"{'delta':>8} {'r(delta)':>18} {'|r - r(0)|':>12} {'err/delta':>10} {'G resid':>9}")
    for row, err, g in zip(res.rows, res.errors, res.g_residuals):
        print(f"{row.param:8.0e} {row.r_mid:18.15f} {err:12.4e} {err / row.param:10.5f} {g:9.1e}")
    print(f"\nfit |r(delta) - r(0)| ~ C delta^p:  p = {res.order:.4f}, C = {res.constant:.5g}")


if __name__ == "__main__":
    main()
