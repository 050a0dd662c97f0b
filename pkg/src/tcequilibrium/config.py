"""JSON configuration and result (de)serialization."""
from __future__ import annotations

import json
import math
import os
from dataclasses import dataclass

from .analysis import SweepRow
from .model import AgentParams, Continuous, Discrete, MarketParams, Regime
from .simulate import SimConfig
from .solver import BankVerdict, EquilibriumSolution, Infeasible, NoTradeOnly, RateInterval

AGENT_FIELDS = ("alpha", "beta", "mu", "sigma", "theta0", "y0")
THETA_SUM_TOL = 1e-12


class ConfigError(Exception):
    pass


class ParseError(ConfigError):
    pass


class ValidationError(ConfigError):
    def __init__(self, problems: list[str]):
        self.problems = problems
        super().__init__("; ".join(problems))


@dataclass(frozen=True)
class Config:
    agents: tuple[AgentParams, AgentParams]
    lam: float
    delta: float | None = None
    sim: SimConfig | None = None

    @property
    def market(self) -> MarketParams:
        grid = Continuous() if self.delta is None else Discrete(self.delta)
        return MarketParams(self.lam, grid)


def _number(doc, key, path, problems, required=True):
    if key not in doc:
        if required:
            problems.append(f"{path}{key} is required")
        return None
    v = doc[key]
    if isinstance(v, bool) or not isinstance(v, (int, float)) or not math.isfinite(v):
        problems.append(f"{path}{key} must be a finite number")
        return None
    return float(v)


def _integer(doc, key, path, problems):
    v = doc.get(key)
    if isinstance(v, bool) or not isinstance(v, int):
        problems.append(f"{path}{key} must be an integer")
        return None
    return v


def _validate(doc) -> Config:
    problems: list[str] = []
    if not isinstance(doc, dict):
        raise ValidationError(["top level must be an object"])

    agents_doc = doc.get("agents")
    agent_vals = []
    if not isinstance(agents_doc, list) or len(agents_doc) != 2:
        problems.append("agents must be a list of exactly 2 objects")
    else:
        for i, a in enumerate(agents_doc):
            path = f"agents[{i}]."
            if not isinstance(a, dict):
                problems.append(f"agents[{i}] must be an object")
                continue
            vals = {k: _number(a, k, path, problems) for k in AGENT_FIELDS}
            if vals["alpha"] is not None and not vals["alpha"] > 0:
                problems.append(f"{path}alpha must be > 0")
            if vals["beta"] is not None and not vals["beta"] > 0:
                problems.append(f"{path}beta must be > 0")
            if vals["sigma"] is not None and not vals["sigma"] >= 0:
                problems.append(f"{path}sigma must be >= 0")
            agent_vals.append(vals)
        thetas = [v["theta0"] for v in agent_vals]
        if len(thetas) == 2 and None not in thetas and abs(sum(thetas) - 1.0) > THETA_SUM_TOL:
            problems.append(f"theta0 sum must equal 1 (got {sum(thetas)!r})")

    lam = _number(doc, "lambda", "", problems)
    if lam is not None and not 0.0 <= lam < 1.0:
        problems.append("lambda must be in [0,1)")

    delta = None
    if doc.get("delta") is not None:
        delta = _number(doc, "delta", "", problems)
        if delta is not None and not delta > 0:
            problems.append("delta must be > 0")

    sim = None
    sim_doc = doc.get("sim")
    if sim_doc is not None:
        if not isinstance(sim_doc, dict):
            problems.append("sim must be an object")
        else:
            n_paths = _integer(sim_doc, "n_paths", "sim.", problems)
            n_steps = _integer(sim_doc, "n_steps", "sim.", problems)
            seed = _integer(sim_doc, "seed", "sim.", problems) if "seed" in sim_doc else 0
            rho = _number(sim_doc, "rho", "sim.", problems, required=False)
            rho = 0.0 if rho is None else rho
            if n_paths is not None and n_paths < 1:
                problems.append("sim.n_paths must be >= 1")
            if n_steps is not None and n_steps < 1:
                problems.append("sim.n_steps must be >= 1")
            if seed is not None and not 0 <= seed < 2**64:
                problems.append("sim.seed must be a 64-bit unsigned integer")
            if not -1.0 <= rho <= 1.0:
                problems.append("sim.rho must be in [-1, 1]")
            if not problems:
                sim = SimConfig(n_paths, n_steps, seed, rho)

    if problems:
        raise ValidationError(problems)
    agents = tuple(AgentParams(**v) for v in agent_vals)
    return Config(agents, lam, delta, sim)


def load_config(source) -> Config:
    """Load a Config from a path or from JSON text."""
    text = source
    if isinstance(source, os.PathLike) or (isinstance(source, str) and not source.lstrip().startswith("{")):
        try:
            with open(source) as fh:
                text = fh.read()
        except OSError as e:
            raise ParseError(f"cannot read config {source!s}: {e}") from e
    try:
        doc = json.loads(text)
    except json.JSONDecodeError as e:
        raise ParseError(f"malformed JSON: {e}") from e
    return _validate(doc)


def config_to_dict(cfg: Config) -> dict:
    doc = {
        "agents": [{k: getattr(a, k) for k in AGENT_FIELDS} for a in cfg.agents],
        "lambda": cfg.lam,
    }
    if cfg.delta is not None:
        doc["delta"] = cfg.delta
    if cfg.sim is not None:
        s = cfg.sim
        doc["sim"] = {"n_paths": s.n_paths, "n_steps": s.n_steps, "seed": s.seed, "rho": s.rho}
    return doc


# -- results -----------------------------------------------------------------

def solution_to_dict(sol: EquilibriumSolution) -> dict:
    return {
        "regime": sol.regime.value,
        "r_market": {"lo": sol.r_lo, "mid": sol.r_mid, "hi": sol.r_hi},
        "r1": sol.shadow_rate_1,
        "r2": sol.shadow_rate_2,
        "trade_rate": sol.trade_per_step,
        "lambda": sol.lam,
        "delta": sol.delta,
        "agents": [{k: getattr(a, k) for k in AGENT_FIELDS} for a in sol.agents],
    }


def solution_from_dict(doc: dict) -> EquilibriumSolution:
    regime = Regime(doc["regime"])
    m = doc["r_market"]
    market = RateInterval(m["lo"], m["hi"]) if regime is Regime.NO_TRADE else m["mid"]
    grid = Continuous() if doc["delta"] is None else Discrete(doc["delta"])
    agents = tuple(AgentParams(**a) for a in doc["agents"])
    return EquilibriumSolution(regime, doc["r1"], doc["r2"], market, doc["trade_rate"],
                               doc["lambda"], grid, agents)


def verdict_to_dict(v: BankVerdict) -> dict:
    if isinstance(v, Infeasible):
        return {"verdict": "infeasible", "reason": v.reason}
    assert isinstance(v, NoTradeOnly)
    return {"verdict": "no_trade_only", "rate": v.rate}


SWEEP_COLUMNS = ("param", "regime", "r_lo", "r_mid", "r_hi", "r1", "r2", "trade_rate")
PATH_COLUMNS = ("path", "step", "t", "Y1", "Y2", "c1", "c2", "X1", "X2",
                "theta1", "theta2", "real_residual", "fin_residual")


def sweep_row_values(row: SweepRow) -> list:
    return [row.param, row.regime.value, row.r_lo, row.r_mid, row.r_hi, row.r1, row.r2, row.trade_rate]
