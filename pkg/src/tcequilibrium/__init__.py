"""Two-agent Radner equilibrium with proportional transaction costs on an annuity."""
from .errors import (
    InvalidParams,
    MismatchedInputs,
    ModelError,
    NumericalFailure,
    PreconditionViolated,
    RegimeMismatch,
)
from .model import (
    AgentParams,
    Continuous,
    Discrete,
    MarketParams,
    Regime,
    classify_regime,
    effective_discount,
    excess_demand_cts,
    excess_demand_discrete,
)
from .solver import (
    EquilibriumSolution,
    Infeasible,
    NoTradeOnly,
    RateInterval,
    check_bank_constant_equilibrium,
    solve,
    solve_cts,
    solve_discrete,
)

__version__ = "0.1.0"
