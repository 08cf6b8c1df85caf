"""Fisher-market equilibria, rounding to pure markets, and fairness checks."""

from ._puremkt import *  # noqa: F401,F403
from ._puremkt import (
    DidNotConverge,
    Error,
    Market,
    ParseError,
    SolverConfig,
    ToleranceConfig,
    run_pipeline,
    solve_equilibrium,
)

__all__ = [
    "DidNotConverge",
    "Error",
    "Market",
    "ParseError",
    "SolverConfig",
    "ToleranceConfig",
    "run_pipeline",
    "solve_equilibrium",
]
