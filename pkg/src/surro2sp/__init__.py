"""Surrogate-assisted two-stage stochastic programming toolkit.

A self-contained stack: a dense bounded-variable simplex, branch-and-bound
over binaries, a small ReLU regressor with a MILP encoding, a DC power-flow
recourse model with storage, and the alternating optimize/retrain loop that
ties them together.
"""

__version__ = "0.1.0"

from .simplex import (  # noqa: F401
    EQ,
    GE,
    LE,
    IterationLimitError,
    LinearProgram,
    LpOutcome,
    LpStatus,
    solve_lp,
)
from .milp import (  # noqa: F401
    MilpBuilder,
    MilpModel,
    MilpOptions,
    MilpOutcome,
    MilpStatus,
    fix_binaries,
    solve_milp,
    write_lp_text,
)
