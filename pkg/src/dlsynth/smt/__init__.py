"""Bounded SMT encoding of Datalog strata and solver process driving."""
from .driver import (
    DEFAULT_SOLVER_ENV,
    SolverError,
    SolverVerdict,
    default_command,
    model_to_interpretation,
    solve,
)
from .emit import atom_name, emit_smtlib
from .encode import encode_bounded, encode_neg, encode_pos, tau
from .formula import (
    CIff,
    CImplies,
    CSum,
    EncodingError,
    SmtFormula,
    is_rectified,
    rectify,
    split_step,
    step_name,
)

__all__ = [
    "CIff",
    "CImplies",
    "CSum",
    "DEFAULT_SOLVER_ENV",
    "EncodingError",
    "SmtFormula",
    "SolverError",
    "SolverVerdict",
    "atom_name",
    "default_command",
    "emit_smtlib",
    "encode_bounded",
    "encode_neg",
    "encode_pos",
    "is_rectified",
    "model_to_interpretation",
    "rectify",
    "solve",
    "split_step",
    "step_name",
    "tau",
]
