"""Stratified Datalog: AST, parsing, stratification, and evaluation."""
from .ast import (
    Aggregate,
    Atom,
    BodyItem,
    Comparison,
    Const,
    DatalogError,
    EnumSort,
    IntSort,
    Interpretation,
    Literal,
    PredicateSignature,
    Program,
    Rule,
    Sort,
    SumEq,
    Term,
    Var,
    check_well_formed,
    ground_atom,
    project_edb,
    validate_interpretation,
)
from .aggregates import AggregateError, eliminate_min_aggregates
from .evaluate import consequence, evaluate
from .parser import ParseError, format_atoms, parse_atoms, parse_program
from .printer import program_to_text
from .stratify import (
    NotStratifiableError,
    Stratification,
    Stratum,
    stratify,
    validate_stratification,
)

__all__ = [
    "Aggregate",
    "AggregateError",
    "Atom",
    "BodyItem",
    "Comparison",
    "Const",
    "DatalogError",
    "EnumSort",
    "IntSort",
    "Interpretation",
    "Literal",
    "NotStratifiableError",
    "ParseError",
    "PredicateSignature",
    "Program",
    "Rule",
    "Sort",
    "Stratification",
    "Stratum",
    "SumEq",
    "Term",
    "Var",
    "check_well_formed",
    "consequence",
    "eliminate_min_aggregates",
    "evaluate",
    "format_atoms",
    "ground_atom",
    "parse_atoms",
    "parse_program",
    "program_to_text",
    "project_edb",
    "stratify",
    "validate_interpretation",
    "validate_stratification",
]
