"""SMT formula representation: constraint trees plus predicate declarations.

Assertions reuse the first-order constraint nodes and add three forms the
encoder needs: implication, iff, and the integer-sum atom. Predicates are
uninterpreted booleans; step-indexed copies use the `pred@i` naming scheme.
"""
from __future__ import annotations

import re
from dataclasses import dataclass
from typing import Mapping, Union

from ..constraints import Constraint, _paren
from ..datalog import (
    Atom,
    Comparison,
    Const,
    DatalogError,
    Literal,
    Program,
    Rule,
    Sort,
    SumEq,
    Term,
    Var,
)


class EncodingError(DatalogError):
    pass


@dataclass(frozen=True)
class CImplies:
    antecedent: "SmtConstraint"
    consequent: "SmtConstraint"

    def __str__(self) -> str:
        return f"{_paren(self.antecedent)} => {_paren(self.consequent)}"


@dataclass(frozen=True)
class CIff:
    left: "SmtConstraint"
    right: "SmtConstraint"

    def __str__(self) -> str:
        return f"{_paren(self.left)} <=> {_paren(self.right)}"


@dataclass(frozen=True)
class CSum:
    """Boolean atom `result = left + right` over bounded integers."""

    result: Term
    left: Term
    right: Term

    def __str__(self) -> str:
        return f"{self.result} = {self.left} + {self.right}"


SmtConstraint = Union[Constraint, CImplies, CIff, CSum]

_STEP_RE = re.compile(r"^(.*)@(\d+)$")


def step_name(pred: str, i: int) -> str:
    return f"{pred}@{i}"


def split_step(pred: str):
    """(base, index) for a step-indexed predicate name, (pred, None) otherwise."""
    m = _STEP_RE.match(pred)
    if m:
        return m.group(1), int(m.group(2))
    return pred, None


@dataclass(frozen=True)
class SmtFormula:
    """Declarations plus an assertion list; conjoined semantics."""

    sorts: Mapping[str, Sort]
    predicates: Mapping[str, tuple[str, ...]]  # name -> argument sort names
    assertions: tuple[SmtConstraint, ...]

    def conjoin(self, other: "SmtFormula") -> "SmtFormula":
        sorts = dict(self.sorts)
        preds = dict(self.predicates)
        for name, sort in other.sorts.items():
            if sorts.setdefault(name, sort) != sort:
                raise EncodingError(f"conflicting declarations for sort {name}")
        for name, sig in other.predicates.items():
            if preds.setdefault(name, sig) != sig:
                raise EncodingError(f"conflicting declarations for predicate {name}")
        return SmtFormula(sorts, preds, self.assertions + other.assertions)

    def validate(self, max_step: int) -> None:
        for name in self.predicates:
            base, idx = split_step(name)
            if idx is not None and not 1 <= idx <= max_step:
                raise EncodingError(f"step index of {name} outside [1, {max_step}]")
        for assertion in self.assertions:
            for atom in _atoms(assertion):
                if atom.pred not in self.predicates:
                    raise EncodingError(f"undeclared predicate {atom.pred}")


def _atoms(c: SmtConstraint):
    from ..constraints import CAnd, CAtom, CExists, CForall, CNot, COr

    if isinstance(c, CAtom):
        yield c.atom
    elif isinstance(c, CNot):
        yield from _atoms(c.child)
    elif isinstance(c, (CAnd, COr)):
        for k in c.children:
            yield from _atoms(k)
    elif isinstance(c, (CForall, CExists)):
        yield from _atoms(c.body)
    elif isinstance(c, CImplies):
        yield from _atoms(c.antecedent)
        yield from _atoms(c.consequent)
    elif isinstance(c, CIff):
        yield from _atoms(c.left)
        yield from _atoms(c.right)


# -- rectification ------------------------------------------------------------

def _head_var(pred: str, pos: int) -> Var:
    # '@' cannot appear in parsed variable names, so these are always fresh
    return Var(f"X@{pos}")


def rectify(program: Program) -> Program:
    """Rewrite every rule so heads are p(X@0, ..., X@n-1) with shared variable
    names across all rules for the same predicate; constants and repeated head
    variables become body equalities."""
    new_rules = []
    for rule in program.rules:
        if rule.aggregate is not None:
            raise EncodingError("aggregates must be eliminated before encoding")
        mapping: dict[str, Term] = {}
        extra = []
        head_args = []
        for pos, term in enumerate(rule.head.args):
            hv = _head_var(rule.head.pred, pos)
            head_args.append(hv)
            if isinstance(term, Var) and term.name not in mapping:
                mapping[term.name] = hv
            else:
                target = mapping.get(term.name, term) if isinstance(term, Var) else term
                extra.append(Comparison("=", hv, target))
        body = tuple(_rename_item(item, mapping) for item in rule.body) + tuple(extra)
        new_rules.append(Rule(Atom(rule.head.pred, tuple(head_args)), body))
    return program.with_rules(new_rules)


def _rename_term(term: Term, mapping: Mapping[str, Term]) -> Term:
    if isinstance(term, Var):
        return mapping.get(term.name, term)
    return term


def _rename_item(item, mapping):
    if isinstance(item, Literal):
        return Literal(Atom(item.atom.pred,
                            tuple(_rename_term(t, mapping) for t in item.atom.args)),
                       item.positive)
    if isinstance(item, Comparison):
        return Comparison(item.op, _rename_term(item.left, mapping),
                          _rename_term(item.right, mapping))
    assert isinstance(item, SumEq)
    return SumEq(_rename_term(item.result, mapping), _rename_term(item.left, mapping),
                 _rename_term(item.right, mapping))


def is_rectified(program: Program) -> bool:
    by_pred: dict[str, tuple] = {}
    for rule in program.rules:
        args = rule.head.args
        if not all(isinstance(t, Var) for t in args):
            return False
        if len({t.name for t in args}) != len(args):
            return False
        if by_pred.setdefault(rule.head.pred, args) != args:
            return False
    return True
