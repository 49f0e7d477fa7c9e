"""Bottom-up evaluation: the consequence operator and the stratified model.

Evaluation is naive (no semi-naive deltas): each stratum iterates the
consequence operator to a fixed point, which terminates because all sorts
are finite and integer sorts are bounded. Derivations whose head constants
fall outside the declared sorts are discarded.
"""
from __future__ import annotations

from typing import Iterable, Optional

from .ast import (
    Atom,
    Comparison,
    Const,
    Interpretation,
    Literal,
    Program,
    Rule,
    SumEq,
    Term,
    Var,
)
from .aggregates import eliminate_min_aggregates
from .stratify import stratify

Subst = dict  # variable name -> Const


def _apply(term: Term, subst: Subst) -> Term:
    if isinstance(term, Var):
        return subst.get(term.name, term)
    return term


def _value(term: Term, subst: Subst):
    t = _apply(term, subst)
    return t.value if isinstance(t, Const) else None


def _unify_atom(atom: Atom, fact: Atom, subst: Subst) -> Optional[Subst]:
    out = subst
    for pattern, value in zip(atom.args, fact.args):
        pattern = _apply(pattern, out)
        if isinstance(pattern, Const):
            if pattern != value:
                return None
        else:
            if out is subst:
                out = dict(subst)
            out[pattern.name] = value
    return out


class _RuleMatcher:
    """Enumerates substitutions satisfying a rule body in an interpretation."""

    def __init__(self, program: Program, rule: Rule):
        self.program = program
        self.rule = rule
        # Positive literals drive the join; constraints and negative
        # literals are checked as soon as their variables are bound.
        self.positives = [it for it in rule.body if isinstance(it, Literal) and it.positive]
        self.checks = [it for it in rule.body
                       if not (isinstance(it, Literal) and it.positive)]

    def matches(self, index: dict, subst: Subst, depth: int = 0):
        if depth == len(self.positives):
            yield from self._finish(index, subst, list(self.checks))
            return
        literal = self.positives[depth]
        for fact in index.get(literal.atom.pred, ()):
            new = _unify_atom(literal.atom, fact, subst)
            if new is not None:
                yield from self.matches(index, new, depth + 1)

    def _finish(self, index: dict, subst: Subst, pending: list):
        if not pending:
            yield subst
            return
        # Pick a check that is decidable now, or bindable (SumEq with two
        # known operands); otherwise enumerate a variable's sort domain.
        for i, item in enumerate(pending):
            rest = pending[:i] + pending[i + 1:]
            if isinstance(item, Comparison):
                lhs, rhs = _value(item.left, subst), _value(item.right, subst)
                if lhs is None or rhs is None:
                    continue
                ok = lhs < rhs if item.op == "<" else \
                    lhs <= rhs if item.op == "<=" else lhs == rhs
                if ok:
                    yield from self._finish(index, subst, rest)
                return
            if isinstance(item, SumEq):
                res = _value(item.result, subst)
                lhs, rhs = _value(item.left, subst), _value(item.right, subst)
                known = sum(v is not None for v in (res, lhs, rhs))
                if known < 2:
                    continue
                if known == 3:
                    if res == lhs + rhs:
                        yield from self._finish(index, subst, rest)
                    return
                new = dict(subst)
                if res is None:
                    new[item.result.name] = Const(lhs + rhs)
                elif lhs is None:
                    new[item.left.name] = Const(res - rhs)
                else:
                    new[item.right.name] = Const(res - lhs)
                yield from self._finish(index, new, rest)
                return
            assert isinstance(item, Literal) and not item.positive
            grounded = Atom(item.atom.pred, tuple(_apply(t, subst) for t in item.atom.args))
            if grounded.is_ground():
                if grounded not in index.get("__set__", frozenset()):
                    yield from self._finish(index, subst, rest)
                return
        # Nothing decidable: enumerate the first unbound variable.
        var, sort = self._first_unbound(pending, subst)
        for value in sort.domain():
            new = dict(subst)
            new[var] = Const(value)
            yield from self._finish(index, new, pending)

    def _first_unbound(self, pending: list, subst: Subst):
        var_sorts = _variable_sorts(self.program, self.rule)
        for item in pending:
            for name in sorted(item.variables()):
                if name not in subst:
                    return name, self.program.sorts[var_sorts[name]]
        raise AssertionError("no unbound variable in undecidable body")


def _variable_sorts(program: Program, rule: Rule) -> dict:
    sorts: dict[str, str] = {}
    for atom in [rule.head] + [it.atom for it in rule.body if isinstance(it, Literal)]:
        sig = program.signatures[atom.pred]
        for pos, term in enumerate(atom.args):
            if isinstance(term, Var):
                sorts.setdefault(term.name, sig.arg_sorts[pos])
    return sorts


def _in_sorts(program: Program, atom: Atom) -> bool:
    sig = program.signatures[atom.pred]
    return all(t.value in program.sorts[s]
               for t, s in zip(atom.args, sig.arg_sorts))


def consequence(stratum: Program, interpretation: Iterable[Atom]) -> frozenset:
    """One application of the consequence operator T_P; monotone."""
    current = frozenset(interpretation)
    index: dict = {"__set__": current}
    for fact in current:
        index.setdefault(fact.pred, []).append(fact)
    derived = set(current)
    for rule in stratum.rules:
        matcher = _RuleMatcher(stratum, rule)
        for subst in matcher.matches(index, {}):
            head = Atom(rule.head.pred, tuple(_apply(t, subst) for t in rule.head.args))
            if head.is_ground() and _in_sorts(stratum, head):
                derived.add(head)
    return frozenset(derived)


def _fixed_point(stratum: Program, start: frozenset) -> frozenset:
    current = start
    while True:
        nxt = consequence(stratum, current)
        if nxt == current:
            return current
        current = nxt


def evaluate(program: Program, inp: Iterable[Atom]) -> frozenset:
    """The stratified model of the program for the given input."""
    program = eliminate_min_aggregates(program)
    model = frozenset(inp)
    for stratum in stratify(program).strata:
        model = _fixed_point(stratum.program, model)
    return model
