"""Rewrite min/max head aggregates into plain stratified rules.

A rule ``h(..., min<C>) :- body`` becomes three rules over fresh predicates::

    h_cand(..., C)  :- body.
    h_lower(..., C) :- h_cand(..., C), h_cand(..., C2), C2 < C.
    h(..., C)       :- h_cand(..., C), !h_lower(..., C).

(for max the comparison is flipped). Fixed points agree with the original
program on all original predicates.
"""
from __future__ import annotations

from .ast import (
    Atom,
    Comparison,
    DatalogError,
    IntSort,
    Literal,
    PredicateSignature,
    Program,
    Rule,
    Var,
)


class AggregateError(DatalogError):
    pass


def eliminate_min_aggregates(program: Program) -> Program:
    if not any(r.aggregate for r in program.rules):
        return program

    by_head: dict[str, list[Rule]] = {}
    for rule in program.rules:
        if rule.aggregate is not None:
            by_head.setdefault(rule.head.pred, []).append(rule)
    for pred, agg_rules in by_head.items():
        specs = {(r.aggregate.func, r.aggregate.position) for r in agg_rules}
        if len(specs) > 1:
            raise AggregateError(f"{pred}: conflicting aggregate specifications")
        if any(r.aggregate is None for r in program.rules if r.head.pred == pred):
            raise AggregateError(f"{pred}: mixes aggregate and plain rules")

    signatures = dict(program.signatures)
    new_rules = []
    for rule in program.rules:
        if rule.aggregate is None:
            new_rules.append(rule)
    for pred, agg_rules in by_head.items():
        func, position = agg_rules[0].aggregate.func, agg_rules[0].aggregate.position
        sig = program.signatures[pred]
        if not isinstance(program.sorts[sig.arg_sorts[position]], IntSort):
            raise AggregateError(f"{pred}: aggregate argument must be a bounded integer")
        cand, lower = _fresh(signatures, f"{pred}_cand"), _fresh(signatures, f"{pred}_lower")
        signatures[cand] = PredicateSignature(cand, sig.arg_sorts, "idb")
        signatures[lower] = PredicateSignature(lower, sig.arg_sorts, "idb")

        head_args = None
        for rule in agg_rules:
            if not isinstance(rule.head.args[position], Var):
                raise AggregateError(f"{pred}: aggregate argument must be a variable")
            new_rules.append(Rule(Atom(cand, rule.head.args), rule.body))
            head_args = rule.head.args
        other = Var("_AGG")
        other_args = head_args[:position] + (other,) + head_args[position + 1:]
        this_c, that_c = head_args[position], other
        better = Comparison("<", that_c, this_c) if func == "min" else \
            Comparison("<", this_c, that_c)
        new_rules.append(Rule(Atom(lower, head_args),
                              (Literal(Atom(cand, head_args)),
                               Literal(Atom(cand, other_args)), better)))
        new_rules.append(Rule(Atom(pred, head_args),
                              (Literal(Atom(cand, head_args)),
                               Literal(Atom(lower, head_args), positive=False))))
    return Program(signatures=signatures, rules=tuple(new_rules), sorts=program.sorts)


def _fresh(signatures: dict, base: str) -> str:
    name = base
    while name in signatures:
        name += "_"
    return name
