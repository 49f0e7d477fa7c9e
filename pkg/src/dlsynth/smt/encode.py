"""Encoding a semi-positive stratum as SMT assertions.

Two encodings are combined into the bounded formula used for synthesis:

* encode_neg: per rule, (exists body-vars. body) => p(head-vars). Any model
  over-approximates the fixed point, so negative constraint literals are
  sound against it.
* encode_pos: step-indexed copies p@1 .. p@k with p@i(X) <=> (some rule body,
  idb atoms replaced by their @(i-1) copies, or false at i=0). A true p@k
  atom is certainly in the fixed point, so positive literals rewritten to @k
  are sound.
"""
from __future__ import annotations

from typing import Iterable, Optional

from ..constraints import (
    CAtom,
    CExists,
    CFalse,
    CForall,
    CNot,
    Constraint,
    cand,
    cor,
)
from ..datalog import Atom, Comparison, Literal, Program, Rule, SumEq, Var
from .formula import (
    CIff,
    CImplies,
    CSum,
    EncodingError,
    SmtConstraint,
    SmtFormula,
    is_rectified,
    step_name,
)


def _var_sorts(program: Program, rule: Rule) -> dict:
    sorts: dict[str, str] = {}
    atoms = [rule.head] + [it.atom for it in rule.body if isinstance(it, Literal)]
    for atom in atoms:
        sig = program.signatures[atom.pred]
        for pos, term in enumerate(atom.args):
            if isinstance(term, Var):
                sorts.setdefault(term.name, sig.arg_sorts[pos])
    for name in {v for it in rule.body for v in it.variables()} - set(sorts):
        raise EncodingError(f"variable {name} appears only in arithmetic; sort unknown")
    return sorts


def _item_constraint(item, idb: frozenset, step: Optional[int]) -> SmtConstraint:
    """tau for one body item: step=None leaves idb names alone (Encode);
    an integer step applies the unrolling cases."""
    if isinstance(item, Literal):
        if item.positive and item.atom.pred in idb and step is not None:
            if step == 0:
                return CFalse()
            return CAtom(Atom(step_name(item.atom.pred, step), item.atom.args))
        c = CAtom(item.atom)
        return c if item.positive else CNot(c)
    if isinstance(item, Comparison):
        from ..constraints import CCmp, CEq

        if item.op == "=":
            return CEq(item.left, item.right)
        return CCmp(item.op, item.left, item.right)
    assert isinstance(item, SumEq)
    return CSum(item.result, item.left, item.right)


def tau(body: Iterable, k: int, idb: frozenset) -> SmtConstraint:
    """The body-translation of the unrolled encoding: conjunction mapped
    pointwise; positive idb atoms become false at k=0 and p@k at k>0;
    negation wraps; everything else is unchanged."""
    items = [_item_constraint(item, idb, k) for item in body]
    return cand(*items) if items else CFalse()


def _quantify(kind, var_sorts: dict, names: Iterable[str], body: SmtConstraint):
    out = body
    for name in sorted(names, reverse=True):
        out = kind(name, var_sorts[name], out)
    return out


def _rule_groups(stratum: Program) -> dict:
    groups: dict[str, list[Rule]] = {}
    for rule in stratum.rules:
        groups.setdefault(rule.head.pred, []).append(rule)
    return groups


def _require_rectified(stratum: Program) -> None:
    if not is_rectified(stratum):
        raise EncodingError("stratum must be rectified before encoding")


def encode_neg(stratum: Program) -> SmtFormula:
    """Per-rule implications whose models over-approximate the fixed point."""
    _require_rectified(stratum)
    assertions = []
    for rule in stratum.rules:
        var_sorts = _var_sorts(stratum, rule)
        head_vars = [t.name for t in rule.head.args]
        body_vars = set(var_sorts) - set(head_vars)
        body = cand(*[_item_constraint(it, frozenset(), None) for it in rule.body])
        antecedent = _quantify(CExists, var_sorts, body_vars, body)
        implication = CImplies(antecedent, CAtom(rule.head))
        assertions.append(_quantify(CForall, var_sorts, head_vars, implication))
    return SmtFormula(dict(stratum.sorts), _declarations(stratum, 0), tuple(assertions))


def encode_pos(stratum: Program, k: int) -> SmtFormula:
    """Step assertions p@i(X) <=> unrolled bodies, for i = 1..k."""
    _require_rectified(stratum)
    if k < 1:
        raise EncodingError("unroll depth must be at least 1")
    idb = frozenset(r.head.pred for r in stratum.rules)
    groups = _rule_groups(stratum)
    assertions = []
    for i in range(1, k + 1):
        for pred, rules in groups.items():
            head_vars = [t.name for t in rules[0].head.args]
            disjuncts = []
            var_sorts = {}
            for rule in rules:
                vs = _var_sorts(stratum, rule)
                var_sorts.update({n: vs[n] for n in head_vars})
                body_vars = set(vs) - set(head_vars)
                body = tau(rule.body, i - 1, idb)
                disjuncts.append(_quantify(CExists, vs, body_vars, body))
            step_atom = CAtom(Atom(step_name(pred, i), rules[0].head.args))
            iff = CIff(step_atom, cor(*disjuncts))
            assertions.append(_quantify(CForall, var_sorts, head_vars, iff))
    return SmtFormula(dict(stratum.sorts), _declarations(stratum, k), tuple(assertions))


def _declarations(stratum: Program, k: int) -> dict:
    """All predicates a bounded encoding of this stratum may reference."""
    idb = {r.head.pred for r in stratum.rules}
    used = set(idb)
    for rule in stratum.rules:
        for item in rule.body:
            if isinstance(item, Literal):
                used.add(item.atom.pred)
    decls = {}
    for pred in sorted(used):
        sig = stratum.signatures[pred]
        decls[pred] = sig.arg_sorts
        if pred in idb:
            for i in range(1, k + 1):
                decls[step_name(pred, i)] = sig.arg_sorts
    return decls


def encode_bounded(stratum: Program, k: int) -> SmtFormula:
    """The full bounded encoding: over-approximation plus k unroll steps."""
    return encode_neg(stratum).conjoin(encode_pos(stratum, k))
