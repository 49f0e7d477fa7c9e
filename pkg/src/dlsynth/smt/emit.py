"""Serialize an SmtFormula to SMT-LIB v2 text.

Two modes:

* ground (default): every quantifier, including those over bounded integer
  sorts, is expanded and arithmetic is constant-folded, so the output is
  purely boolean (QF_UF over zero-ary predicates named |p(v1,v2)|). Any
  SMT-LIB solver, including the bundled one, can handle it.
* symbolic integers: enumerated sorts become distinct integer constants and
  their quantifiers are expanded, but integer-sorted variables stay symbolic
  under (forall/exists ...) with range guards and (+ ...) terms (UFLIA).

Output is deterministic: byte-identical for identical inputs.
"""
from __future__ import annotations

import itertools
from typing import Mapping, Optional

from ..constraints import (
    CAnd,
    CAtom,
    CCmp,
    CEq,
    CExists,
    CFalse,
    CForall,
    CNot,
    COr,
    CTrue,
)
from ..datalog import Atom, Const, EnumSort, IntSort, Program, Term, Var
from .formula import CIff, CImplies, CSum, EncodingError, SmtFormula

_EXPANSION_CAP = 10 ** 7


def atom_name(atom: Atom) -> str:
    return f"|{atom.pred}({','.join(str(a.value) for a in atom.args)})|"


# -- folding boolean builders -------------------------------------------------

def _e_not(x: str) -> str:
    if x == "true":
        return "false"
    if x == "false":
        return "true"
    return f"(not {x})"


def _e_and(parts) -> str:
    kept = []
    for p in parts:
        if p == "false":
            return "false"
        if p != "true":
            kept.append(p)
    if not kept:
        return "true"
    return kept[0] if len(kept) == 1 else f"(and {' '.join(kept)})"


def _e_or(parts) -> str:
    kept = []
    for p in parts:
        if p == "true":
            return "true"
        if p != "false":
            kept.append(p)
    if not kept:
        return "false"
    return kept[0] if len(kept) == 1 else f"(or {' '.join(kept)})"


def _e_implies(a: str, b: str) -> str:
    if a == "false" or b == "true":
        return "true"
    if a == "true":
        return b
    if b == "false":
        return _e_not(a)
    return f"(=> {a} {b})"


def _e_iff(a: str, b: str) -> str:
    if a == "true":
        return b
    if b == "true":
        return a
    if a == "false":
        return _e_not(b)
    if b == "false":
        return _e_not(a)
    return f"(= {a} {b})"


class _Budget:
    def __init__(self, cap: int):
        self.left = cap

    def spend(self, n: int = 1) -> None:
        self.left -= n
        if self.left < 0:
            raise EncodingError("formula expansion exceeds the cap")


# -- ground mode --------------------------------------------------------------

def _ground_term(term: Term, env: Mapping[str, Const]):
    if isinstance(term, Var):
        if term.name not in env:
            raise EncodingError(f"unquantified variable {term.name}")
        return env[term.name].value
    return term.value


def _expand_ground(c, sorts, env, budget) -> str:
    budget.spend()
    if isinstance(c, CTrue):
        return "true"
    if isinstance(c, CFalse):
        return "false"
    if isinstance(c, CAtom):
        args = tuple(Const(_ground_term(t, env)) for t in c.atom.args)
        return atom_name(Atom(c.atom.pred, args))
    if isinstance(c, CNot):
        return _e_not(_expand_ground(c.child, sorts, env, budget))
    if isinstance(c, (CAnd, COr)):
        fold, stop = (_e_and, "false") if isinstance(c, CAnd) else (_e_or, "true")
        parts = []
        for child in c.children:
            part = _expand_ground(child, sorts, env, budget)
            if part == stop:
                return stop
            parts.append(part)
        return fold(parts)
    if isinstance(c, (CForall, CExists)):
        sort = sorts.get(c.sort)
        if sort is None:
            raise EncodingError(f"unknown sort {c.sort}")
        fold, stop = (_e_and, "false") if isinstance(c, CForall) else (_e_or, "true")
        parts = []
        for value in sort.domain():
            part = _expand_ground(c.body, sorts, {**env, c.var: Const(value)}, budget)
            if part == stop:
                return stop
            parts.append(part)
        return fold(parts)
    if isinstance(c, CImplies):
        a = _expand_ground(c.antecedent, sorts, env, budget)
        if a == "false":
            return "true"
        return _e_implies(a, _expand_ground(c.consequent, sorts, env, budget))
    if isinstance(c, CIff):
        return _e_iff(_expand_ground(c.left, sorts, env, budget),
                      _expand_ground(c.right, sorts, env, budget))
    if isinstance(c, CEq):
        return "true" if _ground_term(c.left, env) == _ground_term(c.right, env) \
            else "false"
    if isinstance(c, CCmp):
        lhs, rhs = _ground_term(c.left, env), _ground_term(c.right, env)
        ok = lhs < rhs if c.op == "<" else lhs <= rhs
        return "true" if ok else "false"
    assert isinstance(c, CSum)
    r = _ground_term(c.result, env)
    return "true" if r == _ground_term(c.left, env) + _ground_term(c.right, env) \
        else "false"


def _ground_declarations(f: SmtFormula, lines: list) -> None:
    for pred in sorted(f.predicates):
        domains = [f.sorts[s].domain() for s in f.predicates[pred]]
        for values in itertools.product(*domains):
            atom = Atom(pred, tuple(Const(v) for v in values))
            lines.append(f"(declare-fun {atom_name(atom)} () Bool)")


# -- symbolic-integer mode ----------------------------------------------------

def _enum_encoding(sorts) -> dict:
    mapping = {}
    for sort in sorts.values():
        if isinstance(sort, EnumSort):
            for i, v in enumerate(sort.values):
                mapping.setdefault(v, i)
    return mapping


def _sym_term(term: Term, env: dict, enums: dict) -> str:
    if isinstance(term, Var):
        if term.name in env:
            return env[term.name]
        raise EncodingError(f"unquantified variable {term.name}")
    v = term.value
    if isinstance(v, int):
        return str(v) if v >= 0 else f"(- {-v})"
    return f"|{v}|"


def _expand_symbolic(c, sorts, env, enums, budget) -> str:
    budget.spend()
    if isinstance(c, CTrue):
        return "true"
    if isinstance(c, CFalse):
        return "false"
    if isinstance(c, CAtom):
        args = " ".join(_sym_term(t, env, enums) for t in c.atom.args)
        return f"(|{c.atom.pred}| {args})" if args else f"|{c.atom.pred}|"
    if isinstance(c, CNot):
        return _e_not(_expand_symbolic(c.child, sorts, env, enums, budget))
    if isinstance(c, (CAnd, COr)):
        fold = _e_and if isinstance(c, CAnd) else _e_or
        return fold([_expand_symbolic(k, sorts, env, enums, budget) for k in c.children])
    if isinstance(c, (CForall, CExists)):
        sort = sorts.get(c.sort)
        if sort is None:
            raise EncodingError(f"unknown sort {c.sort}")
        if isinstance(sort, EnumSort):
            fold = _e_and if isinstance(c, CForall) else _e_or
            return fold([_expand_symbolic(c.body, sorts, {**env, c.var: f"|{v}|"},
                                          enums, budget)
                         for v in sort.values])
        guard = f"(and (<= {sort.lo} {c.var}) (<= {c.var} {sort.hi}))"
        body = _expand_symbolic(c.body, sorts, {**env, c.var: c.var}, enums, budget)
        if isinstance(c, CForall):
            return f"(forall (({c.var} Int)) (=> {guard} {body}))"
        return f"(exists (({c.var} Int)) (and {guard} {body}))"
    if isinstance(c, CImplies):
        return _e_implies(_expand_symbolic(c.antecedent, sorts, env, enums, budget),
                          _expand_symbolic(c.consequent, sorts, env, enums, budget))
    if isinstance(c, CIff):
        return _e_iff(_expand_symbolic(c.left, sorts, env, enums, budget),
                      _expand_symbolic(c.right, sorts, env, enums, budget))
    if isinstance(c, CEq):
        return f"(= {_sym_term(c.left, env, enums)} {_sym_term(c.right, env, enums)})"
    if isinstance(c, CCmp):
        return (f"({c.op} {_sym_term(c.left, env, enums)} "
                f"{_sym_term(c.right, env, enums)})")
    assert isinstance(c, CSum)
    return (f"(= {_sym_term(c.result, env, enums)} "
            f"(+ {_sym_term(c.left, env, enums)} {_sym_term(c.right, env, enums)}))")


def _symbolic_declarations(f: SmtFormula, enums: dict, lines: list) -> None:
    for value in sorted(enums, key=enums.get):
        lines.append(f"(define-fun |{value}| () Int {enums[value]})")
    for pred in sorted(f.predicates):
        args = " ".join("Int" for _ in f.predicates[pred])
        lines.append(f"(declare-fun |{pred}| ({args}) Bool)")


# -- entry point --------------------------------------------------------------

def emit_smtlib(f: SmtFormula, program: Optional[Program] = None,
                symbolic_ints: bool = False, expansion_cap: int = _EXPANSION_CAP) -> str:
    """SMT-LIB v2 text for the formula; see module docstring for the modes.

    When a program is given, its declared predicates are added to the
    formula's so constraint-only predicates are declared too.
    """
    if program is not None:
        extra = {name: sig.arg_sorts for name, sig in program.signatures.items()}
        merged_sorts = {**dict(program.sorts), **dict(f.sorts)}
        f = SmtFormula(merged_sorts, {**extra, **dict(f.predicates)}, f.assertions)
    budget = _Budget(expansion_cap)
    lines = []
    if symbolic_ints:
        lines.append("(set-logic UFLIA)")
        enums = _enum_encoding(f.sorts)
        _symbolic_declarations(f, enums, lines)
        for assertion in f.assertions:
            lines.append(f"(assert {_expand_symbolic(assertion, f.sorts, {}, enums, budget)})")
    else:
        lines.append("(set-logic QF_UF)")
        _ground_declarations(f, lines)
        for assertion in f.assertions:
            lines.append(f"(assert {_expand_ground(assertion, f.sorts, {}, budget)})")
    lines.append("(check-sat)")
    lines.append("(get-model)")
    return "\n".join(lines) + "\n"
