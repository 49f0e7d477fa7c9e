"""First-order constraints over Datalog predicates.

Constraints are function-free first-order formulas with quantifiers ranging
over the finite declared sorts. `simplify` expands quantifiers and converts
to clausal form, `rewrite` renames positive idb literals to their k-unrolled
counterparts, and `holds` evaluates a constraint against an interpretation
(closed-world) as the verification oracle.
"""
from __future__ import annotations

from dataclasses import dataclass
from typing import Iterable, Mapping, Union

from .datalog import Atom, Const, DatalogError, Literal, Sort, Term, Var


class ConstraintError(DatalogError):
    pass


class ClauseExplosionError(ConstraintError):
    pass


@dataclass(frozen=True)
class CTrue:
    def __str__(self) -> str:
        return "true"


@dataclass(frozen=True)
class CFalse:
    def __str__(self) -> str:
        return "false"


@dataclass(frozen=True)
class CAtom:
    atom: Atom

    def __str__(self) -> str:
        return str(self.atom)


@dataclass(frozen=True)
class CNot:
    child: "Constraint"

    def __str__(self) -> str:
        return f"!{_paren(self.child)}"


@dataclass(frozen=True)
class CAnd:
    children: tuple["Constraint", ...]

    def __str__(self) -> str:
        return " & ".join(_paren(c) for c in self.children) if self.children else "true"


@dataclass(frozen=True)
class COr:
    children: tuple["Constraint", ...]

    def __str__(self) -> str:
        return " | ".join(_paren(c) for c in self.children) if self.children else "false"


@dataclass(frozen=True)
class CForall:
    var: str
    sort: str
    body: "Constraint"

    def __str__(self) -> str:
        return f"forall {self.var}:{self.sort}. {self.body}"


@dataclass(frozen=True)
class CExists:
    var: str
    sort: str
    body: "Constraint"

    def __str__(self) -> str:
        return f"exists {self.var}:{self.sort}. {self.body}"


@dataclass(frozen=True)
class CEq:
    left: Term
    right: Term

    def __str__(self) -> str:
        return f"{self.left} = {self.right}"


@dataclass(frozen=True)
class CCmp:
    op: str  # '<' or '<='
    left: Term
    right: Term

    def __post_init__(self) -> None:
        if self.op not in ("<", "<="):
            raise ConstraintError(f"unsupported comparison {self.op!r}")

    def __str__(self) -> str:
        return f"{self.left} {self.op} {self.right}"


Constraint = Union[CTrue, CFalse, CAtom, CNot, CAnd, COr, CForall, CExists, CEq, CCmp]


def _paren(c: Constraint) -> str:
    if isinstance(c, (CAnd, COr, CForall, CExists)):
        return f"({c})"
    return str(c)


def cand(*children: Constraint) -> Constraint:
    kids = [c for c in children if not isinstance(c, CTrue)]
    if any(isinstance(c, CFalse) for c in kids):
        return CFalse()
    if not kids:
        return CTrue()
    return kids[0] if len(kids) == 1 else CAnd(tuple(kids))


def cor(*children: Constraint) -> Constraint:
    kids = [c for c in children if not isinstance(c, CFalse)]
    if any(isinstance(c, CTrue) for c in kids):
        return CTrue()
    if not kids:
        return CFalse()
    return kids[0] if len(kids) == 1 else COr(tuple(kids))


Clause = tuple  # of ground Literal, deduplicated and sorted


@dataclass(frozen=True)
class ClausalConstraint:
    """A conjunction of clauses, each a disjunction of ground literals."""

    clauses: tuple[Clause, ...]

    def __str__(self) -> str:
        if not self.clauses:
            return "true"
        return " & ".join(
            "(" + " | ".join(map(str, clause)) + ")" if clause else "false"
            for clause in self.clauses)

    def literals(self) -> Iterable[Literal]:
        for clause in self.clauses:
            yield from clause


# -- substitution and structural helpers -------------------------------------

def _subst_term(term: Term, env: Mapping[str, Const]) -> Term:
    if isinstance(term, Var) and term.name in env:
        return env[term.name]
    return term


def _subst(c: Constraint, env: Mapping[str, Const]) -> Constraint:
    if isinstance(c, (CTrue, CFalse)):
        return c
    if isinstance(c, CAtom):
        return CAtom(Atom(c.atom.pred, tuple(_subst_term(t, env) for t in c.atom.args)))
    if isinstance(c, CNot):
        return CNot(_subst(c.child, env))
    if isinstance(c, CAnd):
        return CAnd(tuple(_subst(k, env) for k in c.children))
    if isinstance(c, COr):
        return COr(tuple(_subst(k, env) for k in c.children))
    if isinstance(c, (CForall, CExists)):
        inner = {k: v for k, v in env.items() if k != c.var}
        return type(c)(c.var, c.sort, _subst(c.body, inner))
    if isinstance(c, CEq):
        return CEq(_subst_term(c.left, env), _subst_term(c.right, env))
    assert isinstance(c, CCmp)
    return CCmp(c.op, _subst_term(c.left, env), _subst_term(c.right, env))


def _ground_value(term: Term, what: str):
    if not isinstance(term, Const):
        raise ConstraintError(f"free variable {term} in {what}")
    return term.value


def _eval_test(c: Constraint) -> Constraint:
    """Fold a ground equality/comparison into a boolean constant."""
    if isinstance(c, CEq):
        return CTrue() if _ground_value(c.left, "equality") == \
            _ground_value(c.right, "equality") else CFalse()
    assert isinstance(c, CCmp)
    lhs, rhs = _ground_value(c.left, "comparison"), _ground_value(c.right, "comparison")
    ok = lhs < rhs if c.op == "<" else lhs <= rhs
    return CTrue() if ok else CFalse()


# -- simplify: expand quantifiers, NNF, distribute to clauses ----------------

def _expand(c: Constraint, domains: Mapping[str, Sort], negate: bool) -> Constraint:
    """Quantifier expansion and negation-pushing in one pass; result is an
    and/or tree over ground literals and boolean constants."""
    if isinstance(c, CTrue):
        return CFalse() if negate else CTrue()
    if isinstance(c, CFalse):
        return CTrue() if negate else CFalse()
    if isinstance(c, CAtom):
        if not c.atom.is_ground():
            raise ConstraintError(f"free variable in atom {c.atom}")
        return CNot(c) if negate else c
    if isinstance(c, CNot):
        return _expand(c.child, domains, not negate)
    if isinstance(c, CAnd):
        kids = tuple(_expand(k, domains, negate) for k in c.children)
        return cor(*kids) if negate else cand(*kids)
    if isinstance(c, COr):
        kids = tuple(_expand(k, domains, negate) for k in c.children)
        return cand(*kids) if negate else cor(*kids)
    if isinstance(c, (CForall, CExists)):
        sort = domains.get(c.sort)
        if sort is None:
            raise ConstraintError(f"quantifier over unknown sort {c.sort}")
        instances = tuple(_expand(_subst(c.body, {c.var: Const(v)}), domains, negate)
                          for v in sort.domain())
        conj = isinstance(c, CForall) != negate
        return cand(*instances) if conj else cor(*instances)
    return _expand(_eval_test(c), domains, negate)


_CLAUSE_CAP = 10 ** 6


def _to_clauses(c: Constraint, cap: int) -> list[frozenset]:
    """Distribute an NNF and/or tree into CNF clause sets."""
    if isinstance(c, CTrue):
        return []
    if isinstance(c, CFalse):
        return [frozenset()]
    if isinstance(c, CAtom):
        return [frozenset({Literal(c.atom)})]
    if isinstance(c, CNot):
        assert isinstance(c.child, CAtom)
        return [frozenset({Literal(c.child.atom, positive=False)})]
    if isinstance(c, CAnd):
        out = []
        for k in c.children:
            out.extend(_to_clauses(k, cap))
            if len(out) > cap:
                raise ClauseExplosionError(f"clausal form exceeds {cap} clauses")
        return out
    assert isinstance(c, COr)
    parts = [_to_clauses(k, cap) for k in c.children]
    out = [frozenset()]
    for clauses in parts:
        nxt = [base | clause for base in out for clause in clauses]
        if len(nxt) > cap:
            raise ClauseExplosionError(f"clausal form exceeds {cap} clauses")
        out = nxt
    return out


def _normalize(clauses: Iterable[frozenset]) -> tuple:
    kept = []
    seen = set()
    for clause in clauses:
        atoms_pos = {lit.atom for lit in clause if lit.positive}
        atoms_neg = {lit.atom for lit in clause if not lit.positive}
        if atoms_pos & atoms_neg:
            continue  # tautology
        ordered = tuple(sorted(clause, key=str))
        if ordered not in seen:
            seen.add(ordered)
            kept.append(ordered)
    kept.sort(key=lambda cl: tuple(map(str, cl)))
    return tuple(kept)


def simplify(c: Constraint, domains: Mapping[str, Sort],
             clause_cap: int = _CLAUSE_CAP) -> ClausalConstraint:
    """Expand quantifiers over the finite domains and return clausal form.

    The result is logically equivalent to the input over the given domains.
    Raises ClauseExplosionError when distribution exceeds clause_cap.
    """
    nnf = _expand(c, domains, negate=False)
    return ClausalConstraint(_normalize(_to_clauses(nnf, clause_cap)))


# -- rewrite: subscript positive idb literals ---------------------------------

def unrolled_name(pred: str, k: int) -> str:
    return f"{pred}@{k}"


def rewrite(c: ClausalConstraint, k: int, idb: frozenset) -> Constraint:
    """Map each positive idb literal p(t) to its k-unrolled p@k(t); negative
    literals and edb literals keep their names. Shape is preserved."""
    if k < 1:
        raise ConstraintError("rewrite requires k >= 1")
    conjuncts = []
    for clause in c.clauses:
        parts = []
        for lit in clause:
            if lit.positive and lit.atom.pred in idb:
                parts.append(CAtom(Atom(unrolled_name(lit.atom.pred, k), lit.atom.args)))
            elif lit.positive:
                parts.append(CAtom(lit.atom))
            else:
                parts.append(CNot(CAtom(lit.atom)))
        conjuncts.append(COr(tuple(parts)))
    return CAnd(tuple(conjuncts))


# -- satisfaction -------------------------------------------------------------

def holds(interpretation: frozenset, c: Constraint, domains: Mapping[str, Sort]) -> bool:
    """Closed-world first-order satisfaction over the finite domains."""
    if isinstance(c, CTrue):
        return True
    if isinstance(c, CFalse):
        return False
    if isinstance(c, CAtom):
        if not c.atom.is_ground():
            raise ConstraintError(f"free variable in atom {c.atom}")
        return c.atom in interpretation
    if isinstance(c, CNot):
        return not holds(interpretation, c.child, domains)
    if isinstance(c, CAnd):
        return all(holds(interpretation, k, domains) for k in c.children)
    if isinstance(c, COr):
        return any(holds(interpretation, k, domains) for k in c.children)
    if isinstance(c, (CForall, CExists)):
        sort = domains.get(c.sort)
        if sort is None:
            raise ConstraintError(f"quantifier over unknown sort {c.sort}")
        results = (holds(interpretation, _subst(c.body, {c.var: Const(v)}), domains)
                   for v in sort.domain())
        return all(results) if isinstance(c, CForall) else any(results)
    return isinstance(_eval_test(c), CTrue)
