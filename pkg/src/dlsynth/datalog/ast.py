"""Core AST for stratified Datalog with sorted predicates.

All types are immutable (frozen dataclasses) and hashable, so interpretations
can be plain sets of ground atoms and programs can be shared freely.
"""
from __future__ import annotations

from dataclasses import dataclass, field, replace
from typing import Iterable, Iterator, Mapping, Optional, Union


class DatalogError(Exception):
    """Base class for program construction/validation errors."""


@dataclass(frozen=True)
class EnumSort:
    name: str
    values: tuple[str, ...]

    def domain(self) -> tuple[str, ...]:
        return self.values

    def __contains__(self, value: object) -> bool:
        return value in self.values


@dataclass(frozen=True)
class IntSort:
    name: str
    lo: int
    hi: int

    def __post_init__(self) -> None:
        if self.lo > self.hi:
            raise DatalogError(f"int sort {self.name}: lo {self.lo} > hi {self.hi}")

    def domain(self) -> tuple[int, ...]:
        return tuple(range(self.lo, self.hi + 1))

    def __contains__(self, value: object) -> bool:
        return isinstance(value, int) and self.lo <= value <= self.hi


Sort = Union[EnumSort, IntSort]


@dataclass(frozen=True)
class Var:
    name: str

    def __post_init__(self) -> None:
        if not self.name:
            raise DatalogError("variable names must be non-empty")

    def __str__(self) -> str:
        return self.name


@dataclass(frozen=True)
class Const:
    value: Union[str, int]

    def __str__(self) -> str:
        return str(self.value)


Term = Union[Var, Const]


@dataclass(frozen=True)
class Atom:
    pred: str
    args: tuple[Term, ...]

    def __str__(self) -> str:
        return f"{self.pred}({','.join(map(str, self.args))})"

    def is_ground(self) -> bool:
        return all(isinstance(t, Const) for t in self.args)

    def variables(self) -> set[str]:
        return {t.name for t in self.args if isinstance(t, Var)}


@dataclass(frozen=True)
class Literal:
    atom: Atom
    positive: bool = True

    def __str__(self) -> str:
        return str(self.atom) if self.positive else f"!{self.atom}"

    def variables(self) -> set[str]:
        return self.atom.variables()


@dataclass(frozen=True)
class Comparison:
    """Ground-decidable body constraint: left OP right over bounded integers."""

    op: str  # '<', '<=', '='
    left: Term
    right: Term

    def __post_init__(self) -> None:
        if self.op not in ("<", "<=", "="):
            raise DatalogError(f"unsupported comparison operator {self.op!r}")

    def __str__(self) -> str:
        return f"{self.left} {self.op} {self.right}"

    def variables(self) -> set[str]:
        return {t.name for t in (self.left, self.right) if isinstance(t, Var)}


@dataclass(frozen=True)
class SumEq:
    """Body constraint of the form result = left + right over bounded integers."""

    result: Term
    left: Term
    right: Term

    def __str__(self) -> str:
        return f"{self.result} = {self.left} + {self.right}"

    def variables(self) -> set[str]:
        return {t.name for t in (self.result, self.left, self.right) if isinstance(t, Var)}


BodyItem = Union[Literal, Comparison, SumEq]


@dataclass(frozen=True)
class Aggregate:
    """min/max over a body variable, attached to one head argument position."""

    func: str  # 'min' or 'max'
    var: str
    position: int

    def __post_init__(self) -> None:
        if self.func not in ("min", "max"):
            raise DatalogError(f"unsupported aggregate {self.func!r}")


@dataclass(frozen=True)
class Rule:
    head: Atom
    body: tuple[BodyItem, ...]
    aggregate: Optional[Aggregate] = None

    def body_literals(self) -> Iterator[Literal]:
        return (item for item in self.body if isinstance(item, Literal))

    def variables(self) -> set[str]:
        out = self.head.variables()
        for item in self.body:
            out |= item.variables()
        return out

    def __str__(self) -> str:
        head = str(self.head)
        if self.aggregate is not None:
            args = list(map(str, self.head.args))
            args[self.aggregate.position] = f"{self.aggregate.func}<{self.aggregate.var}>"
            head = f"{self.head.pred}({','.join(args)})"
        if not self.body:
            return f"{head}."
        return f"{head} :- {', '.join(map(str, self.body))}."


@dataclass(frozen=True)
class PredicateSignature:
    name: str
    arg_sorts: tuple[str, ...]
    role: str  # 'edb' or 'idb'

    def __post_init__(self) -> None:
        if self.role not in ("edb", "idb"):
            raise DatalogError(f"predicate {self.name}: role must be edb or idb")

    @property
    def arity(self) -> int:
        return len(self.arg_sorts)


Interpretation = frozenset  # of ground Atom


@dataclass(frozen=True)
class Program:
    signatures: Mapping[str, PredicateSignature]
    rules: tuple[Rule, ...]
    sorts: Mapping[str, Sort]

    def sort_of(self, pred: str, pos: int) -> Sort:
        return self.sorts[self.signatures[pred].arg_sorts[pos]]

    def edb_predicates(self) -> set[str]:
        return {s.name for s in self.signatures.values() if s.role == "edb"}

    def idb_predicates(self) -> set[str]:
        return {s.name for s in self.signatures.values() if s.role == "idb"}

    def with_rules(self, rules: Iterable[Rule]) -> "Program":
        return replace(self, rules=tuple(rules))

    def ground_atoms(self, pred: str) -> Iterator[Atom]:
        """All ground atoms of a predicate over its declared sorts."""
        sig = self.signatures[pred]
        domains = [self.sorts[s].domain() for s in sig.arg_sorts]
        stack = [()]
        for dom in domains:
            stack = [prefix + (Const(v),) for prefix in stack for v in dom]
        for args in stack:
            yield Atom(pred, args)


def ground_atom(pred: str, *values: Union[str, int]) -> Atom:
    return Atom(pred, tuple(Const(v) for v in values))


def check_well_formed(program: Program) -> list[str]:
    """Return violation messages; empty list means the program is well formed.

    Checks the head-variable condition (every head variable occurs in the
    body), that edb predicates never head a rule, and basic sort/arity
    consistency of all atoms.
    """
    violations: list[str] = []
    edb = program.edb_predicates()
    for idx, rule in enumerate(program.rules):
        label = f"rule {idx} ({rule})"
        body_vars: set[str] = set()
        for item in rule.body:
            body_vars |= item.variables()
        head_vars = rule.head.variables()
        missing = head_vars - body_vars
        if missing:
            violations.append(f"{label}: head variables {sorted(missing)} not bound in body")
        if rule.head.pred in edb:
            violations.append(f"{label}: edb predicate {rule.head.pred} appears in a rule head")
        for atom in _rule_atoms(rule):
            violations.extend(_check_atom(program, atom, label))
    return violations


def _rule_atoms(rule: Rule) -> Iterator[Atom]:
    yield rule.head
    for item in rule.body:
        if isinstance(item, Literal):
            yield item.atom


def _check_atom(program: Program, atom: Atom, label: str) -> list[str]:
    sig = program.signatures.get(atom.pred)
    if sig is None:
        return [f"{label}: undeclared predicate {atom.pred}"]
    out = []
    if len(atom.args) != sig.arity:
        out.append(f"{label}: {atom.pred} expects {sig.arity} arguments, got {len(atom.args)}")
        return out
    for pos, term in enumerate(atom.args):
        if isinstance(term, Const):
            sort = program.sorts[sig.arg_sorts[pos]]
            if term.value not in sort:
                out.append(f"{label}: constant {term.value!r} outside sort {sort.name}")
    return out


def validate_interpretation(program: Program, atoms: Iterable[Atom]) -> None:
    """Raise DatalogError unless every atom is ground and sort-consistent."""
    for atom in atoms:
        if not atom.is_ground():
            raise DatalogError(f"atom {atom} is not ground")
        errs = _check_atom(program, atom, str(atom))
        if errs:
            raise DatalogError("; ".join(errs))


def project_edb(program: Program, interpretation: Iterable[Atom]) -> frozenset:
    """The edb-projection of an interpretation (the input it encodes)."""
    edb = program.edb_predicates()
    return frozenset(a for a in interpretation if a.pred in edb)
