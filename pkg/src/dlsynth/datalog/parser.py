"""Text format for Datalog programs and ground-atom files.

Program source grammar::

    .sort node {v0,v1,v2}
    .int cost [0,10]
    .decl e(node,node) edb
    .decl tc(node,node) idb
    tc(X,Y) :- e(X,Y).
    tc(X,Y) :- tc(X,Z), tc(Z,Y).
    minC(R,min<C>) :- route(R,N,C).
    # line comment

Identifiers that name a declared enumerated-sort value are constants;
everything else is a variable. Interpretations serialize one ground atom
per line: ``pred(c1,c2)``.
"""
from __future__ import annotations

import re
from typing import Iterable, Optional

from .ast import (
    Aggregate,
    Atom,
    BodyItem,
    Comparison,
    Const,
    DatalogError,
    EnumSort,
    IntSort,
    Literal,
    PredicateSignature,
    Program,
    Rule,
    Sort,
    SumEq,
    Term,
    Var,
    check_well_formed,
)


class ParseError(DatalogError):
    def __init__(self, message: str, line: int, col: int):
        super().__init__(f"line {line}, column {col}: {message}")
        self.line = line
        self.col = col


_TOKEN_RE = re.compile(
    r"""
    (?P<ws>\s+)
  | (?P<comment>\#[^\n]*)
  | (?P<directive>\.(?:sort|int|decl)\b)
  | (?P<arrow>:-)
  | (?P<le><=)
  | (?P<int>-?\d+)
  | (?P<ident>[A-Za-z_][A-Za-z0-9_']*)
  | (?P<string>"[^"]*")
  | (?P<punct>[(){}\[\],.!=<>+|])
    """,
    re.VERBOSE,
)


class _Token:
    __slots__ = ("kind", "text", "line", "col")

    def __init__(self, kind: str, text: str, line: int, col: int):
        self.kind = kind
        self.text = text
        self.line = line
        self.col = col


def _tokenize(text: str) -> list[_Token]:
    tokens = []
    line, line_start = 1, 0
    pos = 0
    while pos < len(text):
        m = _TOKEN_RE.match(text, pos)
        if m is None:
            raise ParseError(f"unexpected character {text[pos]!r}", line, pos - line_start + 1)
        kind = m.lastgroup or ""
        value = m.group()
        if kind not in ("ws", "comment"):
            tokens.append(_Token(kind, value, line, m.start() - line_start + 1))
        line += value.count("\n")
        if "\n" in value:
            line_start = m.start() + value.rindex("\n") + 1
        pos = m.end()
    tokens.append(_Token("eof", "", line, pos - line_start + 1))
    return tokens


class _Parser:
    def __init__(self, text: str):
        self.tokens = _tokenize(text)
        self.i = 0
        self.sorts: dict[str, Sort] = {}
        self.signatures: dict[str, PredicateSignature] = {}
        self.rules: list[Rule] = []
        self.enum_values: set[str] = set()

    # -- token helpers -----------------------------------------------------
    def peek(self) -> _Token:
        return self.tokens[self.i]

    def next(self) -> _Token:
        tok = self.tokens[self.i]
        self.i += 1
        return tok

    def expect(self, text: str) -> _Token:
        tok = self.next()
        if tok.text != text:
            raise ParseError(f"expected {text!r}, found {tok.text!r}", tok.line, tok.col)
        return tok

    def expect_kind(self, kind: str) -> _Token:
        tok = self.next()
        if tok.kind != kind:
            raise ParseError(f"expected {kind}, found {tok.text!r}", tok.line, tok.col)
        return tok

    # -- grammar -----------------------------------------------------------
    def parse(self) -> Program:
        while self.peek().kind != "eof":
            tok = self.peek()
            if tok.kind == "directive":
                self.directive()
            else:
                self.rule()
        program = Program(signatures=dict(self.signatures), rules=tuple(self.rules),
                          sorts=dict(self.sorts))
        violations = check_well_formed(program)
        if violations:
            raise DatalogError("; ".join(violations))
        return program

    def directive(self) -> None:
        tok = self.next()
        if tok.text == ".sort":
            name = self.expect_kind("ident").text
            self.expect("{")
            values = [self.value_token()]
            while self.peek().text == ",":
                self.next()
                values.append(self.value_token())
            self.expect("}")
            self.declare_sort(EnumSort(name, tuple(values)), tok)
            self.enum_values.update(values)
        elif tok.text == ".int":
            name = self.expect_kind("ident").text
            self.expect("[")
            lo = int(self.expect_kind("int").text)
            self.expect(",")
            hi = int(self.expect_kind("int").text)
            self.expect("]")
            if lo > hi:
                raise ParseError(f"int sort {name}: empty range [{lo},{hi}]", tok.line, tok.col)
            self.declare_sort(IntSort(name, lo, hi), tok)
        else:  # .decl
            name = self.expect_kind("ident").text
            if name in self.signatures:
                raise ParseError(f"duplicate predicate {name}", tok.line, tok.col)
            self.expect("(")
            arg_sorts = [self.sort_name()]
            while self.peek().text == ",":
                self.next()
                arg_sorts.append(self.sort_name())
            self.expect(")")
            role = self.expect_kind("ident").text
            if role not in ("edb", "idb"):
                raise ParseError(f"expected edb or idb, found {role!r}", tok.line, tok.col)
            self.signatures[name] = PredicateSignature(name, tuple(arg_sorts), role)

    def declare_sort(self, sort: Sort, tok: _Token) -> None:
        if sort.name in self.sorts:
            raise ParseError(f"duplicate sort {sort.name}", tok.line, tok.col)
        self.sorts[sort.name] = sort

    def value_token(self) -> str:
        tok = self.next()
        if tok.kind not in ("ident", "int"):
            raise ParseError(f"expected sort value, found {tok.text!r}", tok.line, tok.col)
        return tok.text

    def sort_name(self) -> str:
        tok = self.expect_kind("ident")
        if tok.text not in self.sorts:
            raise ParseError(f"unknown sort {tok.text}", tok.line, tok.col)
        return tok.text

    def rule(self) -> None:
        head, aggregate = self.head_atom()
        body: list[BodyItem] = []
        if self.peek().kind == "arrow":
            self.next()
            body.append(self.body_item())
            while self.peek().text == ",":
                self.next()
                body.append(self.body_item())
        self.expect(".")
        self.rules.append(Rule(head, tuple(body), aggregate))

    def head_atom(self) -> tuple[Atom, Optional[Aggregate]]:
        pred = self.expect_kind("ident")
        self.expect("(")
        args: list[Term] = []
        aggregate: Optional[Aggregate] = None
        while True:
            tok = self.peek()
            if tok.kind == "ident" and tok.text in ("min", "max") and \
                    self.tokens[self.i + 1].text == "<":
                self.next()
                self.expect("<")
                var = self.expect_kind("ident").text
                self.expect(">")
                if aggregate is not None:
                    raise ParseError("at most one aggregate per rule", tok.line, tok.col)
                aggregate = Aggregate(tok.text, var, len(args))
                args.append(Var(var))
            else:
                args.append(self.term())
            if self.peek().text != ",":
                break
            self.next()
        self.expect(")")
        return Atom(pred.text, tuple(args)), aggregate

    def body_item(self) -> BodyItem:
        tok = self.peek()
        if tok.text == "!":
            self.next()
            return Literal(self.atom(), positive=False)
        # Lookahead: ident followed by '(' is an atom; otherwise an
        # arithmetic constraint (T = T + T, T < T, T <= T, T = T).
        if tok.kind == "ident" and self.tokens[self.i + 1].text == "(":
            return Literal(self.atom())
        left = self.term()
        op_tok = self.next()
        if op_tok.text not in ("=", "<", "<="):
            raise ParseError(f"expected comparison operator, found {op_tok.text!r}",
                             op_tok.line, op_tok.col)
        right = self.term()
        if op_tok.text == "=" and self.peek().text == "+":
            self.next()
            third = self.term()
            return SumEq(left, right, third)
        return Comparison(op_tok.text, left, right)

    def atom(self) -> Atom:
        pred = self.expect_kind("ident")
        self.expect("(")
        args = [self.term()]
        while self.peek().text == ",":
            self.next()
            args.append(self.term())
        self.expect(")")
        return Atom(pred.text, tuple(args))

    def term(self) -> Term:
        tok = self.next()
        if tok.kind == "int":
            return Const(int(tok.text))
        if tok.kind == "string":
            return Const(tok.text[1:-1])
        if tok.kind != "ident":
            raise ParseError(f"expected term, found {tok.text!r}", tok.line, tok.col)
        if tok.text in self.enum_values:
            return Const(tok.text)
        if tok.text[0].isupper() or tok.text[0] == "_":
            return Var(tok.text)
        raise ParseError(f"unknown constant {tok.text!r} (lowercase names must be "
                         f"declared sort values)", tok.line, tok.col)


def parse_program(text: str) -> Program:
    """Parse and validate a Datalog program; raises on any violation."""
    return _Parser(text).parse()


# -- ground atom files -----------------------------------------------------

_ATOM_RE = re.compile(r"^\s*([A-Za-z_][A-Za-z0-9_']*)\(([^)]*)\)\s*$")


def parse_atoms(text: str, program: Optional[Program] = None) -> frozenset:
    """Parse a one-atom-per-line interpretation file.

    Constant tokens are resolved against the program's sorts when given
    (integers otherwise stay strings only if non-numeric).
    """
    atoms = set()
    for lineno, raw in enumerate(text.splitlines(), start=1):
        line = raw.split("#", 1)[0].strip()
        if not line:
            continue
        m = _ATOM_RE.match(line)
        if m is None:
            raise ParseError(f"malformed atom {line!r}", lineno, 1)
        pred = m.group(1)
        raw_args = [a.strip() for a in m.group(2).split(",")] if m.group(2).strip() else []
        args = tuple(Const(int(a)) if re.fullmatch(r"-?\d+", a) else Const(a.strip('"'))
                     for a in raw_args)
        atoms.add(Atom(pred, args))
    if program is not None:
        from .ast import validate_interpretation

        validate_interpretation(program, atoms)
    return frozenset(atoms)


def format_atoms(atoms: Iterable[Atom]) -> str:
    return "\n".join(sorted(str(a) for a in atoms)) + "\n" if atoms else ""
