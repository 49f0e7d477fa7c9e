"""Forwarding requirements: the input grammar and their compilation to a
first-order constraint over the network program's forwarding relation.

Requirement files are UTF-8, one requirement per line, ``#`` comments::

    path <tc> <r1> <r2> ... <rn>    # traffic follows exactly this route
    reach <tc> <src> <dst>          # some forwarding path exists
    isolate <tc1> <tc2>             # the two classes share no link
    loopfree                        # no traffic class revisits a router

`path` additionally forbids every on-path router from forwarding the class
anywhere else, so the route is exact, not merely present. `reach` and
`loopfree` compile to the transitive closure Reach of Fwd, which
`add_reach_rules` appends to a program as two extra rules.
"""
from __future__ import annotations

from dataclasses import dataclass, replace
from typing import Iterable, Sequence

from .constraints import CAtom, CNot, Constraint, cand, cor
from .datalog import (
    Atom,
    Literal,
    PredicateSignature,
    Program,
    Rule,
    Var,
    ground_atom,
)
from .network.topology import NetworkError, Topology


@dataclass(frozen=True)
class PathReq:
    tc: str
    route: tuple[str, ...]

    def __str__(self) -> str:
        return f"path {self.tc} {' '.join(self.route)}"


@dataclass(frozen=True)
class ReachReq:
    tc: str
    src: str
    dst: str

    def __str__(self) -> str:
        return f"reach {self.tc} {self.src} {self.dst}"


@dataclass(frozen=True)
class IsolationReq:
    tc1: str
    tc2: str

    def __str__(self) -> str:
        return f"isolate {self.tc1} {self.tc2}"


@dataclass(frozen=True)
class LoopFreeReq:
    def __str__(self) -> str:
        return "loopfree"


Requirement = object  # union of the four dataclasses above


def parse_requirements(text: str, topology: Topology) -> tuple:
    """Parse a requirements file, resolving names against the topology."""
    nets = set(topology.networks)
    routers = set(topology.routers)

    def check_tc(tc: str, lineno: int) -> str:
        if tc not in nets:
            raise NetworkError(f"line {lineno}: unknown traffic class {tc}")
        return tc

    def check_router(r: str, lineno: int) -> str:
        if r not in routers:
            raise NetworkError(f"line {lineno}: unknown router {r}")
        return r

    out = []
    for lineno, raw in enumerate(text.splitlines(), start=1):
        line = raw.split("#", 1)[0].strip()
        if not line:
            continue
        words = line.split()
        if words[0] == "path" and len(words) >= 4:
            tc = check_tc(words[1], lineno)
            route = tuple(check_router(r, lineno) for r in words[2:])
            for a, b in zip(route, route[1:]):
                if a == b:
                    raise NetworkError(
                        f"line {lineno}: path repeats router {a} consecutively")
            out.append(PathReq(tc, route))
        elif words[0] == "reach" and len(words) == 4:
            out.append(ReachReq(check_tc(words[1], lineno),
                                check_router(words[2], lineno),
                                check_router(words[3], lineno)))
        elif words[0] == "isolate" and len(words) == 3:
            out.append(IsolationReq(check_tc(words[1], lineno),
                                    check_tc(words[2], lineno)))
        elif words[0] == "loopfree" and len(words) == 1:
            out.append(LoopFreeReq())
        else:
            raise NetworkError(f"line {lineno}: cannot parse requirement {line!r}")
    return tuple(out)


def uses_reach(requirements: Iterable) -> bool:
    return any(isinstance(r, (ReachReq, LoopFreeReq)) for r in requirements)


def add_reach_rules(program: Program) -> Program:
    """Append the transitive closure of Fwd as a derived predicate.

    Reach depends on Fwd only positively, so the stratification is
    unchanged; Reach lands in the same stratum as Fwd."""
    if "Reach" in program.signatures:
        raise NetworkError("program already declares Reach")
    n, x, y, z = Var("NET"), Var("X"), Var("Y"), Var("Z")
    sig = dict(program.signatures)
    sig["Reach"] = PredicateSignature("Reach", ("net", "router", "router"), "idb")
    rules = list(program.rules) + [
        Rule(Atom("Reach", (n, x, y)), (Literal(Atom("Fwd", (n, x, y))),)),
        Rule(Atom("Reach", (n, x, y)), (Literal(Atom("Fwd", (n, x, z))),
                                        Literal(Atom("Reach", (n, z, y))))),
    ]
    return replace(program, signatures=sig, rules=tuple(rules))


def compile_requirements(requirements: Sequence, topology: Topology) -> Constraint:
    """The conjunction of all requirements as a ground constraint over Fwd
    (and Reach, when `uses_reach` holds)."""
    routers = sorted(topology.routers)
    nets = topology.networks
    conjuncts = []
    for req in requirements:
        if isinstance(req, PathReq):
            for a, b in zip(req.route, req.route[1:]):
                conjuncts.append(CAtom(ground_atom("Fwd", req.tc, a, b)))
            for a, b in zip(req.route, req.route[1:]):
                for other in routers:
                    if other != b:
                        conjuncts.append(CNot(CAtom(
                            ground_atom("Fwd", req.tc, a, other))))
        elif isinstance(req, ReachReq):
            conjuncts.append(CAtom(ground_atom("Reach", req.tc, req.src, req.dst)))
        elif isinstance(req, IsolationReq):
            for a in routers:
                for b in routers:
                    conjuncts.append(cor(
                        CNot(CAtom(ground_atom("Fwd", req.tc1, a, b))),
                        CNot(CAtom(ground_atom("Fwd", req.tc2, a, b)))))
        elif isinstance(req, LoopFreeReq):
            for tc in nets:
                for r in routers:
                    conjuncts.append(CNot(CAtom(ground_atom("Reach", tc, r, r))))
        else:
            raise NetworkError(f"unknown requirement {req!r}")
    return cand(*conjuncts)


def check_requirements(model: Iterable[Atom], requirements: Sequence,
                       topology: Topology) -> tuple:
    """The subset of requirements a fixed point violates (with Reach atoms
    present when any requirement needs them)."""
    model = frozenset(model)
    violated = []
    for req in requirements:
        c = compile_requirements([req], topology)
        from .constraints import holds

        domains = {}  # the constraint is ground, no domains needed
        if not holds(model, c, domains):
            violated.append(req)
    return tuple(violated)
