"""The declarative network specification as a stratified Datalog program.

The program combines protocol route computation (OSPF shortest paths, BGP
egress selection, static entries) through administrative distance into the
forwarding relation Fwd(TC, Router, NextHop). Topology facts (SetLink,
SetNetwork, AnnBGP, RouterLt) are fixed; the free edb predicates
(SetOSPFEdgeCost, SetStatic, SetAD, SetBGPLocalPref) are the synthesis
targets and correspond one-to-one to router configuration lines.
"""
from __future__ import annotations

import itertools
from dataclasses import dataclass, field, replace
from typing import Iterable, Mapping, Optional

from ..constraints import CAtom, CNot, Constraint, cand, cor
from ..datalog import (
    Aggregate,
    Atom,
    Comparison,
    Const,
    EnumSort,
    IntSort,
    Literal,
    PredicateSignature,
    Program,
    Rule,
    SumEq,
    Var,
    evaluate,
    ground_atom,
    stratify,
)
from .topology import NetworkError, ProtocolSuite, Topology

FIXED_PREDICATES = ("SetLink", "SetNetwork", "AnnBGP", "RouterLt")
FREE_PREDICATES = ("SetOSPFEdgeCost", "SetStatic", "SetAD", "SetBGPLocalPref")


@dataclass(frozen=True)
class NetworkProgram:
    program: Program
    topology: Topology
    suite: ProtocolSuite
    fixed_facts: frozenset  # ground atoms baked in by the topology
    free_edb: frozenset  # predicate names the synthesizer must choose
    pinned_atoms: frozenset  # operator-forced atoms over free edb predicates
    expected_strata: int
    cost_bound: int
    max_weight: int
    pref_bound: int

    @property
    def fixed_predicates(self) -> frozenset:
        return frozenset(a.pred for a in self.fixed_facts)

    def interpretation(self, free_input: Iterable[Atom]) -> frozenset:
        """The full edb interpretation: synthesized input plus topology."""
        return frozenset(free_input) | self.fixed_facts

    def model(self, free_input: Iterable[Atom]) -> frozenset:
        return evaluate(self.program, self.interpretation(free_input))


def _v(name: str) -> Var:
    return Var(name)


def _lit(pred: str, *terms, positive: bool = True) -> Literal:
    args = tuple(t if isinstance(t, (Var, Const)) else Const(t) for t in terms)
    return Literal(Atom(pred, args), positive=positive)


def _head(pred: str, *terms) -> Atom:
    args = tuple(t if isinstance(t, (Var, Const)) else Const(t) for t in terms)
    return Atom(pred, args)


def build_network_program(topology: Topology, suite: ProtocolSuite,
                          cost_bound: Optional[int] = None, *,
                          max_weight: int = 3,
                          pref_bound: int = 4) -> NetworkProgram:
    """Assemble the stratified network program for a topology and suite.

    With all three protocols enabled the program stratifies into exactly 8
    strata; the negations that split them are the min/max aggregate
    eliminations plus the beaten-protocol filter under Fwd.
    """
    if max_weight < 1:
        raise NetworkError("max_weight must be at least 1")
    if cost_bound is None:
        cost_bound = 2 * len(topology.routers) * max_weight
    if cost_bound < max_weight:
        # callers evaluating a pinned configuration may pass bounds tighter
        # than routers x max_weight, as long as true distances still fit
        raise NetworkError(
            "cost_bound below max_weight cannot hold any path cost")
    ospf = "ospf" in suite.enabled
    bgp = "bgp" in suite.enabled
    static = "static" in suite.enabled
    pins = dict(topology.pins)
    if pins and not bgp:
        raise NetworkError("bgp-pref pins require the bgp protocol")
    if pins:
        pref_bound = max(pref_bound, max(pins.values()))

    sorts = {
        "router": EnumSort("router", tuple(sorted(topology.routers))),
        "net": EnumSort("net", topology.networks),
        "proto": EnumSort("proto", suite.ordered),
        "cost": IntSort("cost", 1, cost_bound),
        "ad": IntSort("ad", 1, 3),
        "pref": IntSort("pref", 1, pref_bound),
    }

    sig = {}

    def declare(name: str, arg_sorts: tuple, role: str) -> None:
        sig[name] = PredicateSignature(name, arg_sorts, role)

    declare("SetLink", ("router", "router"), "edb")
    declare("SetNetwork", ("router", "net"), "edb")
    declare("SetAD", ("proto", "router", "ad"), "edb")
    declare("Route", ("net", "router", "router", "proto"), "idb")
    declare("minAD", ("net", "router", "ad"), "idb")
    declare("adExceeded", ("net", "router", "proto"), "idb")
    declare("Connected", ("net", "router"), "idb")
    declare("Fwd", ("net", "router", "router"), "idb")
    if ospf:
        declare("SetOSPFEdgeCost", ("router", "router", "cost"), "edb")
        declare("OSPFRoute", ("net", "router", "router", "cost"), "idb")
        declare("minCost", ("net", "router", "cost"), "idb")
        declare("BestOSPFRoute", ("net", "router", "router"), "idb")
    if static:
        declare("SetStatic", ("net", "router", "router"), "edb")
    if bgp:
        declare("AnnBGP", ("net", "router"), "edb")
        declare("RouterLt", ("router", "router"), "edb")
        declare("SetBGPLocalPref", ("net", "router", "pref"), "edb")
        declare("RRoute", ("router", "router", "router", "cost"), "idb")
        declare("minRCost", ("router", "router", "cost"), "idb")
        declare("BestRRoute", ("router", "router", "router"), "idb")
        declare("maxPref", ("net", "pref"), "idb")
        declare("prefEgress", ("net", "router"), "idb")
        declare("bestEgD", ("net", "router", "cost"), "idb")
        declare("candEg", ("net", "router", "router"), "idb")
        declare("lowEg", ("net", "router", "router"), "idb")
        declare("chosenEg", ("net", "router", "router"), "idb")
        declare("BGPRoute", ("net", "router", "router"), "idb")

    net, r, nh, dst, g, g2, r2, p = map(_v, "NET R NH DST G G2 R2 P".split())
    c, c1, c2, w = map(_v, "C C1 C2 W".split())
    rules = []
    if ospf:
        rules.append(Rule(_head("OSPFRoute", net, r, dst, c),
                          (_lit("SetNetwork", dst, net), _lit("SetLink", r, dst),
                           _lit("SetOSPFEdgeCost", r, dst, c))))
        rules.append(Rule(_head("OSPFRoute", net, r, nh, c),
                          (_lit("SetLink", r, nh),
                           _lit("SetOSPFEdgeCost", r, nh, c1),
                           _lit("OSPFRoute", net, nh, r2, c2),
                           SumEq(c, c1, c2))))
    if bgp:
        rules.append(Rule(_head("RRoute", dst, r, dst, c),
                          (_lit("SetLink", r, dst),
                           _lit("SetOSPFEdgeCost", r, dst, c))))
        rules.append(Rule(_head("RRoute", dst, r, nh, c),
                          (_lit("SetLink", r, nh),
                           _lit("SetOSPFEdgeCost", r, nh, c1),
                           _lit("RRoute", dst, nh, r2, c2),
                           SumEq(c, c1, c2))))
    if ospf:
        rules.append(Rule(_head("BestOSPFRoute", net, r, nh),
                          (_lit("minCost", net, r, c),
                           _lit("OSPFRoute", net, r, nh, c))))
    if bgp:
        rules.append(Rule(_head("BestRRoute", dst, r, nh),
                          (_lit("minRCost", dst, r, c),
                           _lit("RRoute", dst, r, nh, c))))
        rules.append(Rule(_head("prefEgress", net, g),
                          (_lit("AnnBGP", net, g),
                           _lit("SetBGPLocalPref", net, g, _v("PR")),
                           _lit("maxPref", net, _v("PR")))))
        rules.append(Rule(_head("candEg", net, r, g),
                          (_lit("prefEgress", net, g),
                           _lit("minRCost", g, r, c),
                           _lit("bestEgD", net, r, c))))
        rules.append(Rule(_head("lowEg", net, r, g),
                          (_lit("candEg", net, r, g),
                           _lit("candEg", net, r, g2),
                           _lit("RouterLt", g2, g))))
        rules.append(Rule(_head("chosenEg", net, r, g),
                          (_lit("candEg", net, r, g),
                           _lit("lowEg", net, r, g, positive=False))))
        rules.append(Rule(_head("BGPRoute", net, r, nh),
                          (_lit("chosenEg", net, r, g),
                           _lit("BestRRoute", g, r, nh))))
    if static:
        rules.append(Rule(_head("Route", net, r, nh, "static"),
                          (_lit("SetStatic", net, r, nh),)))
    if ospf:
        rules.append(Rule(_head("Route", net, r, nh, "ospf"),
                          (_lit("BestOSPFRoute", net, r, nh),)))
    if bgp:
        rules.append(Rule(_head("Route", net, r, nh, "bgp"),
                          (_lit("BGPRoute", net, r, nh),)))
    rules.append(Rule(_head("Connected", net, r), (_lit("SetNetwork", r, net),)))
    rules.append(Rule(_head("adExceeded", net, r, p),
                      (_lit("Route", net, r, nh, p), _lit("SetAD", p, r, c),
                       _lit("minAD", net, r, c2), Comparison("<", c2, c))))
    rules.append(Rule(_head("Fwd", net, r, nh),
                      (_lit("Route", net, r, nh, p), _lit("SetAD", p, r, c),
                       _lit("minAD", net, r, c),
                       _lit("adExceeded", net, r, p, positive=False),
                       _lit("Connected", net, r, positive=False))))
    # aggregate rules last, so their expansions keep the plain rules' order
    if ospf:
        rules.append(Rule(_head("minCost", net, r, c),
                          (_lit("OSPFRoute", net, r, nh, c),),
                          aggregate=Aggregate("min", "C", 2)))
    if bgp:
        rules.append(Rule(_head("minRCost", dst, r, c),
                          (_lit("RRoute", dst, r, nh, c),),
                          aggregate=Aggregate("min", "C", 2)))
        rules.append(Rule(_head("maxPref", net, _v("PR")),
                          (_lit("AnnBGP", net, g),
                           _lit("SetBGPLocalPref", net, g, _v("PR"))),
                          aggregate=Aggregate("max", "PR", 1)))
        rules.append(Rule(_head("bestEgD", net, r, c),
                          (_lit("prefEgress", net, g), _lit("minRCost", g, r, c)),
                          aggregate=Aggregate("min", "C", 2)))
    rules.append(Rule(_head("minAD", net, r, c),
                      (_lit("Route", net, r, nh, p), _lit("SetAD", p, r, c)),
                      aggregate=Aggregate("min", "C", 2)))

    program = Program(signatures=sig, rules=tuple(rules), sorts=sorts)

    fixed = set()
    for a, b in topology.directed_links():
        fixed.add(ground_atom("SetLink", a, b))
    for name, attached in topology.internal.items():
        fixed.add(ground_atom("SetNetwork", attached, name))
    if bgp:
        for name, announcers in topology.external.items():
            for ann in announcers:
                fixed.add(ground_atom("AnnBGP", name, ann))
        for a, b in itertools.combinations(sorted(topology.routers), 2):
            fixed.add(ground_atom("RouterLt", a, b))

    pinned = frozenset(ground_atom("SetBGPLocalPref", name, router, pref)
                       for (name, router), pref in pins.items())
    free = {"SetAD"}
    if ospf:
        free.add("SetOSPFEdgeCost")
    if static:
        free.add("SetStatic")
    if bgp:
        all_pairs = {(name, ann) for name, anns in topology.external.items()
                     for ann in anns}
        if pins and set(pins) == all_pairs:
            fixed |= pinned  # fully pinned: the predicate is known apriori
        else:
            free.add("SetBGPLocalPref")

    return NetworkProgram(
        program=program, topology=topology, suite=suite,
        fixed_facts=frozenset(fixed), free_edb=frozenset(free),
        pinned_atoms=pinned, expected_strata=8 if bgp else 4 if ospf else 3,
        cost_bound=cost_bound, max_weight=max_weight, pref_bound=pref_bound)


# -- partial evaluation --------------------------------------------------------

def _known_closure(program: Program, fixed_predicates: frozenset) -> frozenset:
    """Predicates whose extension is independent of the free input: the fixed
    edb plus every idb derivable from known predicates alone."""
    known = set(fixed_predicates)
    heads = {}
    for rule in program.rules:
        heads.setdefault(rule.head.pred, []).append(rule)
    changed = True
    while changed:
        changed = False
        for pred, rules in heads.items():
            if pred in known:
                continue
            deps = {lit.atom.pred for rule in rules for lit in rule.body_literals()}
            if deps <= known:
                known.add(pred)
                changed = True
    return frozenset(known)


def _join_known(program: Program, items, extension: frozenset, env: dict):
    """All substitutions extending env that satisfy the known body items."""
    if not items:
        yield env
        return
    item, rest = items[0], items[1:]
    atom = item.atom
    if item.positive:
        for fact in extension:
            if fact.pred != atom.pred:
                continue
            new = dict(env)
            ok = True
            for pattern, value in zip(atom.args, fact.args):
                if isinstance(pattern, Const):
                    ok = pattern == value
                elif pattern.name in new:
                    ok = new[pattern.name] == value
                else:
                    new[pattern.name] = value
                if not ok:
                    break
            if ok:
                yield from _join_known(program, rest, extension, new)
        return
    unbound = [t.name for t in atom.args if isinstance(t, Var) and t.name not in env]
    sorts = {t.name: program.sort_of(atom.pred, i)
             for i, t in enumerate(atom.args) if isinstance(t, Var)}
    for values in itertools.product(*[sorts[name].domain() for name in unbound]):
        new = dict(env)
        new.update({name: Const(v) for name, v in zip(unbound, values)})
        grounded = Atom(atom.pred, tuple(t if isinstance(t, Const) else new[t.name]
                                         for t in atom.args))
        if grounded not in extension:
            yield from _join_known(program, rest, extension, new)


def _substitute(term, env: dict):
    if isinstance(term, Var) and term.name in env:
        return env[term.name]
    return term


def _subst_item(item, env: dict):
    if isinstance(item, Literal):
        return Literal(Atom(item.atom.pred,
                            tuple(_substitute(t, env) for t in item.atom.args)),
                       positive=item.positive)
    if isinstance(item, Comparison):
        return Comparison(item.op, _substitute(item.left, env),
                          _substitute(item.right, env))
    return SumEq(_substitute(item.result, env), _substitute(item.left, env),
                 _substitute(item.right, env))


def partial_evaluate(np: NetworkProgram) -> NetworkProgram:
    """Resolve body literals over predicates known apriori.

    Known predicates are the fixed topology facts plus idb predicates
    derivable from them alone (e.g. Connected). Rules are specialized per
    matching fact; rules whose known part cannot be satisfied are dropped;
    known idb predicates keep their extension as fact rules so fixed points
    are unchanged for every input over the free edb.
    """
    program = np.program
    known = _known_closure(program, np.fixed_predicates)
    if not known:
        return np
    extension = evaluate(program, np.fixed_facts)
    new_rules = []
    for rule in program.rules:
        if rule.head.pred in known:
            continue  # replaced by fact rules below
        known_items = [it for it in rule.body
                       if isinstance(it, Literal) and it.atom.pred in known]
        rest = [it for it in rule.body
                if not (isinstance(it, Literal) and it.atom.pred in known)]
        if not known_items:
            new_rules.append(rule)
            continue
        positives = [it for it in known_items if it.positive]
        negatives = [it for it in known_items if not it.positive]
        for env in _join_known(program, positives + negatives, extension, {}):
            head = Atom(rule.head.pred,
                        tuple(_substitute(t, env) for t in rule.head.args))
            new_rules.append(Rule(head, tuple(_subst_item(it, env) for it in rest),
                                  aggregate=rule.aggregate))
    for pred in sorted(known - np.fixed_predicates):
        for fact in sorted((a for a in extension if a.pred == pred), key=str):
            new_rules.append(Rule(fact, ()))
    return replace(np, program=program.with_rules(new_rules))


# -- requirement-independent constraints ---------------------------------------

def _exactly_one(atoms: list) -> list:
    out = [cor(*[CAtom(a) for a in atoms])]
    for a, b in itertools.combinations(atoms, 2):
        out.append(cor(CNot(CAtom(a)), CNot(CAtom(b))))
    return out


def _at_most_one(atoms: list) -> list:
    return [cor(CNot(CAtom(a)), CNot(CAtom(b)))
            for a, b in itertools.combinations(atoms, 2)]


def config_wf_constraints(topology: Topology, suite: ProtocolSuite, *,
                          max_weight: int, edge_domain_hi: int,
                          pref_bound: int,
                          pins: Mapping[tuple[str, str], int]) -> list:
    """Well-formedness of configurations, as a flat list of ground conjuncts
    over the free edb predicates only.

    edge_domain_hi is the upper bound of SetOSPFEdgeCost's declared integer
    sort (the reference program reuses the cost sort; the solver-facing model
    uses a dedicated weight sort), so absent-value conjuncts cover it."""
    out = []
    routers = sorted(topology.routers)
    protocols = suite.ordered
    for router in routers:
        per_proto = {}
        for proto in protocols:
            atoms = [ground_atom("SetAD", proto, router, a) for a in range(1, 4)]
            out.extend(_exactly_one(atoms))
            per_proto[proto] = atoms
        for pa, pb in itertools.combinations(protocols, 2):
            for a in range(1, 4):
                out.append(cor(CNot(CAtom(per_proto[pa][a - 1])),
                               CNot(CAtom(per_proto[pb][a - 1]))))
    if "ospf" in suite.enabled:
        linked = set(topology.directed_links())
        for a, b in itertools.product(routers, routers):
            if (a, b) in linked:
                out.extend(_exactly_one(
                    [ground_atom("SetOSPFEdgeCost", a, b, w)
                     for w in range(1, max_weight + 1)]))
                absent_from = max_weight + 1
            else:
                absent_from = 1
            for w in range(absent_from, edge_domain_hi + 1):
                out.append(CNot(CAtom(ground_atom("SetOSPFEdgeCost", a, b, w))))
    if "static" in suite.enabled:
        for net in topology.networks:
            for router in routers:
                neighbors = topology.neighbors(router)
                out.extend(_at_most_one(
                    [ground_atom("SetStatic", net, router, nbr)
                     for nbr in neighbors]))
                for other in routers:
                    if other not in neighbors:
                        out.append(CNot(CAtom(
                            ground_atom("SetStatic", net, router, other))))
    if "bgp" in suite.enabled:
        for net in topology.networks:
            announcers = topology.external.get(net, ())
            for router in routers:
                if router in announcers:
                    out.extend(_exactly_one(
                        [ground_atom("SetBGPLocalPref", net, router, v)
                         for v in range(1, pref_bound + 1)]))
                else:
                    for v in range(1, pref_bound + 1):
                        out.append(CNot(CAtom(
                            ground_atom("SetBGPLocalPref", net, router, v))))
        for (net, router), pref in sorted(pins.items()):
            out.append(CAtom(ground_atom("SetBGPLocalPref", net, router, pref)))
    return out


def directly_connected_constraints(topology: Topology) -> list:
    """No packet leaves a router whose destination network is attached to it."""
    out = []
    for net, attached in sorted(topology.internal.items()):
        for other in sorted(topology.routers):
            out.append(CNot(CAtom(ground_atom("Fwd", net, attached, other))))
    return out


def network_domain_constraints(np: NetworkProgram) -> Constraint:
    """Requirement-independent constraints: the directly-connected rule plus
    configuration well-formedness. Returned as a flat conjunction; each
    conjunct mentions either only free edb predicates or only Fwd."""
    pins = {} if "SetBGPLocalPref" not in np.free_edb else dict(np.topology.pins)
    conjuncts = directly_connected_constraints(np.topology)
    conjuncts += config_wf_constraints(
        np.topology, np.suite, max_weight=np.max_weight,
        edge_domain_hi=np.cost_bound, pref_bound=np.pref_bound, pins=pins)
    conjuncts = [c for c in conjuncts
                 if _predicates_of(c) <= np.free_edb | {"Fwd"}]
    return cand(*conjuncts)


def _predicates_of(c: Constraint) -> set:
    from ..synthesis import _constraint_predicates

    return _constraint_predicates(c)


def check_strata(np: NetworkProgram) -> int:
    """The stratum count of the (aggregate-eliminated) program."""
    from ..datalog import eliminate_min_aggregates

    return len(stratify(eliminate_min_aggregates(np.program)).strata)
