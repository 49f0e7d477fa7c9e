"""A solver-friendly, recursion-free reformulation of the network program.

Stratified synthesis over the full protocol stack must pin the entire OSPF
cost closure across stratum boundaries, which free guesses essentially never
reproduce. This module instead makes the per-destination distance relations
(OSPFDist, RDist) free edb predicates constrained by Bellman optimality:
functional, upper-bounded by every edge relaxation, and supported by some
edge. With strictly positive weights that system has a unique solution equal
to the true shortest distances, so the model derives exactly the forwarding
relation of the reference program. All rules are positive, the program is a
single semi-positive stratum, and no backtracking is needed. Every synthesis
result is re-verified against the reference program by the caller.
"""
from __future__ import annotations

import itertools
from dataclasses import dataclass

from ..constraints import CAtom, CNot, Constraint, cand, cor
from ..datalog import (
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
    ground_atom,
)
from ..smt.formula import CImplies
from .model import NetworkProgram, config_wf_constraints, \
    directly_connected_constraints
from .topology import Topology

AUX_PREDICATES = ("OSPFDist", "RDist", "PrefEgress", "ChosenEg", "BestProto")


@dataclass(frozen=True)
class DirectModel:
    """The synthesis-facing program plus its constraint split.

    `side` conjuncts mention only edb predicates and skip CNF conversion;
    `goal` conjuncts (protocol-selection linkage, directly-connected rule)
    mention idb predicates and join the requirements constraint."""

    program: Program
    side: tuple
    goal: tuple
    free_edb: frozenset  # the real configuration predicates


def _v(name: str) -> Var:
    return Var(name)


def _lit(pred: str, *terms) -> Literal:
    args = tuple(t if isinstance(t, (Var, Const)) else Const(t) for t in terms)
    return Literal(Atom(pred, args))


def _head(pred: str, *terms) -> Atom:
    args = tuple(t if isinstance(t, (Var, Const)) else Const(t) for t in terms)
    return Atom(pred, args)


def _edge(r: str, nh: str, w: int) -> Atom:
    return ground_atom("SetOSPFEdgeCost", r, nh, w)


def _reachers(topology: Topology, target: str) -> frozenset:
    """Routers with a walk of length >= 1 to the target (the target itself
    reaches it through a neighbor loop, when it has any link)."""
    if not topology.neighbors(target):
        return frozenset()
    return topology.component(target)


def _distance_constraints(out: list, topology: Topology, pred: str,
                          prefix: tuple, target: str, max_weight: int,
                          bound: int) -> None:
    """Bellman optimality for D = `pred`(prefix, Router, Cost) wrt `target`:
    with positive weights the unique solution is the shortest walk distance."""

    def d(r: str, c: int) -> Atom:
        return Atom(pred, prefix + (Const(r), Const(c)))

    reachers = _reachers(topology, target)
    for r in sorted(topology.routers):
        if r not in reachers:
            for c in range(1, bound + 1):
                out.append(CNot(CAtom(d(r, c))))
            continue
        out.append(cor(*[CAtom(d(r, c)) for c in range(1, bound + 1)]))
        for c, c2 in itertools.combinations(range(1, bound + 1), 2):
            out.append(cor(CNot(CAtom(d(r, c))), CNot(CAtom(d(r, c2)))))
        neighbors = [nh for nh in topology.neighbors(r) if nh in reachers]
        if topology.has_link(r, target):
            for w in range(1, max_weight + 1):
                out.append(CImplies(
                    CAtom(_edge(r, target, w)),
                    cor(*[CAtom(d(r, c)) for c in range(1, w + 1)])))
        for nh in neighbors:
            for w in range(1, max_weight + 1):
                for c2 in range(1, bound - w + 1):
                    out.append(CImplies(
                        cand(CAtom(_edge(r, nh, w)), CAtom(d(nh, c2))),
                        cor(*[CAtom(d(r, c)) for c in range(1, w + c2 + 1)])))
        for c in range(1, bound + 1):
            support = []
            if topology.has_link(r, target) and c <= max_weight:
                support.append(CAtom(_edge(r, target, c)))
            for nh in neighbors:
                for w in range(1, min(max_weight, c - 1) + 1):
                    support.append(cand(CAtom(_edge(r, nh, w)),
                                        CAtom(d(nh, c - w))))
            out.append(CImplies(CAtom(d(r, c)), cor(*support)))


def _egress_constraints(out: list, topology: Topology, bound: int,
                        pref_bound: int) -> None:
    """BGP selection: PrefEgress is the set of announcers with maximal local
    preference; ChosenEg picks, per router, the reachable preferred egress
    with minimal OSPF distance, ties broken by smaller router name."""
    routers = sorted(topology.routers)
    announcers_of = {net: tuple(sorted(anns))
                     for net, anns in topology.external.items()}
    for net in topology.networks:
        announcers = announcers_of.get(net, ())

        def pref(g: str, p: int) -> Atom:
            return ground_atom("SetBGPLocalPref", net, g, p)

        for g in routers:
            if g not in announcers:
                out.append(CNot(CAtom(ground_atom("PrefEgress", net, g))))
                for r in routers:
                    out.append(CNot(CAtom(ground_atom("ChosenEg", net, r, g))))
        for g in announcers:
            chosen_atom = ground_atom("PrefEgress", net, g)
            others = [g2 for g2 in announcers if g2 != g]
            for g2 in others:
                for p, p2 in itertools.product(range(1, pref_bound + 1), repeat=2):
                    if p < p2:
                        out.append(cor(CNot(CAtom(pref(g, p))),
                                       CNot(CAtom(pref(g2, p2))),
                                       CNot(CAtom(chosen_atom))))
            for p in range(1, pref_bound + 1):
                beaten = [CAtom(pref(g2, p2)) for g2 in others
                          for p2 in range(p + 1, pref_bound + 1)]
                out.append(cor(CNot(CAtom(pref(g, p))), CAtom(chosen_atom),
                               *beaten))
        for r in routers:
            reachable = [g for g in announcers if r in _reachers(topology, g)]

            def chosen(g: str) -> Atom:
                return ground_atom("ChosenEg", net, r, g)

            def rdist(g: str, c: int) -> Atom:
                return ground_atom("RDist", g, r, c)

            for g in set(announcers) - set(reachable):
                out.append(CNot(CAtom(chosen(g))))
            for g, g2 in itertools.combinations(reachable, 2):
                out.append(cor(CNot(CAtom(chosen(g))), CNot(CAtom(chosen(g2)))))
            for g in reachable:
                out.append(CImplies(
                    CAtom(ground_atom("PrefEgress", net, g)),
                    cor(*[CAtom(chosen(g2)) for g2 in reachable])))
            for g, g2 in itertools.permutations(reachable, 2):
                for c, c2 in itertools.product(range(1, bound + 1), repeat=2):
                    if c2 < c or (c2 == c and g2 < g):
                        out.append(cor(
                            CNot(CAtom(chosen(g))),
                            CNot(CAtom(ground_atom("PrefEgress", net, g2))),
                            CNot(CAtom(rdist(g, c))),
                            CNot(CAtom(rdist(g2, c2)))))


def _protocol_selection(topology: Topology, protocols: tuple) -> list:
    """BestProto must be the unique available protocol with minimal
    administrative distance; mentions the idb HasRoute, so it joins the
    requirements constraint rather than the side constraints."""
    out = []
    for net in topology.networks:
        for r in sorted(topology.routers):
            def best(p: str) -> Atom:
                return ground_atom("BestProto", net, r, p)

            def has(p: str) -> Atom:
                return ground_atom("HasRoute", net, r, p)

            for p, p2 in itertools.combinations(protocols, 2):
                out.append(cor(CNot(CAtom(best(p))), CNot(CAtom(best(p2)))))
            for p in protocols:
                out.append(cor(CNot(CAtom(best(p))), CAtom(has(p))))
                out.append(cor(CNot(CAtom(has(p))),
                               *[CAtom(best(p2)) for p2 in protocols]))
            for p, p2 in itertools.permutations(protocols, 2):
                for a, a2 in itertools.product(range(1, 4), repeat=2):
                    if a < a2:
                        out.append(cor(
                            CNot(CAtom(has(p))),
                            CNot(CAtom(ground_atom("SetAD", p, r, a))),
                            CNot(CAtom(ground_atom("SetAD", p2, r, a2))),
                            CNot(CAtom(best(p2)))))
    return out


def build_direct_model(np: NetworkProgram) -> DirectModel:
    topology, suite = np.topology, np.suite
    ospf = "ospf" in suite.enabled
    bgp = "bgp" in suite.enabled
    static = "static" in suite.enabled
    bound = np.cost_bound
    sorts = {
        "router": EnumSort("router", tuple(sorted(topology.routers))),
        "net": EnumSort("net", topology.networks),
        "proto": EnumSort("proto", suite.ordered),
        "weight": IntSort("weight", 1, np.max_weight),
        "cost": IntSort("cost", 1, bound),
        "ad": IntSort("ad", 1, 3),
        "pref": IntSort("pref", 1, np.pref_bound),
    }
    sig = {}

    def declare(name: str, arg_sorts: tuple, role: str) -> None:
        sig[name] = PredicateSignature(name, arg_sorts, role)

    declare("SetAD", ("proto", "router", "ad"), "edb")
    declare("BestProto", ("net", "router", "proto"), "edb")
    declare("AtRouter", ("net", "router"), "edb")
    declare("Route", ("net", "router", "router", "proto"), "idb")
    declare("HasRoute", ("net", "router", "proto"), "idb")
    declare("Fwd", ("net", "router", "router"), "idb")
    if ospf:
        declare("SetOSPFEdgeCost", ("router", "router", "weight"), "edb")
        declare("OSPFDist", ("net", "router", "cost"), "edb")
        declare("BestOSPFRoute", ("net", "router", "router"), "idb")
    if static:
        declare("SetStatic", ("net", "router", "router"), "edb")
    if bgp:
        declare("SetBGPLocalPref", ("net", "router", "pref"), "edb")
        declare("RDist", ("router", "router", "cost"), "edb")
        declare("PrefEgress", ("net", "router"), "edb")
        declare("ChosenEg", ("net", "router", "router"), "edb")
        declare("BGPRoute", ("net", "router", "router"), "idb")

    net, r, nh, g, p = map(_v, "NET R NH G P".split())
    w0, c0, c2 = map(_v, "W0 C0 C2".split())
    rules = []
    if ospf:
        # direct hop onto the attached router, or a strict Bellman descent;
        # OSPFDist is pinned false for external nets and unreachable routers
        rules.append(Rule(
            _head("BestOSPFRoute", net, r, nh),
            (_lit("AtRouter", net, nh),
             _lit("SetOSPFEdgeCost", r, nh, w0),
             _lit("OSPFDist", net, r, c0),
             Comparison("=", c0, w0))))
        rules.append(Rule(
            _head("BestOSPFRoute", net, r, nh),
            (_lit("SetOSPFEdgeCost", r, nh, w0),
             _lit("OSPFDist", net, nh, c2),
             _lit("OSPFDist", net, r, c0),
             SumEq(c0, w0, c2))))
    if bgp:
        rules.append(Rule(
            _head("BGPRoute", net, r, nh),
            (_lit("ChosenEg", net, r, nh),
             _lit("SetOSPFEdgeCost", r, nh, w0),
             _lit("RDist", nh, r, c0),
             Comparison("=", c0, w0))))
        rules.append(Rule(
            _head("BGPRoute", net, r, nh),
            (_lit("ChosenEg", net, r, g),
             _lit("SetOSPFEdgeCost", r, nh, w0),
             _lit("RDist", g, nh, c2),
             _lit("RDist", g, r, c0),
             SumEq(c0, w0, c2))))
    if static:
        rules.append(Rule(_head("Route", net, r, nh, "static"),
                          (_lit("SetStatic", net, r, nh),)))
    if ospf:
        rules.append(Rule(_head("Route", net, r, nh, "ospf"),
                          (_lit("BestOSPFRoute", net, r, nh),)))
    if bgp:
        rules.append(Rule(_head("Route", net, r, nh, "bgp"),
                          (_lit("BGPRoute", net, r, nh),)))
    rules.append(Rule(_head("HasRoute", net, r, p),
                      (_lit("Route", net, r, nh, p),)))
    rules.append(Rule(_head("Fwd", net, r, nh),
                      (_lit("Route", net, r, nh, p),
                       _lit("BestProto", net, r, p),
                       Literal(Atom("AtRouter", (net, r)), positive=False))))

    side: list[Constraint] = []
    for name in topology.networks:
        for router in sorted(topology.routers):
            atom = CAtom(ground_atom("AtRouter", name, router))
            side.append(atom if topology.internal.get(name) == router
                        else CNot(atom))
    pins = {} if "SetBGPLocalPref" not in np.free_edb else dict(topology.pins)
    side.extend(c for c in config_wf_constraints(
        topology, suite, max_weight=np.max_weight,
        edge_domain_hi=np.max_weight, pref_bound=np.pref_bound, pins=pins)
        if _mentioned(c) <= set(sig))
    if not pins and "SetBGPLocalPref" not in np.free_edb and bgp:
        # fully pinned preferences are fixed facts, not free edb: force them
        side.extend(CAtom(a) for a in sorted(np.fixed_facts, key=str)
                    if a.pred == "SetBGPLocalPref")
    if ospf:
        for name in topology.networks:
            attached = topology.internal.get(name)
            if attached is None:  # external nets have no OSPF destination
                for router in sorted(topology.routers):
                    for cost in range(1, bound + 1):
                        side.append(CNot(CAtom(
                            ground_atom("OSPFDist", name, router, cost))))
                continue
            _distance_constraints(side, topology, "OSPFDist", (Const(name),),
                                  attached, np.max_weight, bound)
    if bgp:
        egresses = {eg for anns in topology.external.values() for eg in anns}
        for router in sorted(topology.routers):
            if router in egresses:
                _distance_constraints(side, topology, "RDist",
                                      (Const(router),), router,
                                      np.max_weight, bound)
            else:
                for r2 in sorted(topology.routers):
                    for cost in range(1, bound + 1):
                        side.append(CNot(CAtom(
                            ground_atom("RDist", router, r2, cost))))
        _egress_constraints(side, topology, bound, np.pref_bound)

    goal = directly_connected_constraints(topology)
    goal += _protocol_selection(topology, suite.ordered)

    program = Program(signatures=sig, rules=tuple(rules), sorts=sorts)
    return DirectModel(program=program, side=tuple(side), goal=tuple(goal),
                       free_edb=frozenset(np.free_edb))


def _mentioned(c: Constraint) -> set:
    from ..synthesis import _constraint_predicates

    return _constraint_predicates(c)
