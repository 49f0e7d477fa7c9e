"""Shared test oracles: brute-force input enumeration and random programs."""
import itertools
import random

from dlsynth.constraints import CAnd, CAtom, CNot, COr, holds
from dlsynth.datalog import (
    Atom,
    Const,
    Literal,
    PredicateSignature,
    Program,
    Rule,
    EnumSort,
    Var,
    consequence,
    evaluate,
    ground_atom,
    stratify,
)


def edb_universe(program):
    atoms = []
    for pred in sorted(program.edb_predicates()):
        atoms.extend(program.ground_atoms(pred))
    return atoms


def all_inputs(program):
    universe = edb_universe(program)
    for bits in itertools.product([0, 1], repeat=len(universe)):
        yield frozenset(a for a, b in zip(universe, bits) if b)


def fixpoint_steps(program, inp):
    """Number of consequence applications until the (single-stratum)
    fixed point stops changing."""
    current = frozenset(inp)
    steps = 0
    while True:
        nxt = consequence(program, current)
        if nxt == current:
            return steps
        current = nxt
        steps += 1


def satisfying_inputs(program, constraint):
    domains = dict(program.sorts)
    for inp in all_inputs(program):
        if holds(evaluate(program, inp), constraint, domains):
            yield inp


def random_semipos_program(rng: random.Random) -> Program:
    """A random semi-positive program: <= 3 predicates, <= 4 rules, <= 4 values."""
    nvals = rng.randint(2, 3)
    sort = EnumSort("s", tuple(f"c{i}" for i in range(nvals)))
    sigs = {
        "e": PredicateSignature("e", ("s",), "edb"),
        "f": PredicateSignature("f", ("s", "s"), "edb"),
        "p": PredicateSignature("p", ("s",), "idb"),
    }
    use_q = rng.random() < 0.5
    if use_q:
        sigs["q"] = PredicateSignature("q", ("s",), "idb")
    rules = []
    idbs = ["p"] + (["q"] if use_q else [])
    for _ in range(rng.randint(1, 4)):
        head_pred = rng.choice(idbs)
        x, y = Var("X"), Var("Y")
        body_choices = [
            (Literal(Atom("e", (x,))),),
            (Literal(Atom("f", (x, y))),),
            (Literal(Atom("f", (x, x))),),
            (Literal(Atom("f", (x, y))), Literal(Atom("e", (y,)))),
            (Literal(Atom("f", (x, y))), Literal(Atom("e", (y,)), positive=False)),
            (Literal(Atom("e", (x,))), Literal(Atom("f", (x, x)), positive=False)),
        ]
        if use_q and head_pred == "p":
            body_choices.append((Literal(Atom("q", (x,))),))
            body_choices.append((Literal(Atom("q", (x,))), Literal(Atom("e", (x,)))))
        if head_pred == "p":
            body_choices.append((Literal(Atom("p", (x,))), Literal(Atom("f", (x, y)), positive=False)))
        body = rng.choice(body_choices)
        rules.append(Rule(Atom(head_pred, (x,)), body))
    program = Program(signatures=sigs, rules=tuple(rules), sorts={"s": sort})
    # keep only programs that are a single semi-positive stratum
    if len(stratify(program).strata) != 1:
        return random_semipos_program(rng)
    return program


def random_ground_constraint(rng: random.Random, program: Program):
    """A small and/or/not tree over ground atoms of the program."""
    atoms = []
    for pred in sorted(program.signatures):
        atoms.extend(program.ground_atoms(pred))

    def leaf():
        a = CAtom(rng.choice(atoms))
        return CNot(a) if rng.random() < 0.5 else a

    def tree(depth):
        if depth == 0 or rng.random() < 0.3:
            return leaf()
        op = CAnd if rng.random() < 0.5 else COr
        return op((tree(depth - 1), tree(depth - 1)))

    return tree(2)


def random_stratified_program(rng: random.Random, max_strata: int = 3) -> Program:
    """A random 2-3 stratum program: negation between idb layers."""
    nvals = rng.randint(2, 3)
    sort = EnumSort("s", tuple(f"c{i}" for i in range(nvals)))
    sigs = {
        "e": PredicateSignature("e", ("s",), "edb"),
        "f": PredicateSignature("f", ("s", "s"), "edb"),
        "p": PredicateSignature("p", ("s",), "idb"),
        "q": PredicateSignature("q", ("s",), "idb"),
    }
    want = rng.randint(2, max_strata)
    if want == 3:
        sigs["r"] = PredicateSignature("r", ("s",), "idb")
    x, y = Var("X"), Var("Y")
    rules = [Rule(Atom("p", (x,)),
                  rng.choice([(Literal(Atom("e", (x,))),),
                              (Literal(Atom("f", (x, y))),),
                              (Literal(Atom("f", (x, x))),)]))]
    if rng.random() < 0.5:
        rules.append(Rule(Atom("p", (x,)),
                          (Literal(Atom("f", (x, y))), Literal(Atom("p", (y,))))))
    rules.append(Rule(Atom("q", (x,)),
                      rng.choice([(Literal(Atom("e", (x,))),
                                   Literal(Atom("p", (x,)), positive=False)),
                                  (Literal(Atom("f", (x, y))),
                                   Literal(Atom("p", (y,)), positive=False))])))
    if want == 3:
        rules.append(Rule(Atom("r", (x,)),
                          rng.choice([(Literal(Atom("e", (x,))),
                                       Literal(Atom("q", (x,)), positive=False)),
                                      (Literal(Atom("q", (x,)),
                                               positive=False),
                                       Literal(Atom("p", (x,))))])))
    program = Program(signatures=sigs, rules=tuple(rules), sorts={"s": sort})
    if len(stratify(program).strata) != want:
        return random_stratified_program(rng, max_strata)
    return program


# -- network oracles -------------------------------------------------------


def random_topology(rng: random.Random, max_routers: int = 6,
                    external: bool = False):
    """A random connected topology with one internal network (plus one
    external network with two announcers when requested)."""
    from dlsynth.network import Topology

    n = rng.randint(2 if not external else 3, max_routers)
    routers = tuple(chr(ord("A") + i) for i in range(n))
    links = set()
    order = list(routers)
    rng.shuffle(order)
    for a, b in zip(order, order[1:]):  # random spanning tree: connected
        links.add(frozenset({a, b}))
    for a, b in itertools.combinations(routers, 2):
        if rng.random() < 0.4:
            links.add(frozenset({a, b}))
    internal = {"N1": rng.choice(routers)}
    ext = {}
    if external:
        ext["Ext"] = tuple(sorted(rng.sample(routers, 2)))
    return Topology(routers, frozenset(links), internal, ext)


def random_weights(rng: random.Random, topology, max_weight: int = 3):
    """A random symmetric-domain (but independently directed) weight map."""
    return {(a, b): rng.randint(1, max_weight)
            for a, b in topology.directed_links()}


def shortest_distances(topology, weights, target):
    """d(r) = cost of the cheapest walk of length >= 1 from r to target
    (the target's own value is its cheapest loop), via networkx."""
    import networkx as nx

    graph = nx.DiGraph()
    graph.add_nodes_from(topology.routers)
    for (a, b), w in weights.items():
        graph.add_edge(a, b, weight=w)
    plain = nx.single_source_dijkstra_path_length(graph.reverse(copy=True),
                                                  target, weight="weight")
    dist = {r: c for r, c in plain.items() if r != target}
    loops = [weights[(target, nh)] + dist[nh]
             for nh in topology.neighbors(target) if nh in dist]
    if loops:
        dist[target] = min(loops)
    return dist


def best_next_hops(topology, weights, target):
    """Per router, the next hops on cheapest walks to the target."""
    dist = shortest_distances(topology, weights, target)
    out = {}
    for r in topology.routers:
        if r not in dist:
            continue
        hops = set()
        for nh in topology.neighbors(r):
            via = 0 if nh == target else dist.get(nh)
            if via is None:
                continue
            if weights[(r, nh)] + via == dist[r]:
                hops.add(nh)
        out[r] = hops
    return out
