"""Stratification via the predicate dependency graph.

Strata are computed from the condensation of the dependency graph: SCCs are
visited in topological order (ties broken by the first rule in which a
predicate appears as a head) and greedily merged into the current stratum;
a new stratum starts whenever an SCC negatively depends on a predicate of
the stratum under construction. The result is deterministic for a given
program and each stratum is semi-positive relative to its inputs.
"""
from __future__ import annotations

import heapq
from dataclasses import dataclass

from .ast import DatalogError, Literal, Program, Rule


class NotStratifiableError(DatalogError):
    def __init__(self, cycle: list[str]):
        super().__init__("negation cycle through predicates: " + " -> ".join(cycle))
        self.cycle = cycle


@dataclass(frozen=True)
class Stratum:
    program: Program  # sub-program: the stratum's rules with shared signatures/sorts
    edb: frozenset  # predicates this stratum consumes (program edb + lower idb)
    idb: frozenset  # predicates this stratum defines


@dataclass(frozen=True)
class Stratification:
    strata: tuple[Stratum, ...]

    def __len__(self) -> int:
        return len(self.strata)


def _dependencies(rule: Rule):
    for item in rule.body:
        if isinstance(item, Literal):
            yield item.atom.pred, item.positive


def stratify(program: Program) -> Stratification:
    heads = [r.head.pred for r in program.rules]
    head_set = set(heads)
    first_head_index = {}
    for idx, pred in enumerate(heads):
        first_head_index.setdefault(pred, idx)

    # Dependency edges between defined predicates: q -> h when a rule for h
    # references q; sign records whether any reference is negative.
    pos_edges: dict[str, set[str]] = {p: set() for p in head_set}
    neg_edges: dict[str, set[str]] = {p: set() for p in head_set}
    for rule in program.rules:
        h = rule.head.pred
        for q, positive in _dependencies(rule):
            if q in head_set:
                (pos_edges if positive else neg_edges)[q].add(h)

    sccs = _tarjan_sccs(head_set, pos_edges, neg_edges, first_head_index)
    scc_of = {p: i for i, scc in enumerate(sccs) for p in scc}

    # Reject negation cycles (a negative edge inside an SCC).
    for q, targets in neg_edges.items():
        for h in targets:
            if scc_of[q] == scc_of[h]:
                cycle = _find_cycle(q, h, pos_edges, neg_edges, set(sccs[scc_of[q]]))
                raise NotStratifiableError(cycle)

    order = _topological_order(sccs, scc_of, pos_edges, neg_edges, first_head_index)

    strata_preds: list[list[str]] = []
    current: list[str] = []
    current_set: set[str] = set()
    for scc_idx in order:
        members = sccs[scc_idx]
        opens_new = current and any(
            q in current_set
            for rule in program.rules if rule.head.pred in members
            for q, positive in _dependencies(rule) if not positive
        )
        if opens_new:
            strata_preds.append(current)
            current, current_set = [], set()
        current.extend(members)
        current_set.update(members)
    if current:
        strata_preds.append(current)

    strata = []
    for preds in strata_preds:
        pred_set = set(preds)
        rules = tuple(r for r in program.rules if r.head.pred in pred_set)
        used = set()
        for rule in rules:
            used.add(rule.head.pred)
            for q, _ in _dependencies(rule):
                used.add(q)
        strata.append(Stratum(program=program.with_rules(rules),
                              edb=frozenset(used - pred_set),
                              idb=frozenset(pred_set)))
    return Stratification(tuple(strata))


def _tarjan_sccs(nodes, pos_edges, neg_edges, first_head_index):
    """Tarjan's SCC, iterative; nodes visited in first-head order."""
    index: dict[str, int] = {}
    low: dict[str, int] = {}
    on_stack: set[str] = set()
    stack: list[str] = []
    sccs: list[list[str]] = []
    counter = [0]

    def successors(v):
        out = sorted(pos_edges[v] | neg_edges[v], key=lambda p: first_head_index[p])
        return out

    for root in sorted(nodes, key=lambda p: first_head_index[p]):
        if root in index:
            continue
        work = [(root, iter(successors(root)))]
        index[root] = low[root] = counter[0]
        counter[0] += 1
        stack.append(root)
        on_stack.add(root)
        while work:
            v, it = work[-1]
            advanced = False
            for w in it:
                if w not in index:
                    index[w] = low[w] = counter[0]
                    counter[0] += 1
                    stack.append(w)
                    on_stack.add(w)
                    work.append((w, iter(successors(w))))
                    advanced = True
                    break
                elif w in on_stack:
                    low[v] = min(low[v], index[w])
            if advanced:
                continue
            work.pop()
            if work:
                parent = work[-1][0]
                low[parent] = min(low[parent], low[v])
            if low[v] == index[v]:
                scc = []
                while True:
                    w = stack.pop()
                    on_stack.discard(w)
                    scc.append(w)
                    if w == v:
                        break
                scc.sort(key=lambda p: first_head_index[p])
                sccs.append(scc)
    return sccs


def _topological_order(sccs, scc_of, pos_edges, neg_edges, first_head_index):
    n = len(sccs)
    succ: list[set[int]] = [set() for _ in range(n)]
    indeg = [0] * n
    for q in scc_of:
        for h in pos_edges[q] | neg_edges[q]:
            a, b = scc_of[q], scc_of[h]
            if a != b and b not in succ[a]:
                succ[a].add(b)
                indeg[b] += 1
    key = lambda i: min(first_head_index[p] for p in sccs[i])
    ready = [(key(i), i) for i in range(n) if indeg[i] == 0]
    heapq.heapify(ready)
    order = []
    while ready:
        _, i = heapq.heappop(ready)
        order.append(i)
        for j in succ[i]:
            indeg[j] -= 1
            if indeg[j] == 0:
                heapq.heappush(ready, (key(j), j))
    return order


def _find_cycle(src, dst, pos_edges, neg_edges, scc):
    """A predicate path dst -> ... -> src inside the SCC, plus the closing
    negative edge src -> dst."""
    parent = {dst: None}
    frontier = [dst]
    while frontier:
        nxt = []
        for v in frontier:
            for w in pos_edges[v] | neg_edges[v]:
                if w in scc and w not in parent:
                    parent[w] = v
                    nxt.append(w)
        if src in parent:
            break
        frontier = nxt
    path = [src]
    while path[-1] != dst and parent.get(path[-1]) is not None:
        path.append(parent[path[-1]])
    path.reverse()
    return path + [path[0]] if len(path) > 1 else [src, dst, src]


def validate_stratification(program: Program, strat: Stratification) -> list[str]:
    """Check the stratification conditions independently of construction."""
    problems = []
    all_rules = [r for s in strat.strata for r in s.program.rules]
    if sorted(map(str, all_rules)) != sorted(map(str, program.rules)):
        problems.append("strata rules do not partition the program's rules")
    level_of: dict[str, int] = {}
    for level, stratum in enumerate(strat.strata):
        for rule in stratum.program.rules:
            level_of.setdefault(rule.head.pred, level)
    for level, stratum in enumerate(strat.strata):
        for rule in stratum.program.rules:
            for q, positive in _dependencies(rule):
                if q not in level_of:
                    continue
                if positive and level_of[q] > level:
                    problems.append(f"positive dependency {q} of {rule.head.pred} "
                                    f"defined above stratum {level}")
                if not positive and level_of[q] >= level:
                    problems.append(f"negated predicate {q} not defined strictly below "
                                    f"stratum {level}")
    return problems
