"""Input synthesis for stratified Datalog programs.

`synth_semipos` handles one semi-positive stratum by bounded unrolling: for
k = 1..bound_k it asks the solver for a model of the stratum's bounded
encoding conjoined with the rewritten constraint; any model's edb projection
is guaranteed to evaluate to a fixed point satisfying the constraint.

`synth_strat` handles a full stratified program top stratum first, pinning
each synthesized fixed-point slice onto the next stratum down via exact
predicate-equality constraints, with bounded backtracking through sets of
failed inputs.
"""
from __future__ import annotations

import time
from dataclasses import dataclass, field
from typing import Iterable, Mapping, Optional, Sequence

from .constraints import (
    CAtom,
    CEq,
    CForall,
    CNot,
    COr,
    CTrue,
    Constraint,
    cand,
    cor,
    holds,
    rewrite,
    simplify,
)
from .datalog import (
    Atom,
    Const,
    DatalogError,
    Literal,
    Program,
    Var,
    eliminate_min_aggregates,
    evaluate,
    project_edb,
    stratify,
)
from .smt import (
    SmtFormula,
    emit_smtlib,
    encode_bounded,
    model_to_interpretation,
    rectify,
    solve,
    split_step,
)


@dataclass(frozen=True)
class SynthesisConfig:
    bound_k: int = 20
    bound_f: int = 20
    timeout: Optional[float] = None  # seconds per solver call
    seed: Optional[int] = None  # reserved
    solver_command: Optional[Sequence[str]] = None

    def __post_init__(self) -> None:
        if self.bound_k < 1 or self.bound_f < 1:
            raise DatalogError("bound_k and bound_f must be at least 1")


@dataclass(frozen=True)
class TraceRecord:
    stratum: int  # 1-based, 0 for single-stratum calls
    k: int
    verdict: str
    duration: float


@dataclass
class Statistics:
    solver_calls: dict = field(default_factory=dict)  # stratum -> count
    unroll_depths: dict = field(default_factory=dict)  # stratum -> k at success
    backtracks: int = 0
    wall_time: float = 0.0
    trace: list = field(default_factory=list)

    def record(self, stratum: int, k: int, verdict: str, duration: float) -> None:
        self.solver_calls[stratum] = self.solver_calls.get(stratum, 0) + 1
        self.trace.append(TraceRecord(stratum, k, verdict, duration))


@dataclass(frozen=True)
class SynthOutcome:
    input: Optional[frozenset]  # edb atoms, or None when no input was found
    stats: Statistics

    @property
    def found(self) -> bool:
        return self.input is not None


class FailedInputSets:
    """Per-stratum sets of inputs proven incompatible with lower strata."""

    def __init__(self, n: int, capacity: int):
        self.sets: list[list[frozenset]] = [[] for _ in range(n + 1)]  # 1-based
        self.capacity = capacity

    def add(self, stratum: int, inp: frozenset) -> None:
        self.sets[stratum].append(inp)

    def reset(self, stratum: int) -> None:
        self.sets[stratum] = []

    def over_capacity(self, stratum: int) -> bool:
        return len(self.sets[stratum]) > self.capacity

    def __getitem__(self, stratum: int) -> list:
        return self.sets[stratum]


def _constraint_predicates(c) -> set:
    from .constraints import CAnd, CCmp, CExists
    from .smt.formula import CIff, CImplies

    out = set()
    stack = [c]
    while stack:
        node = stack.pop()
        if isinstance(node, CAtom):
            out.add(split_step(node.atom.pred)[0])
        elif isinstance(node, CNot):
            stack.append(node.child)
        elif isinstance(node, (CAnd, COr)):
            stack.extend(node.children)
        elif isinstance(node, (CForall, CExists)):
            stack.append(node.body)
        elif isinstance(node, CImplies):
            stack.extend((node.antecedent, node.consequent))
        elif isinstance(node, CIff):
            stack.extend((node.left, node.right))
    return out


def _check_side(side: Optional[Constraint], idb: frozenset) -> set:
    """Side constraints skip clausification, so they must not mention derived
    predicates (those would need step rewriting)."""
    if side is None:
        return set()
    preds = _constraint_predicates(side)
    bad = preds & set(idb)
    if bad:
        raise DatalogError(
            f"side constraint mentions derived predicates: {sorted(bad)}")
    return preds


def encode_pred(inp: Iterable[Atom], pred: str, program: Program) -> Constraint:
    """Exact-equality pin: satisfied by J iff J and inp have the same
    pred-atoms. An input without pred-atoms forces pred empty."""
    sig = program.signatures[pred]
    variables = [Var(f"X@{j}") for j in range(sig.arity)]
    rows = sorted((a for a in inp if a.pred == pred), key=str)
    disjuncts = [cand(*[CEq(v, Const(t.value)) for v, t in zip(variables, a.args)])
                 for a in rows]
    membership = cor(*disjuncts)  # empty disjunction is false
    atom = CAtom(Atom(pred, tuple(variables)))
    body = cand(cor(CNot(membership), atom), cor(CNot(atom), membership))
    for j in reversed(range(sig.arity)):
        body = CForall(variables[j].name, sig.arg_sorts[j], body)
    return body


def synth_semipos(stratum: Program, c: Constraint, cfg: SynthesisConfig,
                  stats: Optional[Statistics] = None, stratum_index: int = 0,
                  input_predicates: Optional[set] = None,
                  side: Optional[Constraint] = None) -> Optional[frozenset]:
    """Bounded-unrolling synthesis for one semi-positive stratum.

    Returns an input over the stratum's input predicates, or None when every
    k up to bound_k is unsatisfiable. Input predicates default to the
    program's edb; stratified callers widen them with lower-stratum idb.
    Referenced idb predicates with no rules are pinned empty (they can never
    be derived). `side` is an extra constraint over input predicates only,
    asserted without CNF conversion (the solver handles the Tseitin step).
    """
    stats = stats if stats is not None else Statistics()
    stratum = eliminate_min_aggregates(stratum)
    rect = rectify(stratum)
    idb = frozenset(r.head.pred for r in rect.rules)
    clausal = simplify(c, dict(stratum.sorts))
    used = {lit.atom.pred for lit in clausal.literals()}
    used |= _check_side(side, idb)
    for rule in rect.rules:
        used.add(rule.head.pred)
        for item in rule.body:
            if isinstance(item, Literal):
                used.add(item.atom.pred)
    allowed = set(stratum.edb_predicates()) if input_predicates is None \
        else set(input_predicates)
    inputs = (used - idb) & allowed
    forced_empty = used - idb - allowed
    pins = tuple(encode_pred((), p, stratum) for p in sorted(forced_empty))
    extra_decls = {p: stratum.signatures[p].arg_sorts for p in sorted(used)}
    for k in range(1, cfg.bound_k + 1):
        f = encode_bounded(rect, k)
        goal = rewrite(clausal, k, idb)
        if pins:
            goal = cand(goal, *pins)
        if side is not None:
            goal = cand(goal, side)
        merged = SmtFormula(dict(f.sorts), {**extra_decls, **dict(f.predicates)},
                            f.assertions + (goal,))
        start = time.monotonic()
        verdict = solve(emit_smtlib(merged), timeout=cfg.timeout,
                        command=cfg.solver_command)
        stats.record(stratum_index, k, verdict.status, time.monotonic() - start)
        if verdict.status == "sat":
            stats.unroll_depths[stratum_index] = k
            atoms = model_to_interpretation(verdict, stratum)
            return frozenset(a for a in atoms if a.pred in inputs)
        if verdict.status in ("timeout", "unknown"):
            raise DatalogError(
                f"solver returned {verdict.status} at unroll depth {k}")
    return None


def synth_strat(program: Program, c: Constraint, cfg: SynthesisConfig,
                side: Sequence[Constraint] = ()) -> SynthOutcome:
    """Stratified synthesis with failed-input backtracking.

    The constraint must mention only predicates of the highest stratum (or
    predicates every stratum treats as input). Each `side` constraint must
    mention only input predicates of some stratum; it is asserted, without
    CNF conversion, when that stratum (the highest one qualifying) is
    synthesized, and holds of the final input because those predicates are
    pinned down the chain."""
    t0 = time.monotonic()
    stats = Statistics()
    flat = eliminate_min_aggregates(program)
    strata = stratify(flat).strata
    n = len(strata)
    inputs: list[Optional[frozenset]] = [None] * (n + 1)  # 1-based
    failed = FailedInputSets(n, cfg.bound_f)

    defined = {r.head.pred for r in flat.rules}
    floating = set()
    for extra in side:
        floating |= _constraint_predicates(extra)
    floating -= defined  # side-only predicates: free inputs of any stratum

    def stratum_inputs(i: int) -> set:
        """Input predicate set of stratum i: body predicates not defined by
        it, side-only predicates, plus constraint predicates when i is the
        top stratum."""
        preds = set(strata[i - 1].edb) | floating
        if i == n:
            preds |= _constraint_predicates(c) - set(strata[i - 1].idb)
        return preds

    routed: dict[int, list[Constraint]] = {}
    for extra in side:
        preds = _constraint_predicates(extra)
        target = next((i for i in range(n, 0, -1)
                       if preds <= stratum_inputs(i)), None)
        if target is None:
            raise DatalogError(
                f"side constraint predicates {sorted(preds)} fit no stratum's "
                "input set")
        routed.setdefault(target, []).append(extra)

    i = n
    while 0 < i <= n:
        if failed.over_capacity(i):
            if i == n:
                stats.wall_time = time.monotonic() - t0
                return SynthOutcome(None, stats)
            failed.reset(i)
            failed.add(i + 1, inputs[i + 1])
            i += 1
            stats.backtracks += 1
            continue
        edb_i = stratum_inputs(i)
        psi_f = cand(*[
            CNot(cand(*[encode_pred(prior, p, flat) for p in sorted(edb_i)]))
            for prior in failed[i]])
        if i == n:
            psi_i: Constraint = c
        else:
            higher = frozenset().union(*[inputs[j] for j in range(i + 1, n + 1)])
            pinned = {a.pred for a in higher}
            scope = (edb_i | set(strata[i - 1].idb)) & (
                pinned | set().union(*[stratum_inputs(j) for j in range(i + 1, n + 1)]))
            psi_i = cand(*[encode_pred(higher, p, flat) for p in sorted(scope)])
        extras = routed.get(i)
        result = synth_semipos(strata[i - 1].program, cand(psi_i, psi_f), cfg,
                               stats, stratum_index=i, input_predicates=edb_i,
                               side=cand(*extras) if extras else None)
        if result is not None:
            inputs[i] = result
            i -= 1
        elif i < n:
            failed.reset(i)
            failed.add(i + 1, inputs[i + 1])
            i += 1
            stats.backtracks += 1
        else:
            stats.wall_time = time.monotonic() - t0
            return SynthOutcome(None, stats)

    combined = frozenset().union(*[inp for inp in inputs[1:] if inp is not None]) \
        if n else frozenset()
    edb = flat.edb_predicates()
    stats.wall_time = time.monotonic() - t0
    return SynthOutcome(frozenset(a for a in combined if a.pred in edb), stats)


@dataclass(frozen=True)
class VerifyResult:
    ok: bool
    violated_clauses: tuple = ()
    relevant_atoms: frozenset = frozenset()

    def __bool__(self) -> bool:
        return self.ok


def verify(program: Program, inp: Iterable[Atom], c: Constraint) -> VerifyResult:
    """Evaluate the program on the input and check the constraint, reporting
    the violated clauses and the model atoms they mention."""
    model = evaluate(program, inp)
    domains = dict(program.sorts)
    clausal = simplify(c, domains)
    violated = tuple(
        clause for clause in clausal.clauses
        if not any((lit.atom in model) == lit.positive for lit in clause))
    if not violated:
        return VerifyResult(True)
    preds = {lit.atom.pred for clause in violated for lit in clause}
    relevant = frozenset(a for a in model if a.pred in preds)
    return VerifyResult(False, tuple(" | ".join(map(str, cl)) for cl in violated),
                        relevant)
