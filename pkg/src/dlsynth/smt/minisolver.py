"""A small SMT-LIB v2 solver for the propositional fragment.

Accepts the QF_UF subset the ground emitter produces: zero-ary Bool
declarations, assertions over and/or/not/=>/= (over booleans), check-sat and
get-model. Formulas are Tseitin-transformed and decided by a CDCL SAT solver
(two-watched literals, first-UIP learning, VSIDS-style activities, Luby
restarts).

Runs standalone: ``python -m dlsynth.smt.minisolver file.smt2`` prints
``sat``/``unsat`` and, on sat after (get-model), the true atoms as
define-fun entries. Intended as the default solver command so the pipeline
works without an external SMT solver; any SMT-LIB solver can be swapped in.
"""
from __future__ import annotations

import heapq
import sys
from typing import Optional, Union

SExpr = Union[str, list]


class SolverInputError(Exception):
    pass


# -- s-expression reader ------------------------------------------------------

def tokenize(text: str):
    i, n = 0, len(text)
    while i < n:
        ch = text[i]
        if ch in " \t\r\n":
            i += 1
        elif ch == ";":
            while i < n and text[i] != "\n":
                i += 1
        elif ch in "()":
            yield ch
            i += 1
        elif ch == "|":
            j = text.find("|", i + 1)
            if j < 0:
                raise SolverInputError("unterminated quoted symbol")
            yield text[i:j + 1]
            i = j + 1
        elif ch == '"':
            j = i + 1
            while j < n and text[j] != '"':
                j += 1
            if j >= n:
                raise SolverInputError("unterminated string")
            yield text[i:j + 1]
            i = j + 1
        else:
            j = i
            while j < n and text[j] not in " \t\r\n();|\"":
                j += 1
            yield text[i:j]
            i = j


def parse_sexprs(text: str) -> list:
    stack: list[list] = [[]]
    for tok in tokenize(text):
        if tok == "(":
            stack.append([])
        elif tok == ")":
            if len(stack) == 1:
                raise SolverInputError("unbalanced ')'")
            done = stack.pop()
            stack[-1].append(done)
        else:
            stack[-1].append(tok)
    if len(stack) != 1:
        raise SolverInputError("unbalanced '('")
    return stack[0]


# -- CDCL ---------------------------------------------------------------------

class Sat:
    """CDCL over literals encoded as 2*var (positive) / 2*var+1 (negative)."""

    def __init__(self):
        self.nvars = 0
        self.clauses: list[list[int]] = []
        self.watches: list[list[int]] = []  # lit -> clause indices
        self.assign: list[int] = []  # var -> -1/0/1
        self.level: list[int] = []
        self.reason: list[int] = []  # var -> clause index or -1
        self.trail: list[int] = []
        self.trail_lim: list[int] = []
        self.activity: list[float] = []
        self.phase: list[int] = []  # saved polarity: 0 true, 1 false
        self.heap: list[tuple[float, int]] = []  # lazy max-activity heap
        self.var_inc = 1.0
        self.ok = True

    def new_var(self) -> int:
        v = self.nvars
        self.nvars += 1
        self.assign.append(-1)
        self.level.append(0)
        self.reason.append(-1)
        self.activity.append(0.0)
        self.phase.append(1)  # default false: sparse models suit datalog inputs
        heapq.heappush(self.heap, (0.0, v))
        self.watches.append([])
        self.watches.append([])
        return v

    def value(self, lit: int) -> int:
        a = self.assign[lit >> 1]
        if a < 0:
            return -1
        return a ^ (lit & 1)

    def add_clause(self, lits: list[int]) -> None:
        """Add an input clause; must be called before solve (at level 0)."""
        if not self.ok:
            return
        lits = sorted(set(lits))
        for i in range(len(lits) - 1):
            if lits[i] ^ 1 == lits[i + 1]:
                return  # tautology
        if any(self.value(l) == 1 for l in lits):
            return  # already satisfied at the root level
        lits = [l for l in lits if self.value(l) != 0]
        if not lits:
            self.ok = False
            return
        if len(lits) == 1:
            if not self._enqueue(lits[0], -1):
                self.ok = False
            elif self._propagate() is not None:
                self.ok = False
            return
        idx = len(self.clauses)
        self.clauses.append(lits)
        self.watches[lits[0] ^ 1].append(idx)
        self.watches[lits[1] ^ 1].append(idx)

    def _enqueue(self, lit: int, reason: int) -> bool:
        val = self.value(lit)
        if val == 1:
            return True
        if val == 0:
            return False
        v = lit >> 1
        self.assign[v] = 1 - (lit & 1)
        self.level[v] = len(self.trail_lim)
        self.reason[v] = reason
        self.trail.append(lit)
        return True

    def _propagate(self) -> Optional[int]:
        """Unit propagation; returns a conflicting clause index or None."""
        qhead = getattr(self, "_qhead", 0)
        while qhead < len(self.trail):
            lit = self.trail[qhead]
            qhead += 1
            false_lit = lit ^ 1
            watch = self.watches[lit]
            i = 0
            while i < len(watch):
                ci = watch[i]
                clause = self.clauses[ci]
                # ensure the false literal is at position 1
                if clause[0] == false_lit:
                    clause[0], clause[1] = clause[1], clause[0]
                first = clause[0]
                if self.value(first) == 1:
                    i += 1
                    continue
                moved = False
                for j in range(2, len(clause)):
                    if self.value(clause[j]) != 0:
                        clause[1], clause[j] = clause[j], clause[1]
                        self.watches[clause[1] ^ 1].append(ci)
                        watch[i] = watch[-1]
                        watch.pop()
                        moved = True
                        break
                if moved:
                    continue
                if not self._enqueue(first, ci):
                    self._qhead = len(self.trail)
                    return ci
                i += 1
        self._qhead = qhead
        return None

    def _bump(self, v: int) -> None:
        act = self.activity[v] + self.var_inc
        self.activity[v] = act
        heapq.heappush(self.heap, (-act, v))
        if act > 1e100:
            for u in range(self.nvars):
                self.activity[u] *= 1e-100
            self.var_inc *= 1e-100
            self.heap = [(-self.activity[u], u) for u in range(self.nvars)]
            heapq.heapify(self.heap)

    def _analyze(self, confl: int):
        """First-UIP conflict analysis; returns (learnt clause, backtrack level).

        Relies on the invariant that a reason clause keeps its implied
        literal at position 0 while the implication stands.
        """
        learnt = [0]
        seen = bytearray(self.nvars)
        counter = 0
        lit = None
        index = len(self.trail)
        cur_level = len(self.trail_lim)
        while True:
            clause = self.clauses[confl]
            for q in clause if lit is None else clause[1:]:
                v = q >> 1
                if not seen[v] and self.level[v] > 0:
                    seen[v] = 1
                    self._bump(v)
                    if self.level[v] >= cur_level:
                        counter += 1
                    else:
                        learnt.append(q)
            while True:
                index -= 1
                lit = self.trail[index]
                if seen[lit >> 1]:
                    break
            seen[lit >> 1] = 0
            counter -= 1
            if counter == 0:
                break
            confl = self.reason[lit >> 1]
        learnt[0] = lit ^ 1
        if len(learnt) == 1:
            back = 0
        else:
            back = max(self.level[q >> 1] for q in learnt[1:])
            # move a literal of the backtrack level into the watch position
            for j in range(1, len(learnt)):
                if self.level[learnt[j] >> 1] == back:
                    learnt[1], learnt[j] = learnt[j], learnt[1]
                    break
        return learnt, back

    def _cancel_until(self, lvl: int) -> None:
        while len(self.trail_lim) > lvl:
            bound = self.trail_lim.pop()
            while len(self.trail) > bound:
                lit = self.trail.pop()
                v = lit >> 1
                self.phase[v] = lit & 1
                self.assign[v] = -1
                self.reason[v] = -1
                heapq.heappush(self.heap, (-self.activity[v], v))
        self._qhead = len(self.trail)

    def _decide(self) -> int:
        while self.heap:
            act, v = heapq.heappop(self.heap)
            if self.assign[v] < 0 and -act == self.activity[v]:
                return v * 2 + self.phase[v]
        for v in range(self.nvars):
            if self.assign[v] < 0:
                return v * 2 + self.phase[v]
        return -1

    def solve(self) -> bool:
        if not self.ok:
            return False
        if self._propagate() is not None:
            self.ok = False
            return False
        conflicts_limit = 128
        luby_step = 0
        conflicts = 0
        while True:
            confl = self._propagate()
            if confl is not None:
                conflicts += 1
                if not self.trail_lim:
                    self.ok = False
                    return False
                learnt, back = self._analyze(confl)
                self._cancel_until(back)
                if len(learnt) == 1:
                    self._enqueue(learnt[0], -1)
                else:
                    idx = len(self.clauses)
                    self.clauses.append(learnt)
                    self.watches[learnt[0] ^ 1].append(idx)
                    self.watches[learnt[1] ^ 1].append(idx)
                    self._enqueue(learnt[0], idx)
                self.var_inc /= 0.95
                if conflicts >= conflicts_limit:
                    conflicts = 0
                    luby_step += 1
                    conflicts_limit = 128 * _luby(luby_step)
                    self._cancel_until(0)
            else:
                lit = self._decide()
                if lit < 0:
                    return True
                self.trail_lim.append(len(self.trail))
                self._enqueue(lit, -1)


def _luby(i: int) -> int:
    k = 1
    while (1 << (k + 1)) <= i + 1:
        k += 1
    if (1 << (k + 1)) - 1 == i + 1:
        return 1 << k
    return _luby(i - (1 << k) + 1)


# -- Tseitin transformation ---------------------------------------------------

class Builder:
    def __init__(self):
        self.sat = Sat()
        self.vars: dict[str, int] = {}
        self.memo: dict[tuple, int] = {}
        self._true: Optional[int] = None

    def true_lit(self) -> int:
        if self._true is None:
            v = self.sat.new_var()
            self._true = v * 2
            self.sat.add_clause([self._true])
        return self._true

    def declare(self, name: str) -> None:
        if name not in self.vars:
            self.vars[name] = self.sat.new_var()

    def literal(self, name: str) -> int:
        if name not in self.vars:
            raise SolverInputError(f"undeclared symbol {name}")
        return self.vars[name] * 2

    def _gate(self, op: str, lits: tuple) -> int:
        key = (op, lits)
        if key in self.memo:
            return self.memo[key]
        g = self.sat.new_var() * 2
        if op == "and":
            for l in lits:
                self.sat.add_clause([g ^ 1, l])
            self.sat.add_clause([g] + [l ^ 1 for l in lits])
        elif op == "or":
            for l in lits:
                self.sat.add_clause([g, l ^ 1])
            self.sat.add_clause([g ^ 1] + list(lits))
        else:  # iff, binary
            a, b = lits
            self.sat.add_clause([g ^ 1, a ^ 1, b])
            self.sat.add_clause([g ^ 1, a, b ^ 1])
            self.sat.add_clause([g, a, b])
            self.sat.add_clause([g, a ^ 1, b ^ 1])
        self.memo[key] = g
        return g

    def compile(self, e: SExpr) -> int:
        if isinstance(e, str):
            if e == "true":
                return self.true_lit()
            if e == "false":
                return self.true_lit() ^ 1
            return self.literal(e)
        if not e:
            raise SolverInputError("empty expression")
        head = e[0]
        args = [self.compile(a) for a in e[1:]]
        if head == "not":
            if len(args) != 1:
                raise SolverInputError("not takes one argument")
            return args[0] ^ 1
        if head == "and":
            return self._nary("and", args)
        if head == "or":
            return self._nary("or", args)
        if head == "=>":
            if len(args) < 2:
                raise SolverInputError("=> takes at least two arguments")
            out = args[-1]
            for a in reversed(args[:-1]):
                out = self._nary("or", [a ^ 1, out])
            return out
        if head in ("=", "xor"):
            if len(args) < 2:
                raise SolverInputError(f"{head} takes at least two arguments")
            parts = [self._gate("iff", (min(a, b), max(a, b)))
                     for a, b in zip(args, args[1:])]
            if head == "xor":
                parts = [p ^ 1 for p in parts]
            return self._nary("and", parts)
        if head == "ite":
            c, t, f = args
            return self._nary("and", [self._nary("or", [c ^ 1, t]),
                                      self._nary("or", [c, f])])
        raise SolverInputError(f"unsupported operator {head!r}")

    def _nary(self, op: str, args: list) -> int:
        true = self.true_lit()
        false = true ^ 1
        absorbing = false if op == "and" else true
        neutral = true if op == "and" else false
        kept = []
        for a in args:
            if a == absorbing:
                return absorbing
            if a != neutral:
                kept.append(a)
        if not kept:
            return neutral
        if len(kept) == 1:
            return kept[0]
        return self._gate(op, tuple(sorted(set(kept))))

    def assert_expr(self, e: SExpr) -> None:
        self.sat.add_clause([self.compile(e)])


# -- command interpreter --------------------------------------------------------

def run(text: str, out=sys.stdout) -> None:
    builder = Builder()
    last: Optional[bool] = None
    for cmd in parse_sexprs(text):
        if not isinstance(cmd, list) or not cmd:
            raise SolverInputError(f"expected a command, got {cmd!r}")
        head = cmd[0]
        if head in ("set-logic", "set-option", "set-info", "exit", "push", "pop"):
            continue
        if head == "declare-fun":
            if len(cmd) != 4 or cmd[2] != [] or cmd[3] != "Bool":
                raise SolverInputError("only zero-ary Bool declarations supported")
            builder.declare(cmd[1])
        elif head == "declare-const":
            if len(cmd) != 3 or cmd[2] != "Bool":
                raise SolverInputError("only Bool constants supported")
            builder.declare(cmd[1])
        elif head == "assert":
            if len(cmd) != 2:
                raise SolverInputError("assert takes one argument")
            builder.assert_expr(cmd[1])
        elif head == "check-sat":
            last = builder.sat.solve()
            print("sat" if last else "unsat", file=out)
        elif head == "get-model":
            if last is None:
                raise SolverInputError("get-model before check-sat")
            if not last:
                continue
            print("(", file=out)
            for name in sorted(builder.vars):
                if builder.sat.assign[builder.vars[name]] == 1:
                    print(f"  (define-fun {name} () Bool true)", file=out)
            print(")", file=out)
        else:
            raise SolverInputError(f"unsupported command {head!r}")


def main(argv=None) -> int:
    argv = sys.argv[1:] if argv is None else argv
    if len(argv) != 1:
        print("usage: minisolver FILE.smt2", file=sys.stderr)
        return 2
    try:
        with open(argv[0], "r", encoding="utf-8") as fh:
            text = fh.read()
        run(text)
    except (SolverInputError, OSError) as exc:
        print(f"error: {exc}", file=sys.stderr)
        return 1
    return 0


if __name__ == "__main__":
    sys.exit(main())
