"""Tests for requirement parsing and compilation to Fwd/Reach constraints."""
import itertools

import pytest

from dlsynth.constraints import CAnd, CAtom, CNot, holds
from dlsynth.datalog import evaluate, ground_atom, stratify, \
    eliminate_min_aggregates
from dlsynth.network import NetworkError, ProtocolSuite, build_network_program, \
    parse_topology
from dlsynth.requirements import (
    IsolationReq,
    LoopFreeReq,
    PathReq,
    ReachReq,
    add_reach_rules,
    check_requirements,
    compile_requirements,
    parse_requirements,
    uses_reach,
)

TOPO = parse_topology("""
router A
router B
router C
link A B
link B C
link A C
network N1 attached C
network N2 attached C
""")


def conjuncts(c):
    return list(c.children) if isinstance(c, CAnd) else [c]


class TestParse:
    def test_all_forms(self):
        reqs = parse_requirements(
            "path N1 A B C\nreach N2 A C\nisolate N1 N2\nloopfree\n", TOPO)
        assert reqs == (PathReq("N1", ("A", "B", "C")),
                        ReachReq("N2", "A", "C"),
                        IsolationReq("N1", "N2"),
                        LoopFreeReq())

    def test_comments(self):
        assert parse_requirements("# nothing\n\npath N1 A B # go\n", TOPO) == \
            (PathReq("N1", ("A", "B")),)

    @pytest.mark.parametrize("text", [
        "path N1 A",  # too short
        "path N1 A A",  # consecutive repeat
        "path N9 A B",  # unknown class
        "path N1 A X",  # unknown router
        "reach N1 A",  # arity
        "isolate N1",  # arity
        "loopfree now",  # arity
        "unreach N1 A B",  # unknown keyword
    ])
    def test_rejects(self, text):
        with pytest.raises(NetworkError):
            parse_requirements(text, TOPO)


class TestCompile:
    def test_path_positive_and_exclusive(self):
        c = conjuncts(compile_requirements([PathReq("N1", ("A", "B", "C"))], TOPO))
        rendered = {str(k) for k in c}
        assert "Fwd(N1,A,B)" in rendered
        assert "Fwd(N1,B,C)" in rendered
        # on-path routers must not forward anywhere else
        assert "!(Fwd(N1,A,C))" in rendered or "!Fwd(N1,A,C)" in rendered
        assert any("Fwd(N1,B,A)" in r and r.startswith("!") for r in rendered)

    def test_path_semantics_exhaustive(self):
        # over every Fwd relation on 3 routers, the compiled constraint holds
        # exactly when A and B forward N1 along A->B->C and nowhere else
        req = [PathReq("N1", ("A", "B", "C"))]
        c = compile_requirements(req, TOPO)
        pairs = [(a, b) for a in "ABC" for b in "ABC" if a != b]
        for bits in itertools.product([0, 1], repeat=len(pairs)):
            fwd = frozenset(ground_atom("Fwd", "N1", a, b)
                            for (a, b), bit in zip(pairs, bits) if bit)
            expected = (ground_atom("Fwd", "N1", "A", "B") in fwd
                        and ground_atom("Fwd", "N1", "B", "C") in fwd
                        and all(not (a in "AB" and
                                     ground_atom("Fwd", "N1", a, b) in fwd)
                                or (a, b) in [("A", "B"), ("B", "C")]
                                for a, b in pairs))
            assert holds(fwd, c, {}) == expected

    def test_isolation_expansion(self):
        c = conjuncts(compile_requirements([IsolationReq("N1", "N2")], TOPO))
        assert len(c) == 9  # all ordered router pairs incl. self pairs
        fwd = frozenset({ground_atom("Fwd", "N1", "A", "B"),
                         ground_atom("Fwd", "N2", "A", "B")})
        assert not holds(fwd, CAnd(tuple(c)), {})
        assert holds(frozenset({ground_atom("Fwd", "N1", "A", "B"),
                                ground_atom("Fwd", "N2", "B", "C")}),
                     CAnd(tuple(c)), {})

    def test_loopfree_all_negative(self):
        c = conjuncts(compile_requirements([LoopFreeReq()], TOPO))
        assert len(c) == 6  # 2 classes x 3 routers
        assert all(isinstance(k, CNot) for k in c)

    def test_reach_uses_closure_atom(self):
        c = compile_requirements([ReachReq("N1", "A", "C")], TOPO)
        assert str(conjuncts(c)[0]) == "Reach(N1,A,C)"
        assert uses_reach([ReachReq("N1", "A", "C")])
        assert uses_reach([LoopFreeReq()])
        assert not uses_reach([PathReq("N1", ("A", "B"))])


class TestReachRules:
    def test_closure_matches_direct_computation(self):
        np0 = build_network_program(TOPO, ProtocolSuite.of("static"))
        program = add_reach_rules(np0.program)
        inp = {ground_atom("SetStatic", "N1", "A", "B"),
               ground_atom("SetStatic", "N1", "B", "C")}
        inp |= {ground_atom("SetAD", "static", r, 1) for r in "ABC"}
        model = evaluate(program, frozenset(inp) | np0.fixed_facts)
        fwd = {(a.args[1].value, a.args[2].value)
               for a in model if a.pred == "Fwd" and a.args[0].value == "N1"}
        reach = {(a.args[1].value, a.args[2].value)
                 for a in model if a.pred == "Reach" and a.args[0].value == "N1"}
        closure = set(fwd)
        changed = True
        while changed:
            changed = False
            for (a, b), (c, d) in itertools.product(list(closure), list(fwd)):
                if b == c and (a, d) not in closure:
                    closure.add((a, d))
                    changed = True
        assert reach == closure

    def test_reach_stays_in_top_stratum(self):
        np0 = build_network_program(TOPO, ProtocolSuite.of("ospf", "static"))
        base = stratify(eliminate_min_aggregates(np0.program)).strata
        extended = stratify(eliminate_min_aggregates(
            add_reach_rules(np0.program))).strata
        assert len(extended) == len(base)
        assert "Reach" in extended[-1].idb
        assert "Fwd" in extended[-1].idb

    def test_double_add_rejected(self):
        np0 = build_network_program(TOPO, ProtocolSuite.of("static"))
        with pytest.raises(NetworkError):
            add_reach_rules(add_reach_rules(np0.program))


class TestCheckRequirements:
    def test_reports_only_violated(self):
        model = {ground_atom("Fwd", "N1", "A", "B"),
                 ground_atom("Fwd", "N1", "B", "C")}
        reqs = [PathReq("N1", ("A", "B", "C")), PathReq("N1", ("A", "C"))]
        violated = check_requirements(model, reqs, TOPO)
        assert violated == (PathReq("N1", ("A", "C")),)

    def test_empty_requirements_hold(self):
        assert check_requirements(set(), [], TOPO) == ()
