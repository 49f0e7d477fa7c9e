"""Tests for the Datalog core: parsing, stratification, aggregates, evaluation."""
import itertools

import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

from dlsynth.datalog import (
    Atom,
    Const,
    DatalogError,
    NotStratifiableError,
    ParseError,
    check_well_formed,
    consequence,
    eliminate_min_aggregates,
    evaluate,
    format_atoms,
    ground_atom,
    parse_atoms,
    parse_program,
    program_to_text,
    project_edb,
    stratify,
    validate_stratification,
)

TC_SOURCE = """
.sort node {v0,v1,v2}
.decl e(node,node) edb
.decl tc(node,node) idb
tc(X,Y) :- e(X,Y).
tc(X,Y) :- tc(X,Z), tc(Z,Y).
"""


@pytest.fixture
def tc():
    return parse_program(TC_SOURCE)


class TestParser:
    def test_transitive_closure(self, tc):
        assert len(tc.rules) == 2
        assert tc.edb_predicates() == {"e"}
        assert tc.idb_predicates() == {"tc"}

    def test_declarations_only(self):
        p = parse_program(".sort s {a}\n.decl p(s) edb\n")
        assert p.rules == ()

    def test_head_var_not_in_body(self):
        with pytest.raises(DatalogError, match="head variables"):
            parse_program(".sort node {v0}\n.decl e(node,node) edb\n"
                          ".decl tc(node,node) idb\ntc(X,Y) :- e(X,Z).")

    def test_undeclared_predicate(self):
        with pytest.raises(DatalogError, match="undeclared"):
            parse_program(".sort s {a}\n.decl p(s) idb\np(X) :- q(X).")

    def test_unknown_constant(self):
        with pytest.raises(ParseError, match="unknown constant"):
            parse_program(".sort s {a}\n.decl p(s) edb\n.decl q(s) idb\nq(b) :- p(b).")

    def test_syntax_error_has_position(self):
        with pytest.raises(ParseError, match="line 2"):
            parse_program(".sort s {a}\n.decl p(s edb\n")

    def test_constant_outside_sort(self):
        with pytest.raises(DatalogError, match="outside sort"):
            parse_program(".sort s {a}\n.int c [0,5]\n.decl p(s,c) edb\n"
                          ".decl q(s,c) idb\nq(X,9) :- p(X,9).")

    def test_round_trip(self, tc):
        assert parse_program(program_to_text(tc)) == tc

    def test_round_trip_arithmetic_and_aggregates(self):
        src = (".sort r {a,b}\n.int cost [0,20]\n"
               ".decl w(r,r,cost) edb\n.decl d(r,r,cost) idb\n.decl m(r,cost) idb\n"
               "d(X,Y,C) :- w(X,Y,C).\n"
               "d(X,Y,C) :- d(X,Z,C1), w(Z,Y,C2), C = C1 + C2.\n"
               "m(X,min<C>) :- d(X,Y,C).\n")
        p = parse_program(src)
        assert parse_program(program_to_text(p)) == p

    def test_atom_file_round_trip(self, tc):
        atoms = frozenset({ground_atom("e", "v0", "v1"), ground_atom("tc", "v1", "v2")})
        assert parse_atoms(format_atoms(atoms), tc) == atoms

    def test_atom_file_rejects_bad_sort(self, tc):
        with pytest.raises(DatalogError):
            parse_atoms("e(v0,v9)", tc)


class TestWellFormed:
    def test_tc_ok(self, tc):
        assert check_well_formed(tc) == []

    def test_edb_head_is_violation(self, tc):
        bad = tc.with_rules(tc.rules + (tc.rules[0].__class__(
            Atom("e", tc.rules[0].head.args), tc.rules[0].body),))
        assert any("edb" in v for v in check_well_formed(bad))


class TestStratify:
    def test_tc_single_stratum(self, tc):
        s = stratify(tc)
        assert len(s) == 1
        assert s.strata[0].idb == {"tc"}
        assert s.strata[0].edb == {"e"}

    def test_negation_forces_two_strata(self):
        p = parse_program(".sort s {a,b}\n.decl e(s) edb\n"
                          ".decl q(s) idb\n.decl r(s) idb\n"
                          "q(X) :- e(X).\nr(X) :- e(X), !q(X).")
        s = stratify(p)
        assert len(s) == 2
        assert s.strata[0].idb == {"q"}
        assert s.strata[1].idb == {"r"}

    def test_negation_cycle_rejected(self):
        p = parse_program(".sort s {a}\n.decl e(s) edb\n.decl p(s) idb\n.decl q(s) idb\n"
                          "p(X) :- e(X), !q(X).\nq(X) :- e(X), !p(X).")
        with pytest.raises(NotStratifiableError) as exc:
            stratify(p)
        assert set(exc.value.cycle) >= {"p", "q"}

    def test_output_is_valid(self, tc):
        assert validate_stratification(tc, stratify(tc)) == []

    def test_validator_catches_bad_order(self):
        p = parse_program(".sort s {a}\n.decl e(s) edb\n.decl q(s) idb\n.decl r(s) idb\n"
                          "q(X) :- e(X).\nr(X) :- e(X), !q(X).")
        s = stratify(p)
        swapped = s.__class__((s.strata[1], s.strata[0]))
        assert validate_stratification(p, swapped) != []

    def test_deterministic(self, tc):
        assert stratify(tc) == stratify(tc)


MIN_COST_SOURCE = """
.sort r {r1,r2,r3}
.int cost [0,30]
.decl w(r,r,cost) edb
.decl route(r,r,cost) idb
.decl minCost(r,r,cost) idb
route(X,Y,C) :- w(X,Y,C).
route(X,Y,C) :- route(X,Z,C1), w(Z,Y,C2), C = C1 + C2.
minCost(X,Y,min<C>) :- route(X,Y,C).
"""


class TestAggregates:
    def test_identity_without_aggregates(self, tc):
        assert eliminate_min_aggregates(tc) is tc

    def test_rewrite_shape(self):
        p = eliminate_min_aggregates(parse_program(MIN_COST_SOURCE))
        heads = [r.head.pred for r in p.rules]
        assert heads.count("minCost_cand") == 1
        assert heads.count("minCost_lower") == 1
        assert heads.count("minCost") == 1
        # negation of lower sits above its definition
        strata = stratify(p).strata
        level = {pred: i for i, s in enumerate(strata) for pred in s.idb}
        assert level["minCost_lower"] < level["minCost"]

    def test_min_cost_matches_brute_force(self):
        p = parse_program(MIN_COST_SOURCE)
        line = frozenset({ground_atom("w", "r1", "r2", 3), ground_atom("w", "r2", "r3", 4)})
        model = evaluate(p, line)
        routes = {(a.args[0].value, a.args[1].value): [] for a in model if a.pred == "route"}
        for a in model:
            if a.pred == "route":
                routes[(a.args[0].value, a.args[1].value)].append(a.args[2].value)
        expected = {ground_atom("minCost", x, y, min(cs)) for (x, y), cs in routes.items()}
        assert {a for a in model if a.pred == "minCost"} == expected
        assert ground_atom("minCost", "r1", "r3", 7) in model

    def test_max_aggregate(self):
        p = parse_program(".sort s {a,b}\n.int v [0,9]\n.decl f(s,v) edb\n"
                          ".decl best(s,v) idb\nbest(X,max<V>) :- f(X,V).")
        model = evaluate(p, frozenset({ground_atom("f", "a", 2), ground_atom("f", "a", 7)}))
        assert {x for x in model if x.pred == "best"} == {ground_atom("best", "a", 7)}

    def test_mixed_plain_and_aggregate_rejected(self):
        with pytest.raises(DatalogError, match="mixes"):
            eliminate_min_aggregates(parse_program(
                ".sort s {a}\n.int v [0,5]\n.decl f(s,v) edb\n.decl g(s,v) idb\n"
                "g(X,min<V>) :- f(X,V).\ng(X,V) :- f(X,V)."))


class TestConsequence:
    def test_first_application(self, tc):
        start = frozenset({ground_atom("e", "v0", "v1"), ground_atom("e", "v1", "v2")})
        out = consequence(tc, start)
        assert out == start | {ground_atom("tc", "v0", "v1"), ground_atom("tc", "v1", "v2")}

    def test_second_application_closes_path(self, tc):
        start = frozenset({ground_atom("e", "v0", "v1"), ground_atom("e", "v1", "v2")})
        out = consequence(tc, consequence(tc, start))
        assert ground_atom("tc", "v0", "v2") in out

    def test_fixed_point_unchanged(self, tc):
        fp = evaluate(tc, frozenset({ground_atom("e", "v0", "v1")}))
        assert consequence(tc, fp) == fp

    @given(st.sets(st.tuples(st.sampled_from("v0 v1 v2".split()),
                             st.sampled_from("v0 v1 v2".split())), max_size=9))
    @settings(max_examples=60, deadline=None)
    def test_monotone(self, edges):
        p = parse_program(TC_SOURCE)
        start = frozenset(ground_atom("e", a, b) for a, b in edges)
        assert start <= consequence(p, start)


class TestEvaluate:
    def test_two_edge_path(self, tc):
        model = evaluate(tc, frozenset({ground_atom("e", "v0", "v1"),
                                        ground_atom("e", "v1", "v2")}))
        tcs = {a for a in model if a.pred == "tc"}
        assert ground_atom("tc", "v0", "v2") in tcs
        assert len(tcs) == 3

    def test_single_edge(self, tc):
        model = evaluate(tc, frozenset({ground_atom("e", "v0", "v1")}))
        assert model == frozenset({ground_atom("e", "v0", "v1"),
                                   ground_atom("tc", "v0", "v1")})

    def test_empty_input(self, tc):
        assert evaluate(tc, frozenset()) == frozenset()

    def test_out_of_range_sums_discarded(self):
        p = parse_program(".sort s {a,b}\n.int v [0,5]\n.decl w(s,s,v) edb\n"
                          ".decl d(s,s,v) idb\n"
                          "d(X,Y,C) :- w(X,Y,C).\n"
                          "d(X,Y,C) :- d(X,Z,C1), w(Z,Y,C2), C = C1 + C2.")
        model = evaluate(p, frozenset({ground_atom("w", "a", "b", 4),
                                       ground_atom("w", "b", "a", 4)}))
        assert all(a.args[2].value <= 5 for a in model if a.pred == "d")
        assert ground_atom("d", "a", "a", 8) not in model

    def test_negation_uses_lower_stratum(self):
        p = parse_program(".sort s {a,b}\n.decl e(s) edb\n.decl q(s) idb\n"
                          ".decl r(s) idb\n.decl u(s) edb\n"
                          "q(X) :- e(X).\nr(X) :- u(X), !q(X).")
        model = evaluate(p, frozenset({ground_atom("e", "a"), ground_atom("u", "a"),
                                       ground_atom("u", "b")}))
        assert {x for x in model if x.pred == "r"} == {ground_atom("r", "b")}

    @given(st.sets(st.tuples(st.sampled_from("v0 v1 v2".split()),
                             st.sampled_from("v0 v1 v2".split())), max_size=9))
    @settings(max_examples=40, deadline=None)
    def test_matches_warshall(self, edges):
        p = parse_program(TC_SOURCE)
        start = frozenset(ground_atom("e", a, b) for a, b in edges)
        model = evaluate(p, start)
        closure = set(edges)
        for _ in range(3):
            closure |= {(a, d) for a, b in closure for c, d in closure if b == c}
        assert {x for x in model if x.pred == "tc"} == \
            {ground_atom("tc", a, b) for a, b in closure}

    def test_deterministic(self, tc):
        inp = frozenset({ground_atom("e", "v0", "v1"), ground_atom("e", "v2", "v0")})
        assert evaluate(tc, inp) == evaluate(parse_program(TC_SOURCE), inp)


class TestProjectEdb:
    def test_paper_witness(self, tc):
        m = frozenset({ground_atom("e", "v0", "v1"), ground_atom("tc", "v0", "v1"),
                       ground_atom("tc", "v0", "v2")})
        assert project_edb(tc, m) == frozenset({ground_atom("e", "v0", "v1")})

    def test_idb_only(self, tc):
        assert project_edb(tc, frozenset({ground_atom("tc", "v0", "v1")})) == frozenset()

    def test_empty(self, tc):
        assert project_edb(tc, frozenset()) == frozenset()
