"""Tests for the first-order constraint layer: simplify, rewrite, holds."""
import itertools

import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

from dlsynth.constraints import (
    CAnd,
    CAtom,
    CCmp,
    CEq,
    CExists,
    CFalse,
    CForall,
    CNot,
    COr,
    CTrue,
    ClausalConstraint,
    ClauseExplosionError,
    ConstraintError,
    holds,
    rewrite,
    simplify,
    unrolled_name,
)
from dlsynth.datalog import Atom, Const, EnumSort, Literal, Var, ground_atom

NODE = EnumSort("node", ("v0", "v1", "v2"))
DOMAINS = {"node": NODE}


def atom(pred, *vals):
    return CAtom(Atom(pred, tuple(Const(v) if not str(v).isupper() else Var(v)
                                  for v in vals)))


# the canonical 2-literal constraint: no direct edge v0->v2, yet reachable
PHI_TC = CAnd((CNot(atom("e", "v0", "v2")), atom("tc", "v0", "v2")))


class TestSimplify:
    def test_forall_expands_to_unit_clauses(self):
        two = {"node": EnumSort("node", ("v0", "v1"))}
        c = CForall("X", "node", CNot(CAtom(Atom("loop", (Var("X"),)))))
        out = simplify(c, two)
        assert out.clauses == (
            (Literal(ground_atom("loop", "v0"), positive=False),),
            (Literal(ground_atom("loop", "v1"), positive=False),),
        )

    def test_phi_tc_two_unit_clauses(self):
        out = simplify(PHI_TC, DOMAINS)
        assert len(out.clauses) == 2
        assert all(len(cl) == 1 for cl in out.clauses)
        lits = set(out.literals())
        assert Literal(ground_atom("e", "v0", "v2"), positive=False) in lits
        assert Literal(ground_atom("tc", "v0", "v2")) in lits

    def test_exists_conjunction_single_domain_value(self):
        dom = {"s": EnumSort("s", ("a",))}
        c = CExists("X", "s", CAnd((CAtom(Atom("p", (Var("X"),))),
                                    CNot(CAtom(Atom("q", (Var("X"),)))))))
        out = simplify(c, dom)
        assert set(out.clauses) == {
            (Literal(ground_atom("p", "a")),),
            (Literal(ground_atom("q", "a"), positive=False),),
        }
        # oracle: agree with direct evaluation on all 4 interpretations
        universe = [ground_atom("p", "a"), ground_atom("q", "a")]
        for bits in itertools.product([0, 1], repeat=2):
            a = frozenset(at for at, b in zip(universe, bits) if b)
            assert holds(a, c, dom) == _holds_clausal(a, out)

    def test_ground_comparisons_fold(self):
        c = CAnd((CCmp("<", Const(1), Const(2)), atom("p", "v0")))
        assert simplify(c, DOMAINS).clauses == ((Literal(ground_atom("p", "v0")),),)
        c = COr((CEq(Const("a"), Const("b")), atom("p", "v0")))
        assert simplify(c, DOMAINS).clauses == ((Literal(ground_atom("p", "v0")),),)

    def test_contradiction_keeps_both_unit_clauses(self):
        out = simplify(CAnd((atom("p", "v0"), CNot(atom("p", "v0")))), DOMAINS)
        assert set(out.clauses) == {(Literal(ground_atom("p", "v0")),),
                                    (Literal(ground_atom("p", "v0"), positive=False),)}

    def test_false_gives_empty_clause(self):
        assert () in simplify(CFalse(), DOMAINS).clauses

    def test_tautological_clauses_dropped(self):
        out = simplify(COr((atom("p", "v0"), CNot(atom("p", "v0")))), DOMAINS)
        assert out.clauses == ()

    def test_free_variable_rejected(self):
        with pytest.raises(ConstraintError, match="free variable"):
            simplify(CAtom(Atom("p", (Var("X"),))), DOMAINS)

    def test_unknown_sort_rejected(self):
        with pytest.raises(ConstraintError, match="unknown sort"):
            simplify(CForall("X", "mystery", CTrue()), DOMAINS)

    def test_clause_cap(self):
        # (a1|b1) & ... expanded from exists-of-forall blows past a tiny cap
        big = CAnd(tuple(COr((atom("p", "v0"), atom("q", "v1"))) for _ in range(4)))
        simplify(big, DOMAINS)  # fine with default cap
        inner = COr(tuple(CAnd((atom(f"p{i}", "v0"), atom(f"q{i}", "v0"))) for i in range(8)))
        with pytest.raises(ClauseExplosionError):
            simplify(inner, DOMAINS, clause_cap=10)


def _holds_clausal(a, clausal):
    return all(any((lit.atom in a) == lit.positive for lit in clause)
               for clause in clausal.clauses)


# random constraint trees over 2 predicates and <= 3 values
_VALUES = ("v0", "v1", "v2")


def _terms():
    return st.one_of(st.sampled_from([Const(v) for v in _VALUES]),
                     st.sampled_from([Var("X"), Var("Y")]))


def _trees(depth):
    leaf = st.builds(lambda p, t: CAtom(Atom(p, (t,))), st.sampled_from(["p", "q"]),
                     _terms())
    if depth == 0:
        return leaf
    sub = _trees(depth - 1)
    return st.one_of(
        leaf,
        st.builds(CNot, sub),
        st.builds(lambda a, b: CAnd((a, b)), sub, sub),
        st.builds(lambda a, b: COr((a, b)), sub, sub),
        st.builds(lambda v, b: CForall(v, "node", b), st.sampled_from(["X", "Y"]), sub),
        st.builds(lambda v, b: CExists(v, "node", b), st.sampled_from(["X", "Y"]), sub),
    )


def _close(c):
    return CForall("X", "node", CForall("Y", "node", c))


class TestSimplifyPreservesSatisfaction:
    @given(_trees(3))
    @settings(max_examples=60, deadline=None)
    def test_exhaustive_small_universe(self, tree):
        c = _close(tree)
        clausal = simplify(c, DOMAINS)
        universe = [ground_atom(p, v) for p in ("p", "q") for v in _VALUES]
        for bits in itertools.product([0, 1], repeat=len(universe)):
            a = frozenset(at for at, b in zip(universe, bits) if b)
            assert holds(a, c, DOMAINS) == _holds_clausal(a, clausal)


class TestRewrite:
    def test_paper_tc_example(self):
        clausal = simplify(PHI_TC, DOMAINS)
        out = rewrite(clausal, 2, frozenset({"tc"}))
        text = str(out)
        assert unrolled_name("tc", 2) + "(v0,v2)" in text
        assert "!e(v0,v2)" in text
        assert "e@" not in text

    def test_purely_negative_unchanged(self):
        clausal = simplify(CNot(atom("tc", "v0", "v1")), DOMAINS)
        out = rewrite(clausal, 5, frozenset({"tc"}))
        assert "@" not in str(out)

    def test_homomorphic_literal_count(self):
        c = CAnd((COr((atom("tc", "v0", "v1"), CNot(atom("e", "v0", "v1")))),
                  COr((atom("e", "v1", "v2"), atom("tc", "v1", "v2")))))
        clausal = simplify(c, DOMAINS)
        out = rewrite(clausal, 3, frozenset({"tc"}))
        n_lits = sum(len(cl) for cl in clausal.clauses)
        assert str(out).count("(v") == n_lits
        assert str(out).count("@3") == 2

    def test_k_must_be_positive(self):
        with pytest.raises(ConstraintError):
            rewrite(ClausalConstraint(()), 0, frozenset())


class TestHolds:
    def test_canonical_witness(self):
        a = frozenset({ground_atom("tc", "v0", "v2")})
        assert holds(a, PHI_TC, DOMAINS)

    def test_closed_world_negation(self):
        assert holds(frozenset(), CNot(atom("p", "v0")), DOMAINS)

    def test_single_edge_model_violates(self):
        a = frozenset({ground_atom("e", "v0", "v1"), ground_atom("tc", "v0", "v1")})
        assert not holds(a, PHI_TC, DOMAINS)

    def test_quantifiers(self):
        a = frozenset({ground_atom("p", v) for v in _VALUES})
        assert holds(a, CForall("X", "node", CAtom(Atom("p", (Var("X"),)))), DOMAINS)
        assert not holds(frozenset(), CExists("X", "node",
                                              CAtom(Atom("p", (Var("X"),)))), DOMAINS)

    def test_comparisons(self):
        assert holds(frozenset(), CCmp("<", Const(1), Const(2)), DOMAINS)
        assert not holds(frozenset(), CCmp("<", Const(2), Const(2)), DOMAINS)
        assert holds(frozenset(), CCmp("<=", Const(2), Const(2)), DOMAINS)
        assert holds(frozenset(), CEq(Const("a"), Const("a")), DOMAINS)


class TestMonotonicityClassification:
    def test_negative_clause_downward_closed(self):
        universe = [ground_atom("p", v) for v in _VALUES]
        c = COr((CNot(atom("p", "v0")), CNot(atom("p", "v1"))))
        for bits in itertools.product([0, 1], repeat=3):
            a = frozenset(at for at, b in zip(universe, bits) if b)
            if holds(a, c, DOMAINS):
                for sub_bits in itertools.product([0, 1], repeat=3):
                    sub = frozenset(at for at, b in zip(universe, sub_bits) if b)
                    if sub <= a:
                        assert holds(sub, c, DOMAINS)

    def test_positive_clause_upward_closed(self):
        universe = [ground_atom("p", v) for v in _VALUES]
        c = COr((atom("p", "v0"), atom("p", "v1")))
        for bits in itertools.product([0, 1], repeat=3):
            a = frozenset(at for at, b in zip(universe, bits) if b)
            if holds(a, c, DOMAINS):
                for sup_bits in itertools.product([0, 1], repeat=3):
                    sup = frozenset(at for at, b in zip(universe, sup_bits) if b)
                    if sup >= a:
                        assert holds(sup, c, DOMAINS)
