"""The SI engine: B-labels, blocking, upward propagation and the reset variant."""

import random

import pytest

from conftest import C
from shiqtab.errors import NotSiConcept
from shiqtab.oracle import find_model
from shiqtab.randgen import random_si
from shiqtab.shiq import SAT, UNSAT, decide_sat
from shiqtab.si import (
    SiTree, find_si_exists, si_apply_rules, si_decide_sat, si_decide_sat_trace, si_is_blocked,
    si_path_violations,
)
from shiqtab.syntax import Atom, Exists, Forall, Or, Role, close_hierarchy, inv
from shiqtab.trace import Tracer

R = Role("R")
A, B = Atom("A"), Atom("B")


def printed_path_violations(tree):
    # same check, but with the filler that created the *later* node
    out = []
    for y, n in tree.nodes.items():
        if n.parent is None or n.role.name not in tree.transitive:
            continue
        x = tree.nodes[n.parent]
        if x.parent is not None and x.role is n.role and not x.B <= n.B | {n.filler}:
            out.append((x.id, y))
    return out


class TestBlocking:
    def test_subset_blocks(self):
        t = SiTree(A)
        t.add_L(0, B)
        y = t.new_child(0, R, A)
        assert si_is_blocked(t, y)

    def test_restriction_must_match(self):
        t = SiTree(A)
        t.add_L(0, B)
        y = t.new_child(0, R, A)
        t.add_L(y, Forall(inv(R), A))
        assert not si_is_blocked(t, y)

    def test_below_blocked(self):
        t = SiTree(A)
        y = t.new_child(0, R, A)
        z = t.new_child(y, R, B)
        assert si_is_blocked(t, y) and si_is_blocked(t, z)


class TestRules:
    def test_forall_successor_updates_b(self):
        t = SiTree(Forall(R, A))
        y = t.new_child(0, R, B)
        (t2,) = si_apply_rules(t)
        assert A in t2.nodes[y].L and A in t2.nodes[y].B

    def test_forall_predecessor_updates_l_only(self):
        t = SiTree(B)
        t.new_child(0, R, Forall(inv(R), A))
        (t2,) = si_apply_rules(t)
        assert A in t2.nodes[0].L
        assert A not in t2.nodes[0].B

    def test_exists_waits_for_or(self):
        t = SiTree(Exists(R, A))
        t.add_L(0, Or(A, B))
        alts = si_apply_rules(t)
        assert len(alts) == 2
        assert all(len(a.nodes) == 1 for a in alts)
        assert find_si_exists(alts[0]) is not None

    def test_fixpoint(self):
        assert si_apply_rules(SiTree(A)) == []


class TestDecide:
    def test_unsat(self):
        assert si_decide_sat(C("(and (some R A) (all R (not A)))")).answer == UNSAT

    def test_transitive_loop(self):
        v = si_decide_sat(C("(and (some R A) (all R (some R A)))"), {"R"})
        assert v.answer == SAT
        assert any(si_is_blocked(v.witness, x) for x in v.witness.nodes)

    def test_upward_propagation(self):
        c = C("(and (some (inv R) (all R (not A))) A)")
        assert si_decide_sat(c).answer == UNSAT
        assert si_decide_sat_trace(c).answer == UNSAT
        assert find_model(c, max_domain=3) is None

    def test_trace_variant_same_answers(self):
        for text, trans in [("(and (some R A) (all R (not A)))", ()),
                            ("(and (some R A) (all R (some R A)))", {"R"}),
                            ("(and (some (inv R) (all R (not A))) A)", ())]:
            c = C(text)
            assert si_decide_sat(c, trans).answer == si_decide_sat_trace(c, trans).answer

    def test_reset_recorded(self):
        c = C("(and (some (inv R) (all R (not A))) (some R B))")
        tr = Tracer()
        v = si_decide_sat_trace(c, tracer=tr)
        assert v.sat and v.witness is None
        assert v.stats.resets >= 1
        resets = tr.of_kind("reset")
        assert resets
        deleted = set(resets[0].nodes[1:])
        later = {e.nodes[0] for e in tr.events if e.kind == "node" and e.step > resets[0].step}
        assert deleted and later and not (deleted & later)

    def test_no_inverse_no_reset(self):
        v = si_decide_sat_trace(C("(and (some R A) (all R (some S B)))"), {"R"})
        assert v.stats.resets == 0

    def test_rejects_number_restrictions(self):
        with pytest.raises(NotSiConcept):
            si_decide_sat(C("(at-most 1 R A)"))

    def test_rejects_hierarchy(self):
        rb = close_hierarchy((), [(Role("F"), R)])
        with pytest.raises(NotSiConcept):
            si_decide_sat(A, rb)

    def test_agrees_with_shiq_engine(self):
        rng = random.Random(2)
        for _ in range(80):
            c, trans = random_si(rng)
            a = si_decide_sat(c, trans, check_bounds=True).answer
            assert a == si_decide_sat_trace(c, trans, check_bounds=True).answer
            assert a == decide_sat(c, close_hierarchy(trans)).answer, c.show()


class TestPathProperty:
    def test_corrected_form_holds(self):
        rng = random.Random(6)
        for _ in range(150):
            c, trans = random_si(rng)
            v = si_decide_sat(c, trans)
            if v.sat:
                assert si_path_violations(v.witness) == []

    def test_printed_form_fails(self):
        # the B-label of x_i may hold the ∃-filler that created x_i, not x_{i+1}
        v = si_decide_sat(C("(and (some R A) (all R (some R B)))"), {"R"})
        assert si_path_violations(v.witness) == []
        assert printed_path_violations(v.witness)
