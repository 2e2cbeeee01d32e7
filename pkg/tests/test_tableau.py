"""Completion-tree audit, tableau properties and unravelling of witnesses."""

import random
from dataclasses import replace

import pytest

from conftest import C, rbox
from shiqtab.audit import extended_closure, validate_completion_tree
from shiqtab.completion import CompletionTree
from shiqtab.oracle import find_model
from shiqtab.randgen import random_alc, random_shiq
from shiqtab.shiq import decide_sat
from shiqtab.syntax import EMPTY_RBOX, And, Atom, Forall, Not, Role, closure, nnf
from shiqtab.tableau import (
    block_distance, embeds, model_to_tableau, unravel_witness, validate_tableau,
)

R, S = Role("R"), Role("S")
A, B = Atom("A"), Atom("B")


class TestAudit:
    def test_witness_passes(self):
        c = C("(some R A)")
        v = decide_sat(c)
        rep = validate_completion_tree(v.witness, c, EMPTY_RBOX)
        assert rep.ok and str(rep) == "ok"

    def test_clash_detected(self):
        t = CompletionTree([A, Not(A), And(A, Not(A))])
        rep = validate_completion_tree(t, And(A, Not(A)), EMPTY_RBOX)
        assert [v.kind for v in rep.violations] == ["clash"]

    def test_incomplete_detected(self):
        c = And(A, B)
        rep = validate_completion_tree(CompletionTree([c]), c, EMPTY_RBOX)
        assert rep.first.kind == "incomplete"
        assert "⊓" in rep.first.detail

    def test_missing_root_concept(self):
        rep = validate_completion_tree(CompletionTree([A]), C("(or A B)"), EMPTY_RBOX)
        assert rep.first.kind == "root"

    def test_label_outside_closure(self):
        rep = validate_completion_tree(CompletionTree([A, B]), A, EMPTY_RBOX)
        assert rep.first.kind == "label"

    def test_extended_closure_adds_transitive_forms(self):
        rb = rbox(["R"], [("R", "S")])
        ext = extended_closure(nnf(Forall(S, A)), rb)
        assert Forall(R, A) in ext
        assert Forall(R, A) not in closure(Forall(S, A))


class TestTableauProperties:
    def test_model_to_tableau(self):
        c = C("(and (some R A) (all R B) (at-most 1 R top))")
        m = find_model(c, max_domain=3)
        t = model_to_tableau(m, c, EMPTY_RBOX)
        assert validate_tableau(t, c, EMPTY_RBOX).ok

    def test_model_to_tableau_random(self):
        rng = random.Random(5)
        for _ in range(40):
            c, rb = random_shiq(rng)
            m = find_model(c, rb, max_domain=3)
            if m is not None:
                rep = validate_tableau(model_to_tableau(m, c, rb), c, rb)
                assert rep.ok, (c.show(), str(rep))

    def test_inverse_symmetry_broken(self):
        c = C("(some R A)")
        t = model_to_tableau(find_model(c, max_domain=2, min_domain=2), c, EMPTY_RBOX)
        edges = dict(t.edges)
        edges[R.inv] = frozenset()
        rep = validate_tableau(replace(t, edges=edges), c, EMPTY_RBOX)
        assert "property 7" in {v.kind for v in rep.violations}

    def test_complementary_label(self):
        c = C("(some R A)")
        t = model_to_tableau(find_model(c, max_domain=2), c, EMPTY_RBOX)
        labels = dict(t.labels)
        x = t.individuals[0]
        labels[x] = labels[x] | {A, Not(A)}
        rep = validate_tableau(replace(t, labels=labels), c, EMPTY_RBOX)
        assert "property 1" in {v.kind for v in rep.violations}


class TestUnravel:
    def test_finite_witness_full(self):
        c = C("(and (some R (and A (some S B))) (all R (some R top)))")
        v = decide_sat(c)
        tree = v.witness
        assert not any(s.blocked for s in tree.blocking().values())
        t = unravel_witness(tree, c, EMPTY_RBOX, tree.max_depth() + 1)
        assert len(t.individuals) == len(tree.nodes)
        assert not t.frontier
        assert validate_tableau(t, c, EMPTY_RBOX).ok

    def test_budget_zero(self):
        c = C("(and A (some R B))")
        t = unravel_witness(decide_sat(c).witness, c, EMPTY_RBOX, 0)
        assert len(t.individuals) == 1
        assert t.frontier == set(t.individuals)
        rep = validate_tableau(t, c, EMPTY_RBOX)
        assert rep.ok

    def test_infinite_model_budgets(self, infmodel):
        c, rb = infmodel
        tree = decide_sat(c, rb).witness
        k = block_distance(tree)
        sizes = []
        prev = None
        for m in (1, 2, 3):
            t = unravel_witness(tree, c, rb, m * k)
            assert validate_tableau(t, c, rb).ok
            sizes.append(len(t.individuals))
            if prev is not None:
                assert embeds(prev, t)
            prev = t
        assert sizes[0] < sizes[1] < sizes[2]

    def test_rejects_invalid_tree(self):
        with pytest.raises(ValueError):
            unravel_witness(CompletionTree([And(A, B)]), And(A, B), EMPTY_RBOX, 1)

    def test_random_witnesses(self):
        rng = random.Random(9)
        for _ in range(40):
            c = random_alc(rng)
            v = decide_sat(c)
            if not v.sat:
                continue
            k = block_distance(v.witness)
            for m in (1, 2, 3):
                assert validate_tableau(unravel_witness(v.witness, c, EMPTY_RBOX, m * k), c, EMPTY_RBOX).ok
