import pytest
from hypothesis import strategies as st

from shiqtab.kbfile import parse_concept
from shiqtab.syntax import (
    BOTTOM, TOP, And, Atom, AtLeast, AtMost, Exists, Forall, Not, Or, Role, close_hierarchy,
)


def C(text):
    """Concept from s-expression text."""
    return parse_concept(text)


def rbox(transitive=(), inclusions=()):
    """Role box from names and (sub, super) pairs; '-' suffix means inverse."""
    def role(s):
        return Role(s[:-1], True) if s.endswith("-") else Role(s)
    return close_hierarchy(transitive, [(role(a), role(b)) for a, b in inclusions])


ROLES = [Role("R"), Role("S"), Role("R", True)]


def concepts(atoms=("A", "B"), roles=ROLES, counting=True, max_leaves=8):
    leaf = st.sampled_from([Atom(a) for a in atoms] + [TOP, BOTTOM])
    role = st.sampled_from(roles)

    def extend(inner):
        opts = [
            st.builds(Not, inner),
            st.builds(And, inner, inner),
            st.builds(Or, inner, inner),
            st.builds(Exists, role, inner),
            st.builds(Forall, role, inner),
        ]
        if counting:
            opts += [st.builds(AtLeast, st.integers(0, 2), role, inner),
                     st.builds(AtMost, st.integers(0, 2), role, inner)]
        return st.one_of(opts)

    return st.recursive(leaf, extend, max_leaves=max_leaves)


INFMODEL = ("(and (not C) (some (inv F) (and C (at-most 1 F)))"
            " (all (inv R) (some (inv F) (and C (at-most 1 F)))))")


@pytest.fixture
def infmodel():
    return C(INFMODEL), rbox(["R"], [("F", "R")])
