"""Seeded random concepts, role boxes and terminologies for the test corpora."""

from __future__ import annotations

import random
from dataclasses import dataclass

from .kb import Terminology
from .syntax import (
    BOTTOM,
    TOP,
    And,
    Atom,
    AtLeast,
    AtMost,
    Concept,
    EMPTY_RBOX,
    Exists,
    Forall,
    Not,
    Or,
    Role,
    RoleBox,
    close_hierarchy,
    is_simple,
)


@dataclass
class ConceptShape:
    atoms: tuple[str, ...] = ("A", "B", "C")
    roles: tuple[Role, ...] = (Role("R"), Role("S"))
    depth: int = 3
    # roles allowed in number restrictions (empty: no counting)
    counting: tuple[Role, ...] = ()
    max_n: int = 2
    leaf_bias: float = 0.12
    negate_complex: bool = True
    constants: bool = False
    weights: tuple[tuple[str, int], ...] = (("and", 4), ("or", 2), ("some", 3), ("all", 3),
                                           ("at-least", 2), ("at-most", 2), ("not", 1))


def random_concept(rng: random.Random, shape: ConceptShape, depth: int | None = None) -> Concept:
    depth = shape.depth if depth is None else depth
    if depth == 0 or rng.random() < shape.leaf_bias * (1 if depth < shape.depth else 0):
        if shape.constants and rng.random() < 0.08:
            return rng.choice((TOP, BOTTOM))
        a = Atom(rng.choice(shape.atoms))
        return Not(a) if rng.random() < 0.4 else a
    pool = [(op, w) for op, w in shape.weights
            if (shape.counting or op not in ("at-least", "at-most"))
            and (shape.negate_complex or op != "not")]
    op = rng.choices([o for o, _ in pool], [w for _, w in pool])[0]
    sub = depth - 1
    if op == "and":
        return And(random_concept(rng, shape, sub), random_concept(rng, shape, sub))
    if op == "or":
        return Or(random_concept(rng, shape, sub), random_concept(rng, shape, sub))
    if op == "not":
        return Not(random_concept(rng, shape, sub))
    if op in ("some", "all"):
        r = rng.choice(shape.roles)
        f = random_concept(rng, shape, sub)
        return Exists(r, f) if op == "some" else Forall(r, f)
    r = rng.choice(shape.counting)
    n = rng.randint(0 if op == "at-most" else 1, shape.max_n)
    f = TOP if rng.random() < 0.3 else random_concept(rng, shape, sub)
    return (AtLeast if op == "at-least" else AtMost)(n, r, f)


def random_modal(rng: random.Random, shape: ConceptShape, depth: int | None = None,
                 boolean: int = 2) -> Concept:
    """Concept whose quantifier nesting is at most ``depth``.

    Up to ``boolean`` connectives may stack between two quantifier levels,
    so the result is much richer than a syntax tree of the same depth.
    """
    depth = shape.depth if depth is None else depth
    quantifiers = ["some", "all"] + (["at-least", "at-most"] if shape.counting else [])
    choices = []
    for op, w in shape.weights:
        if op in ("and", "or") and boolean > 0:
            choices.append((op, w))
        elif op == "not" and boolean > 0 and shape.negate_complex:
            choices.append((op, w))
        elif op in quantifiers and depth > 0:
            choices.append((op, w))
    choices.append(("leaf", 3))
    op = rng.choices([o for o, _ in choices], [w for _, w in choices])[0]
    if op == "leaf":
        if shape.constants and rng.random() < 0.08:
            return rng.choice((TOP, BOTTOM))
        a = Atom(rng.choice(shape.atoms))
        return Not(a) if rng.random() < 0.4 else a
    if op in ("and", "or"):
        parts = [random_modal(rng, shape, depth, boolean - 1) for _ in range(2)]
        return And(*parts) if op == "and" else Or(*parts)
    if op == "not":
        return Not(random_modal(rng, shape, depth, boolean - 1))
    r = rng.choice(shape.roles if op in ("some", "all") else shape.counting)
    f = random_modal(rng, shape, depth - 1, max(boolean, 1))
    if op == "some":
        return Exists(r, f)
    if op == "all":
        return Forall(r, f)
    n = rng.randint(0 if op == "at-most" else 1, shape.max_n)
    if rng.random() < 0.3:
        f = TOP
    return (AtLeast if op == "at-least" else AtMost)(n, r, f)


def random_alc(rng: random.Random, depth: int = 3, atoms: int = 3, roles: int = 2,
               conjuncts: int = 2, boolean: int = 1) -> Concept:
    """Conjunction of a few random concepts, quantifier depth ≤ ``depth``."""
    shape = ConceptShape(atoms=("A", "B", "C")[:atoms],
                         roles=(Role("R"), Role("S"))[:roles], depth=depth)
    k = rng.randint(1, conjuncts)
    out = random_modal(rng, shape, boolean=boolean)
    for _ in range(k - 1):
        out = And(out, random_modal(rng, shape, boolean=boolean))
    return out


def random_rbox(rng: random.Random, names=("R", "S", "T")) -> RoleBox:
    """A small hierarchy: random transitive names and up to two inclusions."""
    trans = [n for n in names if rng.random() < 0.35]
    incl = []
    for _ in range(rng.randint(0, 2)):
        a, b = rng.sample(names, 2)
        incl.append((Role(a, rng.random() < 0.3), Role(b)))
    return close_hierarchy(trans, incl, [Role(n) for n in names])


def random_shiq(rng: random.Random, depth: int = 3) -> tuple[Concept, RoleBox]:
    """Concept plus role box; counting only on roles that are simple in that box."""
    rbox = random_rbox(rng)
    roles = tuple(Role(n, inv) for n in ("R", "S", "T") for inv in (False, True))
    counting = tuple(r for r in roles if is_simple(r, rbox))
    shape = ConceptShape(atoms=("A", "B"), roles=roles, depth=depth, counting=counting)
    c = random_modal(rng, shape, boolean=1)
    if rng.random() < 0.6:
        c = And(c, random_modal(rng, shape, boolean=1))
    return c, rbox


def random_si(rng: random.Random, depth: int = 4) -> tuple[Concept, frozenset[str]]:
    names = ("R", "S")
    trans = frozenset(n for n in names if rng.random() < 0.5)
    roles = tuple(Role(n, inv) for n in names for inv in (False, True))
    shape = ConceptShape(atoms=("A", "B", "C"), roles=roles, depth=depth)
    c = random_modal(rng, shape, boolean=1)
    if rng.random() < 0.6:
        c = And(c, random_modal(rng, shape, boolean=1))
    return c, trans


def random_terminology(rng: random.Random, max_gcis: int = 2, depth: int = 2) -> Terminology:
    shape = ConceptShape(atoms=("A", "B", "C"), roles=(Role("R"), Role("S")), depth=depth)
    gcis = []
    for _ in range(rng.randint(1, max_gcis)):
        lhs = random_concept(rng, ConceptShape(atoms=shape.atoms, roles=shape.roles, depth=1))
        gcis.append((lhs, random_concept(rng, shape)))
    return Terminology(tuple(gcis), EMPTY_RBOX)
