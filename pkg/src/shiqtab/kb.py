"""Terminologies, internalisation into a single concept, subsumption and classification."""

from __future__ import annotations

from dataclasses import dataclass, field
from typing import Iterable, Mapping

from .errors import NonSimpleRoleInNumberRestriction, NotSiConcept
from .shiq import EngineVerdict, decide_sat
from .syntax import (
    TOP,
    And,
    Concept,
    EMPTY_RBOX,
    Forall,
    Not,
    Or,
    Role,
    RoleBox,
    check_simple_number_restrictions,
    close_hierarchy,
    closure,
    conjunction,
    nnf,
    roles_in,
)

RESERVED_PREFIX = "__"
UNIVERSAL_ROLE_NAME = "__U"


@dataclass(frozen=True)
class Terminology:
    """A finite set of GCIs C ⊑ D together with a role box."""

    gcis: tuple[tuple[Concept, Concept], ...] = ()
    rbox: RoleBox = EMPTY_RBOX

    def __post_init__(self):
        object.__setattr__(self, "gcis", tuple((c, d) for c, d in self.gcis))
        used = set()
        for c, d in self.gcis:
            used |= roles_in(c) | roles_in(d)
        object.__setattr__(self, "rbox", self.rbox.with_roles(used))

    def roles(self) -> frozenset[Role]:
        return self.rbox.roles

    def internal_concept(self) -> Concept:
        """C_T: the conjunction of ¬C ⊔ D over all GCIs (⊤ when there are none)."""
        return conjunction(Or(Not(c), d) for c, d in self.gcis)


@dataclass(frozen=True)
class InternalisedProblem:
    goal: Concept
    rbox_u: RoleBox
    universal_role: Role


def _fresh_universal(names: Iterable[str]) -> Role:
    taken = set(names)
    name, k = UNIVERSAL_ROLE_NAME, 0
    while name in taken:
        k += 1
        name = f"{UNIVERSAL_ROLE_NAME}{k}"
    return Role(name)


def _internalise(t: Terminology, query: Concept) -> InternalisedProblem:
    sources = set(t.rbox.roles) | set(roles_in(query))
    u = _fresh_universal(r.name for r in sources)
    names = sorted({r.name for r in sources})
    incl = set(t.rbox.inclusions)
    for n in names:
        incl.add((Role(n), u))
        incl.add((Role(n, True), u))
    rbox_u = close_hierarchy(t.rbox.transitive_roles | {u.name}, incl, sources | {u})
    ct = t.internal_concept()
    goal = nnf(And(query, And(ct, Forall(u, ct))))
    return InternalisedProblem(goal, rbox_u, u)


def internalise_sat(t: Terminology, c: Concept) -> InternalisedProblem:
    """goal = nnf(C ⊓ C_T ⊓ ∀U.C_T) with a fresh transitive U above every role."""
    return _internalise(t, c)


def internalise_subsumes(t: Terminology, c: Concept, d: Concept) -> InternalisedProblem:
    """``c`` ⊑ ``d`` w.r.t. ``t`` iff the returned goal is unsatisfiable."""
    return _internalise(t, And(c, Not(d)))


def is_satisfiable(t: Terminology, c: Concept, *, engine: str = "shiq", **options) -> EngineVerdict:
    if engine == "si":
        from .si import si_decide_sat
        if t.gcis:
            raise NotSiConcept("the SI engine takes no terminology; internalisation needs a role hierarchy")
        if not t.rbox.is_flat:
            raise NotSiConcept("the SI engine does not accept a role hierarchy")
        return si_decide_sat(c, t.rbox.transitive_roles, **options)
    if engine != "shiq":
        raise ValueError(f"unknown engine {engine!r}")
    p = internalise_sat(t, c)
    return decide_sat(p.goal, p.rbox_u, **options)


def subsumes(t: Terminology, c: Concept, d: Concept, *, engine: str = "shiq", **options) -> bool:
    """Does ``d`` subsume ``c`` (c ⊑ d) with respect to ``t``?"""
    return not is_satisfiable(t, And(c, Not(d)), engine=engine, **options).sat


# ---------------------------------------------------------------- classification


@dataclass
class Hierarchy:
    """Subsumption preorder over named concepts; ``pairs`` holds (sub, super)."""

    names: tuple[str, ...]
    pairs: frozenset[tuple[str, str]]
    tests: int = 0
    unsatisfiable: frozenset[str] = field(default_factory=frozenset)

    def subsumes(self, sup: str, sub: str) -> bool:
        return (sub, sup) in self.pairs

    def supers(self, name: str) -> list[str]:
        return [b for b in self.names if (name, b) in self.pairs]

    def equivalents(self, name: str) -> list[str]:
        return [b for b in self.names if (name, b) in self.pairs and (b, name) in self.pairs]

    def classes(self) -> list[tuple[str, ...]]:
        seen, out = set(), []
        for n in self.names:
            if n not in seen:
                cls = tuple(self.equivalents(n))
                seen.update(cls)
                out.append(cls)
        return out

    def direct_parents(self, cls: tuple[str, ...]) -> list[tuple[str, ...]]:
        rep = cls[0]
        strict = [c for c in self.classes() if c != cls and self.subsumes(c[0], rep)
                  and not self.subsumes(rep, c[0])]
        return [c for c in strict
                if not any(o != c and self.subsumes(o[0], rep) and self.subsumes(c[0], o[0])
                           and not self.subsumes(o[0], c[0]) for o in strict)]

    def to_text(self, indent: str = "  ") -> str:
        """Indented tree: each class under each of its direct parents."""
        classes = self.classes()
        kids: dict[tuple, list[tuple]] = {c: [] for c in classes}
        roots = []
        for c in classes:
            parents = self.direct_parents(c)
            if not parents:
                roots.append(c)
            for p in parents:
                kids[p].append(c)
        lines = []

        def show(c, depth):
            lines.append(indent * depth + " = ".join(c))
            for k in kids[c]:
                show(k, depth + 1)
        for r in roots:
            show(r, 0)
        return "\n".join(lines) + ("\n" if lines else "")


def _conjuncts(c: Concept) -> set[Concept]:
    out, todo = set(), [c]
    while todo:
        x = todo.pop()
        if isinstance(x, And):
            todo += [x.left, x.right]
        else:
            out.add(x)
    return out


def _told(a: Concept, b: Concept) -> bool:
    """Syntactic subsumption: b's conjuncts all occur among a's."""
    return b is TOP or _conjuncts(nnf(b)) <= _conjuncts(nnf(a))


def classify(t: Terminology, names: Mapping[str, Concept] | Iterable[tuple[str, Concept]], *,
             exhaustive: bool = False, engine: str = "shiq", **options) -> Hierarchy:
    """Compute the subsumption preorder among the named concepts.

    Unless ``exhaustive``, known answers are reused: told subsumptions are
    accepted without a test, positive results are closed transitively, and a
    known ``c ⊑ a`` with ``c ⋢ b`` rules out ``a ⊑ b``.
    """
    defs = dict(names.items() if isinstance(names, Mapping) else names)
    order = tuple(defs)

    for n in order:
        try:
            probe = internalise_sat(t, defs[n])
            check_simple_number_restrictions(closure(probe.goal), probe.rbox_u)
        except NonSimpleRoleInNumberRestriction as e:
            raise NonSimpleRoleInNumberRestriction(e.role, e.concept, where=f"definition of {n}") from None

    yes: set[tuple[str, str]] = {(n, n) for n in order}
    no: set[tuple[str, str]] = set()
    tests = 0
    unsat = set()
    for n in order:
        tests += 1
        if not is_satisfiable(t, defs[n], engine=engine, **options).sat:
            unsat.add(n)

    def close():
        changed = True
        while changed:
            changed = False
            for a, b in list(yes):
                for c, e in list(yes):
                    if b == c and (a, e) not in yes:
                        yes.add((a, e))
                        changed = True

    for a in order:
        for b in order:
            if a == b or (a, b) in yes or (a, b) in no:
                continue
            if not exhaustive:
                if a in unsat or _told(defs[a], defs[b]):
                    yes.add((a, b))
                    close()
                    continue
                if any((c, a) in yes and (c, b) in no for c in order):
                    no.add((a, b))
                    continue
            tests += 1
            if a in unsat or subsumes(t, defs[a], defs[b], engine=engine, **options):
                yes.add((a, b))
                if not exhaustive:
                    close()
            else:
                no.add((a, b))
    return Hierarchy(order, frozenset(yes), tests, frozenset(unsat))
