"""Post-hoc audit of SHIQ completion trees: completeness, clash-freeness, invariants."""

from __future__ import annotations

from dataclasses import dataclass, field

from .completion import CompletionTree, clash_reason
from .shiq import (
    find_choose,
    find_deterministic,
    find_generating,
    find_merge,
    find_or,
)
from .syntax import Concept, RoleBox, extended_closure, nnf, roles_in


@dataclass(frozen=True)
class Violation:
    kind: str
    node: int | None
    detail: str

    def __str__(self):
        where = "" if self.node is None else f" at node {self.node}"
        return f"{self.kind}{where}: {self.detail}"


@dataclass
class AuditReport:
    violations: list[Violation] = field(default_factory=list)

    @property
    def ok(self) -> bool:
        return not self.violations

    @property
    def first(self) -> Violation | None:
        return self.violations[0] if self.violations else None

    def add(self, kind, node, detail):
        self.violations.append(Violation(kind, node, detail))

    def __bool__(self):
        return self.ok

    def __str__(self):
        if self.ok:
            return "ok"
        return "\n".join(map(str, self.violations))


def _structure(tree: CompletionTree, rep: AuditReport, allowed, roles) -> None:
    nodes = tree.nodes
    if tree.root not in nodes or nodes[tree.root].parent is not None:
        rep.add("structure", tree.root, "root missing or has a parent")
        return
    seen = set()
    todo = [tree.root]
    while todo:
        x = todo.pop()
        if x in seen:
            rep.add("structure", x, "node reachable twice (cycle or shared child)")
            continue
        seen.add(x)
        n = nodes[x]
        for c in n.children:
            if c not in nodes:
                rep.add("structure", x, f"dangling child {c}")
                continue
            m = nodes[c]
            if m.parent != x:
                rep.add("structure", c, f"parent pointer {m.parent} but listed under {x}")
            if m.depth != n.depth + 1:
                rep.add("structure", c, f"depth {m.depth} under a parent of depth {n.depth}")
            todo.append(c)
    for x in nodes:
        if x not in seen:
            rep.add("structure", x, "node not reachable from the root")
    for x, n in nodes.items():
        stray = [c for c in n.label if c not in allowed]
        if stray:
            rep.add("label", x, "concepts outside the closure: " + ", ".join(c.show() for c in stray))
        bad = [r for r in n.edge if r not in roles]
        if bad:
            rep.add("edge", x, "unknown roles: " + ", ".join(r.show() for r in bad))
    for a, b in tree.distinct:
        if a == b:
            rep.add("distinct", a, "≠ is not irreflexive")
        elif a > b:
            rep.add("distinct", a, f"pair ({a}, {b}) not stored in canonical order")
        if a not in nodes or b not in nodes:
            rep.add("distinct", a, f"pair ({a}, {b}) mentions a missing node")


def validate_completion_tree(tree: CompletionTree, d: Concept, rbox: RoleBox) -> AuditReport:
    """Check that ``tree`` is a complete, clash-free completion tree for ``d``.

    Violations are listed in the order: structure, root label, clashes,
    then the first applicable rule (if any), so ``report.first`` is the most
    basic problem.
    """
    d = nnf(d)
    rbox = rbox.with_roles(roles_in(d))
    rep = AuditReport()
    _structure(tree, rep, extended_closure(d, rbox), rbox.roles)
    if not rep.ok:
        return rep
    if d not in tree.label(tree.root):
        rep.add("root", tree.root, f"{d.show()} missing from the root label")
    for x in tree.order():
        why = clash_reason(tree, x, rbox)
        if why:
            rep.add("clash", x, why)
    finders = [
        ("⊓/∀/∀₊", lambda: find_deterministic(tree, rbox)),
        ("choose", lambda: find_choose(tree, rbox)),
        ("⊔", lambda: find_or(tree, rbox)),
        ("≤", lambda: find_merge(tree, rbox)),
        ("∃/≥", lambda: find_generating(tree, rbox)),
    ]
    for name, find in finders:
        act = find()
        if act:
            first = act[0] if isinstance(act, list) else act
            rep.add("incomplete", first.node, f"{first.rule}-rule still applicable")
    return rep
