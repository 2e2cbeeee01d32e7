"""Tableau structures: the property checker, model-to-tableau, and witness unravelling."""

from __future__ import annotations

from collections import defaultdict
from dataclasses import dataclass, field
from typing import Any, Hashable

from .audit import AuditReport, extended_closure, validate_completion_tree
from .completion import CompletionTree
from .errors import BudgetExceeded
from .oracle import Interpretation, eval_concept
from .syntax import (
    And,
    AtLeast,
    AtMost,
    Bottom,
    Concept,
    Exists,
    Forall,
    NumberRestriction,
    Or,
    Role,
    RoleBox,
    neg,
    nnf,
    roles_in,
)

ALL_PROPERTIES = tuple(range(1, 12))
SI_PROPERTIES = tuple(range(1, 8))


@dataclass
class TableauStructure:
    """Individuals, their labels, and one edge set per role (inverses included).

    ``frontier`` holds individuals whose successors were cut off by a depth
    budget; they are exempt from the ∃ and ≥ witnessing properties.
    """

    individuals: tuple[Hashable, ...]
    labels: dict[Hashable, frozenset[Concept]]
    edges: dict[Role, frozenset[tuple[Hashable, Hashable]]]
    frontier: frozenset = field(default_factory=frozenset)

    def __len__(self):
        return len(self.individuals)

    def successors(self, s, r: Role) -> list:
        return [b for a, b in self.edges.get(r, ()) if a == s]


def _edge_index(t: TableauStructure):
    idx: dict[Role, dict[Any, set]] = defaultdict(lambda: defaultdict(set))
    for r, pairs in t.edges.items():
        for a, b in pairs:
            idx[r][a].add(b)
    return idx


def validate_tableau(t: TableauStructure, d: Concept, rbox: RoleBox, *, si: bool = False,
                     allowed: frozenset[Concept] | None = None) -> AuditReport:
    """Report every violated tableau property (1-11, or 1-7 when ``si``).

    Also requires that some individual carries ``d`` and that labels stay
    within ``allowed`` (default: the closure extended with the ∀R.C forms
    introduced through transitive sub-roles).
    """
    d = nnf(d)
    rbox = rbox.with_roles(roles_in(d))
    props = SI_PROPERTIES if si else ALL_PROPERTIES
    allowed = extended_closure(d, rbox) if allowed is None else allowed
    roles = rbox.roles
    rep = AuditReport()
    idx = _edge_index(t)
    members = set(t.individuals)

    if not any(d in t.labels.get(s, ()) for s in t.individuals):
        rep.add("root", None, f"no individual carries {d.show()}")
    for r, pairs in t.edges.items():
        if r not in roles:
            rep.add("edges", None, f"edge set for unknown role {r.show()}")
        for a, b in pairs:
            if a not in members or b not in members:
                rep.add("edges", a, f"{r.show()}-edge to a missing individual")

    def succ(s, r):
        return idx[r][s] if r in idx and s in idx[r] else ()

    for s in t.individuals:
        label = t.labels.get(s, frozenset())
        stray = [c for c in label if c not in allowed]
        if stray:
            rep.add("label", s, "outside the closure: " + ", ".join(c.show() for c in stray))
        frontier = s in t.frontier
        for c in label:
            if 1 in props and (isinstance(c, Bottom) or neg(c) in label):
                rep.add("property 1", s, f"{c.show()} together with its negation")
            if isinstance(c, And) and 2 in props:
                if c.left not in label or c.right not in label:
                    rep.add("property 2", s, f"{c.show()} not decomposed")
            elif isinstance(c, Or) and 3 in props:
                if c.left not in label and c.right not in label:
                    rep.add("property 3", s, f"neither disjunct of {c.show()}")
            elif isinstance(c, Forall):
                if 4 in props:
                    for u in succ(s, c.role):
                        if c.filler not in t.labels.get(u, ()):
                            rep.add("property 4", s, f"{c.show()} but {c.filler.show()} missing at {u}")
                if 6 in props:
                    for r in rbox.transitive_sub_roles(c.role):
                        pushed = Forall(r, c.filler)
                        for u in succ(s, r):
                            if pushed not in t.labels.get(u, ()):
                                rep.add("property 6", s, f"{pushed.show()} missing at {u}")
            elif isinstance(c, Exists) and 5 in props and not frontier:
                if not any(c.filler in t.labels.get(u, ()) for u in succ(s, c.role)):
                    rep.add("property 5", s, f"{c.show()} has no witness")
            if isinstance(c, NumberRestriction):
                sat = [u for u in succ(s, c.role) if c.filler in t.labels.get(u, ())]
                if isinstance(c, AtMost) and 9 in props and len(sat) > c.n:
                    rep.add("property 9", s, f"{c.show()} but {len(sat)} such successors")
                if isinstance(c, AtLeast) and 10 in props and not frontier and len(sat) < c.n:
                    rep.add("property 10", s, f"{c.show()} but {len(sat)} such successors")
                if 11 in props:
                    other = neg(c.filler)
                    for u in succ(s, c.role):
                        lu = t.labels.get(u, ())
                        if c.filler not in lu and other not in lu:
                            rep.add("property 11", s, f"{u} carries neither {c.filler.show()} nor {other.show()}")
    if 7 in props:
        for r in roles:
            back = t.edges.get(r.inv, frozenset())
            for a, b in t.edges.get(r, ()):
                if (b, a) not in back:
                    rep.add("property 7", a, f"({a}, {b}) ∈ E({r.show()}) without its inverse")
    if 8 in props:
        for r in roles:
            for s_ in rbox.super_roles(r):
                if s_ is r:
                    continue
                sup = t.edges.get(s_, frozenset())
                for pair in t.edges.get(r, ()):
                    if pair not in sup:
                        rep.add("property 8", pair[0], f"{pair} ∈ E({r.show()}) but not E({s_.show()})")
    return rep


def model_to_tableau(i: Interpretation, d: Concept, rbox: RoleBox) -> TableauStructure:
    """Read a tableau off a model: labels are the closure members each element satisfies."""
    d = nnf(d)
    rbox = rbox.with_roles(roles_in(d))
    clos = sorted(extended_closure(d, rbox), key=Concept.sort_key)
    ext = {c: eval_concept(i, c) for c in clos}
    labels = {x: frozenset(c for c in clos if x in ext[c]) for x in i.domain}
    edges = {r: i.role(r) for r in rbox.roles}
    return TableauStructure(tuple(i.domain), labels, edges)


# ---------------------------------------------------------------- unravelling

Path = tuple[tuple[int, int], ...]


def block_distance(tree: CompletionTree) -> int:
    """Largest depth gap between a directly blocked node and its blocker (≥ 1)."""
    gaps = [tree.depth(x) - tree.depth(s.by) for x, s in tree.blocking().items() if s.direct]
    return max(gaps) if gaps else max(1, tree.max_depth())


def unravel_witness(tree: CompletionTree, d: Concept, rbox: RoleBox, depth_budget: int,
                    *, max_paths: int = 200_000, check: bool = True) -> TableauStructure:
    """Build the tableau of node-pair paths, cut off at ``depth_budget`` steps.

    A path is a tuple of (x, x′) pairs: x′ is the tree node reached and x the
    node whose label it takes, which differs from x′ exactly when x′ is
    blocked and x is its blocker.  Paths of length ``depth_budget`` form the
    frontier.
    """
    d = nnf(d)
    rbox = rbox.with_roles(roles_in(d))
    if check:
        rep = validate_completion_tree(tree, d, rbox)
        if not rep.ok:
            raise ValueError(f"not a complete clash-free completion tree: {rep.first}")
    status = tree.blocking()
    nodes = tree.nodes

    def extensions(tail: int):
        for y in nodes[tail].children:
            st = status[y]
            if not st.blocked:
                yield (y, y)
            elif st.direct:
                yield (st.by, y)

    root: Path = ((tree.root, tree.root),)
    paths = [root]
    frontier = []
    layer = [root]
    pairs: dict[Role, set] = {r: set() for r in rbox.roles}
    for depth in range(depth_budget):
        nxt = []
        for p in layer:
            for step in extensions(p[-1][0]):
                q = p + (step,)
                nxt.append(q)
                edge = nodes[step[1]].edge
                for r in rbox.roles:
                    if any(rbox.subsumed(s, r) for s in edge):
                        pairs[r].add((p, q))
                    if any(rbox.subsumed(s, r.inv) for s in edge):
                        pairs[r].add((q, p))
        paths.extend(nxt)
        if len(paths) > max_paths:
            raise BudgetExceeded(f"unravelling exceeded {max_paths} paths")
        layer = nxt
    frontier = layer
    labels = {p: frozenset(nodes[p[-1][0]].label) for p in paths}
    return TableauStructure(tuple(paths), labels, {r: frozenset(v) for r, v in pairs.items()},
                            frozenset(frontier))


def embeds(small: TableauStructure, big: TableauStructure) -> bool:
    """Identity embedding check used for budget monotonicity."""
    if not set(small.individuals) <= set(big.individuals):
        return False
    if any(small.labels[s] != big.labels[s] for s in small.individuals):
        return False
    return all(pairs <= big.edges.get(r, frozenset()) for r, pairs in small.edges.items())
