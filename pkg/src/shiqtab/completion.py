"""Completion trees for the SHIQ calculus: structure, neighbours, blocking, clashes."""

from __future__ import annotations

from dataclasses import dataclass
from itertools import combinations
from typing import Iterable, Iterator

from .syntax import AtMost, Bottom, Concept, Not, Role, RoleBox
from .trail import Trail

NOT_BLOCKED = "not_blocked"
DIRECTLY_BLOCKED = "directly_blocked"
INDIRECTLY_BLOCKED = "indirectly_blocked"


@dataclass(frozen=True)
class BlockStatus:
    kind: str
    by: int | None = None

    @property
    def blocked(self) -> bool:
        return self.kind != NOT_BLOCKED

    @property
    def indirect(self) -> bool:
        return self.kind == INDIRECTLY_BLOCKED

    @property
    def direct(self) -> bool:
        return self.kind == DIRECTLY_BLOCKED


_FREE = BlockStatus(NOT_BLOCKED)
_INDIRECT = BlockStatus(INDIRECTLY_BLOCKED)


class Node:
    __slots__ = ("id", "parent", "children", "depth", "label", "edge")

    def __init__(self, id: int, parent: int | None, depth: int,
                 label: set[Concept], edge: set[Role]):
        self.id = id
        self.parent = parent
        self.children: list[int] = []
        self.depth = depth
        self.label = label
        # label of the edge from the parent into this node
        self.edge = edge

    def __repr__(self):
        return f"Node({self.id}, parent={self.parent}, |L|={len(self.label)})"


class CompletionTree:
    """Labelled tree plus the ≠ relation.

    All mutations go through methods that log an undo closure when a trail is
    attached, so a search can roll the tree back to any earlier mark.  The
    ≠ relation is stored one-sided as ``(min, max)`` pairs.
    """

    def __init__(self, root_label: Iterable[Concept] = (), trail: Trail | None = None):
        self.nodes: dict[int, Node] = {0: Node(0, None, 0, set(root_label), set())}
        self.root = 0
        self.next_id = 1
        self.distinct: set[tuple[int, int]] = set()
        self.trail = trail
        self.version = 0
        self._order: tuple[int, tuple[int, ...]] | None = None
        self._status: tuple[int, dict[int, BlockStatus]] | None = None
        # when a set, every mutation (and undo) adds the ids of the nodes it changed
        self.touched: set[int] | None = None

    # ------------------------------------------------------------ queries

    def __contains__(self, x: int) -> bool:
        return x in self.nodes

    def __len__(self):
        return len(self.nodes)

    def label(self, x: int) -> set[Concept]:
        return self.nodes[x].label

    def edge(self, parent: int, child: int) -> set[Role]:
        node = self.nodes[child]
        if node.parent != parent:
            raise KeyError((parent, child))
        return node.edge

    def parent(self, x: int) -> int | None:
        return self.nodes[x].parent

    def children(self, x: int) -> list[int]:
        return self.nodes[x].children

    def depth(self, x: int) -> int:
        return self.nodes[x].depth

    def order(self) -> tuple[int, ...]:
        """Node ids with every parent before its children."""
        if self._order is None or self._order[0] != self.version:
            self._order = (self.version, tuple(sorted(self.nodes)))
        return self._order[1]

    def ancestors(self, x: int) -> Iterator[int]:
        p = self.nodes[x].parent
        while p is not None:
            yield p
            p = self.nodes[p].parent

    def is_ancestor(self, a: int, x: int) -> bool:
        return any(a == y for y in self.ancestors(x))

    def are_distinct(self, a: int, b: int) -> bool:
        return (a, b) in self.distinct if a < b else (b, a) in self.distinct

    def distinct_from(self, y: int) -> list[int]:
        out = []
        for a, b in self.distinct:
            if a == y:
                out.append(b)
            elif b == y:
                out.append(a)
        return sorted(out)

    def max_depth(self) -> int:
        return max(n.depth for n in self.nodes.values())

    def max_out_degree(self) -> int:
        return max(len(n.children) for n in self.nodes.values())

    # ------------------------------------------------------------ mutations

    def _changed(self, *ids: int):
        self.version += 1
        if self.touched is not None:
            self.touched.update(ids)

    def _log(self, undo):
        if self.trail is not None:
            self.trail.push(undo)

    def add_concepts(self, x: int, concepts: Iterable[Concept]) -> list[Concept]:
        label = self.nodes[x].label
        added = [c for c in dict.fromkeys(concepts) if c not in label]
        if not added:
            return added
        label.update(added)
        self._changed(x)

        def undo():
            label.difference_update(added)
            self._changed(x)
        self._log(undo)
        return added

    def new_child(self, parent: int, roles: Iterable[Role], label: Iterable[Concept]) -> int:
        pnode = self.nodes[parent]
        nid = self.next_id
        self.next_id += 1
        node = Node(nid, parent, pnode.depth + 1, set(label), set(roles))
        self.nodes[nid] = node
        pnode.children.append(nid)
        self._changed(nid, parent)

        def undo():
            del self.nodes[nid]
            pnode.children.remove(nid)
            self.next_id = nid
            self._changed(parent)
        self._log(undo)
        return nid

    def add_edge_roles(self, x: int, roles: Iterable[Role]) -> list[Role]:
        edge = self.nodes[x].edge
        added = [r for r in dict.fromkeys(roles) if r not in edge]
        if not added:
            return added
        edge.update(added)
        self._changed(x)

        def undo():
            edge.difference_update(added)
            self._changed(x)
        self._log(undo)
        return added

    def clear_edge(self, x: int) -> None:
        node = self.nodes[x]
        old = node.edge
        if not old:
            return
        node.edge = set()
        self._changed(x)

        def undo():
            node.edge = old
            self._changed(x)
        self._log(undo)

    def add_distinct(self, a: int, b: int) -> bool:
        if a == b:
            raise ValueError("≠ must stay irreflexive")
        pair = (a, b) if a < b else (b, a)
        if pair in self.distinct:
            return False
        self.distinct.add(pair)
        self._changed(a, b)

        def undo():
            self.distinct.discard(pair)
            self._changed(a, b)
        self._log(undo)
        return True

    def copy(self) -> "CompletionTree":
        t = CompletionTree.__new__(CompletionTree)
        t.nodes = {}
        for nid, n in self.nodes.items():
            m = Node(nid, n.parent, n.depth, set(n.label), set(n.edge))
            m.children = list(n.children)
            t.nodes[nid] = m
        t.root = self.root
        t.next_id = self.next_id
        t.distinct = set(self.distinct)
        t.trail = None
        t.version = 0
        t._order = None
        t._status = None
        t.touched = None
        return t

    # ------------------------------------------------------------ blocking

    def blocking(self) -> dict[int, BlockStatus]:
        """Blocking status of every node, recomputed whenever the tree changed."""
        if self._status is not None and self._status[0] == self.version:
            return self._status[1]
        status: dict[int, BlockStatus] = {}
        nodes = self.nodes
        for x in self.order():
            n = nodes[x]
            if n.parent is None:
                status[x] = _FREE
                continue
            if status[n.parent].blocked or not n.edge:
                status[x] = _INDIRECT
                continue
            status[x] = _direct_blocker(nodes, n)
        self._status = (self.version, status)
        return status

    def status_of(self, x: int) -> BlockStatus:
        """Same answer as ``blocking()[x]``, walking only x's ancestors."""
        if self._status is not None and self._status[0] == self.version:
            return self._status[1][x]
        if self.is_indirect(x):
            return _INDIRECT
        n = self.nodes[x]
        return _FREE if n.parent is None else _direct_blocker(self.nodes, n)

    def is_indirect(self, x: int) -> bool:
        """Same answer as ``blocking()[x].indirect``, walking only x's ancestors."""
        if self._status is not None and self._status[0] == self.version:
            return self._status[1][x].indirect
        nodes = self.nodes
        n = nodes[x]
        if n.parent is None:
            return False
        if not n.edge:
            return True
        a = nodes[n.parent]
        while a.parent is not None:
            if not a.edge or _direct_blocker(nodes, a).direct:
                return True
            a = nodes[a.parent]
        return False


def _direct_blocker(nodes: dict[int, Node], x: Node) -> BlockStatus:
    xp = nodes[x.parent]
    if xp.parent is None:
        return _FREE
    lx, lxp, ex = x.label, xp.label, x.edge
    y = xp
    while y.parent is not None:
        yp = nodes[y.parent]
        if y.edge == ex and len(y.label) == len(lx) and y.label == lx and yp.label == lxp:
            return BlockStatus(DIRECTLY_BLOCKED, y.id)
        y = yp
    return _FREE


def is_blocked(tree: CompletionTree, x: int) -> BlockStatus:
    return tree.blocking()[x]


def neighbours(tree: CompletionTree, x: int, r: Role, rbox: RoleBox) -> list[int]:
    """R-neighbours of ``x``: the parent first (if it qualifies), then children."""
    nodes = tree.nodes
    node = nodes[x]
    out = []
    if node.parent is not None and not rbox.sub_roles(r.inv).isdisjoint(node.edge):
        out.append(node.parent)
    subs = rbox.sub_roles(r)
    for c in node.children:
        if not subs.isdisjoint(nodes[c].edge):
            out.append(c)
    return out


def has_distinct_subset(tree: CompletionTree, cands: list[int], k: int) -> bool:
    """Are there ``k`` members of ``cands`` that are pairwise in ≠?"""
    if k <= 1:
        return len(cands) >= k
    if len(cands) < k:
        return False
    dist = tree.are_distinct
    for combo in combinations(cands, k):
        if all(dist(a, b) for a, b in combinations(combo, 2)):
            return True
    return False


def clash_reason(tree: CompletionTree, x: int, rbox: RoleBox) -> str | None:
    label = tree.nodes[x].label
    for c in label:
        if isinstance(c, Bottom):
            return "⊥"
        if isinstance(c, Not) and c.operand in label:
            return f"{c.operand.show()} and {c.show()}"
    for c in label:
        if isinstance(c, AtMost):
            filler = c.filler
            cands = [y for y in neighbours(tree, x, c.role, rbox) if filler in tree.nodes[y].label]
            if len(cands) > c.n and has_distinct_subset(tree, cands, c.n + 1):
                return f"{c.n + 1} pairwise distinct neighbours violate {c.show()}"
    return None


def has_clash(tree: CompletionTree, x: int, rbox: RoleBox) -> bool:
    return clash_reason(tree, x, rbox) is not None
