"""The SI tableau engine: two-label nodes, similarity blocking, reset-restart trace mode."""

from __future__ import annotations

import random
from dataclasses import dataclass
from typing import Iterable, Iterator

from .errors import BudgetExceeded, NotSiConcept
from .shiq import SAT, UNSAT, EngineStats, EngineVerdict
from .syntax import (
    And,
    Bottom,
    Concept,
    Exists,
    Forall,
    Not,
    NumberRestriction,
    Or,
    Role,
    RoleBox,
    nnf,
    subconcepts,
    walk,
)
from .trace import Tracer
from .trail import Trail


class SiNode:
    __slots__ = ("id", "parent", "children", "depth", "L", "B", "role", "filler", "sealed")

    def __init__(self, id, parent, depth, role, filler, label):
        self.id = id
        self.parent = parent
        self.children: list[int] = []
        self.depth = depth
        self.L: set[Concept] = set(label)
        self.B: set[Concept] = set(label)
        # single role on the incoming edge, and the ∃-filler that created the node
        self.role: Role | None = role
        self.filler: Concept | None = filler
        self.sealed = False

    def __repr__(self):
        return f"SiNode({self.id}, parent={self.parent}, |L|={len(self.L)}, |B|={len(self.B)})"


class SiTree:
    """Completion tree for SI with B ⊆ L labels and single-role edges."""

    def __init__(self, d: Concept, transitive: Iterable[str] = (), trail: Trail | None = None):
        self.d = d
        self.transitive = frozenset(transitive)
        self.nodes: dict[int, SiNode] = {0: SiNode(0, None, 0, None, None, (d,))}
        self.root = 0
        self.next_id = 1
        self.trail = trail
        self.version = 0
        self._status = None

    def __len__(self):
        return len(self.nodes)

    def order(self) -> list[int]:
        return sorted(self.nodes)

    def ancestors(self, x: int) -> Iterator[int]:
        p = self.nodes[x].parent
        while p is not None:
            yield p
            p = self.nodes[p].parent

    def max_depth(self) -> int:
        return max(n.depth for n in self.nodes.values())

    def successors(self, x: int, s: Role) -> list[int]:
        nodes = self.nodes
        return [c for c in nodes[x].children if nodes[c].role is s]

    def predecessor(self, x: int, s: Role) -> int | None:
        """The parent of ``x`` if it is an S-predecessor (x is an Inv(S)-successor of it)."""
        n = self.nodes[x]
        if n.parent is not None and n.role is s.inv:
            return n.parent
        return None

    def neighbours(self, x: int, s: Role) -> list[int]:
        p = self.predecessor(x, s)
        out = [] if p is None else [p]
        return out + self.successors(x, s)

    # ------------------------------------------------------------ mutations

    def _log(self, undo):
        self.version += 1
        if self.trail is not None:
            self.trail.push(undo)

    def add_L(self, x: int, c: Concept) -> None:
        node = self.nodes[x]
        if c in node.L:
            return
        node.L.add(c)

        def undo():
            node.L.discard(c)
            self.version += 1
        self._log(undo)

    def add_LB(self, x: int, c: Concept) -> None:
        node = self.nodes[x]
        newL = c not in node.L
        newB = c not in node.B
        node.L.add(c)
        node.B.add(c)

        def undo():
            if newL:
                node.L.discard(c)
            if newB:
                node.B.discard(c)
            self.version += 1
        self._log(undo)

    def new_child(self, x: int, role: Role, filler: Concept) -> int:
        parent = self.nodes[x]
        nid = self.next_id
        self.next_id += 1
        self.nodes[nid] = SiNode(nid, x, parent.depth + 1, role, filler, (filler,))
        parent.children.append(nid)

        def undo():
            del self.nodes[nid]
            parent.children.remove(nid)
            self.next_id = nid
            self.version += 1
        self._log(undo)
        return nid

    def delete_descendants(self, y: int) -> list[int]:
        """Remove the whole subtree below ``y``; returns the deleted ids."""
        node = self.nodes[y]
        if not node.children:
            return []
        gone: dict[int, SiNode] = {}
        todo = list(node.children)
        while todo:
            c = todo.pop()
            gone[c] = self.nodes.pop(c)
            todo.extend(gone[c].children)
        kids = node.children
        node.children = []

        def undo():
            self.nodes.update(gone)
            node.children = kids
            self.version += 1
        self._log(undo)
        return sorted(gone)

    def set_sealed(self, x: int) -> None:
        node = self.nodes[x]
        node.sealed = True

        def undo():
            node.sealed = False
            self.version += 1
        self._log(undo)

    def copy(self) -> "SiTree":
        t = SiTree.__new__(SiTree)
        t.d, t.transitive, t.root, t.next_id = self.d, self.transitive, self.root, self.next_id
        t.trail, t.version, t._status = None, 0, None
        t.nodes = {}
        for nid, n in self.nodes.items():
            m = SiNode(nid, n.parent, n.depth, n.role, n.filler, ())
            m.children, m.L, m.B, m.sealed = list(n.children), set(n.L), set(n.B), n.sealed
            t.nodes[nid] = m
        return t

    # ------------------------------------------------------------ blocking

    def blocking(self) -> dict[int, int | None | bool]:
        """Map node -> blocker id (direct), True (indirect), or False."""
        if self._status is not None and self._status[0] == self.version:
            return self._status[1]
        nodes = self.nodes
        status: dict[int, object] = {}
        for x in self.order():
            n = nodes[x]
            if n.parent is None:
                status[x] = False
            elif status[n.parent] is not False:
                status[x] = True
            else:
                status[x] = _si_blocker(self, n)
        self._status = (self.version, status)
        return status


def restrict(label: Iterable[Concept], r: Role) -> frozenset[Concept]:
    """L/R: the ∀R.C members of ``label``."""
    return frozenset(c for c in label if isinstance(c, Forall) and c.role is r)


def _si_blocker(tree: SiTree, x: SiNode):
    back = x.role.inv
    mine = restrict(x.L, back)
    for y in tree.ancestors(x.id):
        ly = tree.nodes[y].L
        if x.B <= ly and restrict(ly, back) == mine:
            return y
    return False


def si_is_blocked(tree: SiTree, x: int) -> bool:
    return tree.blocking()[x] is not False


def si_blocker(tree: SiTree, x: int) -> int | None:
    s = tree.blocking()[x]
    return s if type(s) is int else None


def si_clash(tree: SiTree, x: int) -> str | None:
    label = tree.nodes[x].L
    for c in label:
        if isinstance(c, Bottom):
            return "⊥"
        if isinstance(c, Not) and c.operand in label:
            return f"{c.operand.show()} and {c.show()}"
    return None


# ---------------------------------------------------------------- rules


@dataclass(frozen=True)
class SiStep:
    rule: str
    node: int
    target: int
    concept: Concept
    both: bool = False        # add to B as well as L
    upward: bool = False      # case 2′: target is the predecessor

    def perform(self, tree: SiTree) -> set[int]:
        if self.rule == "∃":
            return {self.node, tree.new_child(self.node, self.concept.role, self.concept.filler)}
        if self.both:
            tree.add_LB(self.target, self.concept)
        else:
            tree.add_L(self.target, self.concept)
        return {self.target}


def _forall_steps(tree: SiTree, x: int, c: Forall, rule: str, pushed: Concept):
    nodes = tree.nodes
    for y in tree.successors(x, c.role):
        if pushed not in nodes[y].B:
            return SiStep(rule, x, y, pushed, both=True)
    p = tree.predecessor(x, c.role)
    if p is not None and pushed not in nodes[p].L:
        return SiStep(rule, x, p, pushed, upward=True)
    return None


def _deterministic_at(tree: SiTree, x: int):
    label = tree.nodes[x].L
    for c in list(label):
        if isinstance(c, And):
            if c.left not in label:
                return SiStep("⊓", x, x, c.left)
            if c.right not in label:
                return SiStep("⊓", x, x, c.right)
        elif isinstance(c, Forall):
            step = _forall_steps(tree, x, c, "∀", c.filler)
            if step is None and c.role.name in tree.transitive:
                step = _forall_steps(tree, x, c, "∀₊", c)
            if step is not None:
                return step
    return None


def _or_at(tree: SiTree, x: int):
    label = tree.nodes[x].L
    for c in label:
        if isinstance(c, Or) and c.left not in label and c.right not in label:
            return [SiStep("⊔", x, x, c.left), SiStep("⊔", x, x, c.right)]
    return None


def _exists_at(tree: SiTree, x: int):
    n = tree.nodes[x]
    if n.sealed:
        return None
    for c in n.L:
        if isinstance(c, Exists):
            if not any(c.filler in tree.nodes[y].L for y in tree.neighbours(x, c.role)):
                return SiStep("∃", x, x, c)
    return None


def find_si_deterministic(tree: SiTree):
    for x in tree.order():
        step = _deterministic_at(tree, x)
        if step is not None:
            return step
    return None


def find_si_or(tree: SiTree):
    for x in tree.order():
        alts = _or_at(tree, x)
        if alts:
            return alts
    return None


def find_si_exists(tree: SiTree, depth_first: bool = False):
    """An applicable ∃-instance; only meaningful once no other rule applies anywhere."""
    status = tree.blocking()
    order = tree.order()
    if depth_first:
        order = sorted(order, key=lambda x: (-tree.nodes[x].depth, -x))
    for x in order:
        if status[x] is not False:
            continue
        step = _exists_at(tree, x)
        if step is not None:
            return step
    return None


def si_apply_rules(tree: SiTree) -> list[SiTree]:
    """One rule application; returns the alternative trees, or [] at a fixpoint.

    ⊓, ∀ and ∀₊ give one alternative, ⊔ gives two, and ∃ fires only when no
    other rule is applicable anywhere in the tree.
    """
    step = find_si_deterministic(tree)
    alts = [step] if step is not None else find_si_or(tree)
    if not alts:
        step = find_si_exists(tree)
        alts = [step] if step is not None else []
    out = []
    for a in alts:
        t = tree.copy()
        a.perform(t)
        out.append(t)
    return out


# ---------------------------------------------------------------- search


def check_si_input(d: Concept, transitive) -> tuple[Concept, frozenset[str]]:
    if isinstance(transitive, RoleBox):
        if transitive.inclusions and not transitive.is_flat:
            raise NotSiConcept("the SI engine does not accept a role hierarchy")
        transitive = transitive.transitive_roles
    d = nnf(d)
    for c in walk(d):
        if isinstance(c, NumberRestriction):
            raise NotSiConcept(f"number restriction {c.show()} is outside SI")
    return d, frozenset(transitive)


class SiSearch:
    """Backtracking search for SI; ``trace=True`` adds the reset-restart discipline."""

    def __init__(self, d: Concept, transitive=(), *, trace: bool = False,
                 tracer: Tracer | None = None, seed: int | None = None,
                 check_bounds: bool = True, max_steps: int | None = None):
        self.d, trans = check_si_input(d, transitive)
        self.trail = Trail()
        self.tree = SiTree(self.d, trans, self.trail)
        self.trace = trace
        self.tracer = tracer
        self.rng = random.Random(seed) if seed is not None else None
        self.check_bounds = check_bounds
        self.max_steps = max_steps
        self.m = len(subconcepts(self.d))
        self.path_bound = self.m ** 4
        self.stats = EngineStats()

    def _emit(self, kind, nodes=(), concept=None, detail=None):
        if self.tracer is not None:
            self.tracer.emit(kind, nodes, concept, detail)

    def _perform(self, step: SiStep) -> str | None:
        tree = self.tree
        s = self.stats
        touched = step.perform(tree)
        s.rules[step.rule] += 1
        s.steps += 1
        if self.max_steps is not None and s.steps > self.max_steps:
            raise BudgetExceeded(f"SI search exceeded {self.max_steps} rule applications")
        self._emit("rule", (step.node, step.target), step.concept, step.rule)
        if step.rule == "∃":
            new = max(touched)
            s.nodes_created += 1
            depth = tree.nodes[new].depth
            s.max_depth = max(s.max_depth, depth)
            s.max_out_degree = max(s.max_out_degree, len(tree.nodes[step.node].children))
            s.max_live_nodes = max(s.max_live_nodes, len(tree))
            self._emit("node", (new,), step.concept.filler, {
                "parent": step.node, "roles": [str(step.concept.role)],
                "label": [str(step.concept.filler)]})
            # a path with depth+1 nodes
            if self.check_bounds and depth + 1 > self.path_bound:
                raise AssertionError(f"SI path length {depth + 1} exceeds m⁴ = {self.path_bound}")
            if self.tracer is not None:
                b = si_blocker(tree, new)
                if b is not None:
                    self._emit("block", (new, b), None, "similarity")
        for x in touched:
            n = tree.nodes[x]
            if not n.B <= n.L:
                raise AssertionError(f"B ⊄ L at node {x}")
        if self.trace and step.upward:
            gone = tree.delete_descendants(step.target)
            if gone:
                s.resets += 1
                self._emit("reset", (step.target, *gone))
        for x in touched:
            why = si_clash(tree, x)
            if why:
                return f"{x}: {why}"
        return None

    def _seal_complete_subtrees(self) -> None:
        """Drop the descendants of nodes whose whole subtree is finished."""
        tree = self.tree
        status = tree.blocking()
        pending = set()
        for x in tree.order():
            if status[x] is False and _exists_at(tree, x) is not None:
                pending.add(x)
                pending.update(tree.ancestors(x))
        for x in tree.order():
            n = tree.nodes.get(x)
            if n is None or x in pending or not n.children or x == tree.root:
                continue
            gone = tree.delete_descendants(x)
            tree.set_sealed(x)
            self.stats.seals += 1
            self._emit("seal", (x, *gone))

    def run(self) -> EngineVerdict:
        tree = self.tree
        stack = []
        self._emit("node", (0,), self.d, {"parent": None, "roles": [], "label": [str(self.d)]})
        clash = si_clash(tree, 0)
        while True:
            if clash is None:
                step = find_si_deterministic(tree)
                if step is not None:
                    clash = self._perform(step)
                    continue
                alts = find_si_or(tree)
                if alts:
                    if self.rng is not None:
                        self.rng.shuffle(alts)
                    self.stats.branch_points += 1
                    stack.append([self.trail.mark(), alts, 0])
                    clash = self._perform(alts[0])
                    continue
                if self.trace:
                    self._seal_complete_subtrees()
                step = find_si_exists(tree, depth_first=self.trace)
                if step is not None:
                    clash = self._perform(step)
                    continue
                if self.trace:
                    return EngineVerdict(SAT, None, self.stats, self.d)
                tree.trail = None
                return EngineVerdict(SAT, tree, self.stats, self.d)
            self._emit("clash", (int(clash.split(":")[0]),), None, clash)
            while stack:
                cp = stack[-1]
                cp[2] += 1
                self.trail.undo_to(cp[0])
                if cp[2] < len(cp[1]):
                    break
                stack.pop()
            if not stack:
                return EngineVerdict(UNSAT, None, self.stats, self.d)
            self.stats.backtracks += 1
            self._emit("backtrack", (cp[1][cp[2]].node,), None, cp[2])
            clash = self._perform(cp[1][cp[2]])


def si_decide_sat(d: Concept, transitive_roles=(), **options) -> EngineVerdict:
    """Decide an SI concept; the witness is the complete SiTree on SAT."""
    return SiSearch(d, transitive_roles, trace=False, **options).run()


def si_decide_sat_trace(d: Concept, transitive_roles=(), **options) -> EngineVerdict:
    """Same answers as :func:`si_decide_sat`, exploring depth-first with resets.

    A ∀/∀₊ firing into a predecessor deletes that predecessor's successors so
    they get regenerated; finished subtrees are collapsed to their root node.
    No full witness survives this discipline, so ``witness`` is None.
    """
    return SiSearch(d, transitive_roles, trace=True, **options).run()


def si_path_violations(tree: SiTree) -> list[str]:
    """Check the label monotonicity along transitive single-role paths.

    For consecutive x_i, x_{i+1} joined by a transitive R (with x_i itself
    entered by R), require L(x_{i+1})/Inv(R) ⊆ L(x_i)/Inv(R) and
    B(x_i) ⊆ B(x_{i+1}) ∪ {C}, where C is the ∃-filler that created x_i.
    """
    out = []
    nodes = tree.nodes
    for y, n in nodes.items():
        if n.parent is None:
            continue
        r = n.role
        if r.name not in tree.transitive:
            continue
        x = nodes[n.parent]
        if x.parent is None or x.role is not r:
            continue
        if not restrict(n.L, r.inv) <= restrict(x.L, r.inv):
            out.append(f"L({y})/Inv({r.show()}) ⊄ L({x.id})/Inv({r.show()})")
        if not x.B <= n.B | {x.filler}:
            out.append(f"B({x.id}) ⊄ B({y}) ∪ {{{x.filler.show()}}}")
    return out
