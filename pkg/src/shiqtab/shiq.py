"""The SHIQ tableau engine: expansion rules, clash handling and backtracking search."""

from __future__ import annotations

import random
from collections import Counter
from dataclasses import dataclass, field
from functools import partial
from typing import Iterable

from .completion import (
    CompletionTree,
    clash_reason,
    has_distinct_subset,
    neighbours,
)
from .errors import BudgetExceeded
from .syntax import (
    And,
    AtLeast,
    AtMost,
    Concept,
    EMPTY_RBOX,
    Exists,
    Forall,
    NumberRestriction,
    Or,
    Role,
    RoleBox,
    check_simple_number_restrictions,
    closure,
    extended_closure,
    neg,
    nnf,
    roles_in,
    subconcepts,
)
from .trace import Tracer
from .trail import Trail

SAT = "SAT"
UNSAT = "UNSAT"


# ---------------------------------------------------------------- actions


@dataclass(frozen=True)
class AddConcepts:
    rule: str
    node: int
    target: int
    concepts: tuple[Concept, ...]

    def perform(self, tree: CompletionTree, rbox: RoleBox) -> set[int]:
        tree.add_concepts(self.target, self.concepts)
        return {self.target}


@dataclass(frozen=True)
class Generate:
    rule: str
    node: int
    role: Role
    filler: Concept
    count: int

    def perform(self, tree: CompletionTree, rbox: RoleBox) -> set[int]:
        new = [tree.new_child(self.node, (self.role,), (self.filler,)) for _ in range(self.count)]
        for i, a in enumerate(new):
            for b in new[i + 1:]:
                tree.add_distinct(a, b)
        return {self.node, *new}


@dataclass(frozen=True)
class Merge:
    rule: str
    node: int
    y: int
    z: int

    def perform(self, tree: CompletionTree, rbox: RoleBox) -> set[int]:
        x, y, z = self.node, self.y, self.z
        if tree.are_distinct(y, z):
            raise AssertionError(f"≤-rule asked to merge {y} and {z} although {y} ≠ {z}")
        tree.add_concepts(z, list(tree.label(y)))
        moved = list(tree.nodes[y].edge)
        if z == tree.parent(x):
            tree.add_edge_roles(x, [r.inv for r in moved])
        else:
            tree.add_edge_roles(z, moved)
        tree.clear_edge(y)
        for u in tree.distinct_from(y):
            if u != z:
                tree.add_distinct(u, z)
        return {x, y, z}


Action = AddConcepts | Generate | Merge


# ---------------------------------------------------------------- rule matching


def _deterministic_at(tree: CompletionTree, rbox: RoleBox, x: int, only=None):
    label = tree.nodes[x].label
    nodes = tree.nodes
    for c in (list(label) if only is None else label & only):
        if isinstance(c, And):
            missing = tuple(d for d in (c.left, c.right) if d not in label)
            if missing:
                return AddConcepts("⊓", x, x, missing)
        elif isinstance(c, Forall):
            filler = c.filler
            for y in neighbours(tree, x, c.role, rbox):
                if filler not in nodes[y].label:
                    return AddConcepts("∀", x, y, (filler,))
            for r in rbox.transitive_sub_roles(c.role):
                pushed = Forall(r, filler)
                for y in neighbours(tree, x, r, rbox):
                    if pushed not in nodes[y].label:
                        return AddConcepts("∀₊", x, y, (pushed,))
    return None


def find_deterministic(tree: CompletionTree, rbox: RoleBox, candidates: Iterable[int] | None = None):
    """First applicable ⊓-, ∀- or ∀₊-rule instance, or None."""
    status = tree.blocking()
    for x in (tree.order() if candidates is None else candidates):
        if x not in tree.nodes or status[x].indirect:
            continue
        act = _deterministic_at(tree, rbox, x)
        if act is not None:
            return act
    return None


def _choose_at(tree: CompletionTree, rbox: RoleBox, x: int, only=None):
    nodes = tree.nodes
    label = nodes[x].label
    for c in (label if only is None else label & only):
        if not isinstance(c, NumberRestriction):
            continue
        filler, other = c.filler, neg(c.filler)
        for y in neighbours(tree, x, c.role, rbox):
            ly = nodes[y].label
            if filler not in ly and other not in ly:
                return [AddConcepts("choose", x, y, (filler,)),
                        AddConcepts("choose", x, y, (other,))]
    return None


def _or_at(tree: CompletionTree, rbox: RoleBox, x: int, only=None):
    label = tree.nodes[x].label
    for c in (label if only is None else label & only):
        if isinstance(c, Or) and c.left not in label and c.right not in label:
            return [AddConcepts("⊔", x, x, (c.left,)), AddConcepts("⊔", x, x, (c.right,))]
    return None


def merge_candidates(tree: CompletionTree, rbox: RoleBox, x: int, c: AtMost) -> list[Merge]:
    nodes = tree.nodes
    cands = [y for y in neighbours(tree, x, c.role, rbox) if c.filler in nodes[y].label]
    if len(cands) <= c.n:
        return []
    parent = nodes[x].parent
    out = []
    # neighbours() lists the parent first, so ancestor targets come first
    for z in cands:
        for y in cands:
            if y == z or y == parent or tree.are_distinct(y, z):
                continue
            out.append(Merge("≤", x, y, z))
    return out


def _merge_at(tree: CompletionTree, rbox: RoleBox, x: int, only=None):
    label = tree.nodes[x].label
    for c in (label if only is None else label & only):
        if isinstance(c, AtMost):
            alts = merge_candidates(tree, rbox, x, c)
            if alts:
                return alts
    return None


def _generating_at(tree: CompletionTree, rbox: RoleBox, x: int, only=None):
    nodes = tree.nodes
    label = nodes[x].label
    for c in (label if only is None else label & only):
        if isinstance(c, Exists):
            if not any(c.filler in nodes[y].label for y in neighbours(tree, x, c.role, rbox)):
                return Generate("∃", x, c.role, c.filler, 1)
        elif isinstance(c, AtLeast) and c.n > 0:
            cands = [y for y in neighbours(tree, x, c.role, rbox) if c.filler in nodes[y].label]
            if not has_distinct_subset(tree, cands, c.n):
                return Generate("≥", x, c.role, c.filler, c.n)
    return None


def _first(tree: CompletionTree, rbox: RoleBox, at, skip_direct: bool = False):
    status = tree.blocking()
    for x in tree.order():
        st = status[x]
        if st.indirect or (skip_direct and st.blocked):
            continue
        found = at(tree, rbox, x)
        if found:
            return found
    return None


def find_choose(tree: CompletionTree, rbox: RoleBox):
    return _first(tree, rbox, _choose_at)


def find_or(tree: CompletionTree, rbox: RoleBox):
    return _first(tree, rbox, _or_at)


def find_merge(tree: CompletionTree, rbox: RoleBox):
    return _first(tree, rbox, _merge_at)


def find_generating(tree: CompletionTree, rbox: RoleBox):
    return _first(tree, rbox, _generating_at, skip_direct=True)


def find_nondeterministic(tree: CompletionTree, rbox: RoleBox, choose_rule: bool = True):
    if choose_rule:
        alts = find_choose(tree, rbox)
        if alts:
            return alts
    return find_or(tree, rbox)


# ---------------------------------------------------------------- one-step API


def apply_deterministic(tree: CompletionTree, rbox: RoleBox) -> str:
    act = find_deterministic(tree, rbox)
    if act is None:
        return "fixpoint"
    act.perform(tree, rbox)
    return "changed"


def _branch(tree: CompletionTree, rbox: RoleBox, alts) -> list[CompletionTree]:
    out = []
    for act in alts or ():
        t = tree.copy()
        act.perform(t, rbox)
        out.append(t)
    return out


def apply_nondeterministic(tree: CompletionTree, rbox: RoleBox,
                           choose_rule: bool = True) -> list[CompletionTree]:
    """Alternatives of the first applicable choose- (else ⊔-) instance."""
    return _branch(tree, rbox, find_nondeterministic(tree, rbox, choose_rule))


def apply_merge(tree: CompletionTree, rbox: RoleBox) -> list[CompletionTree]:
    return _branch(tree, rbox, find_merge(tree, rbox))


def apply_generating(tree: CompletionTree, rbox: RoleBox) -> str:
    act = find_generating(tree, rbox)
    if act is None:
        return "fixpoint"
    act.perform(tree, rbox)
    return "changed"


# ---------------------------------------------------------------- bounds


@dataclass(frozen=True)
class EngineBounds:
    max_out_degree: int
    max_path_length: int
    closure_size: int
    role_count: int
    n_max: int


def engine_bounds(d: Concept, rbox: RoleBox = EMPTY_RBOX) -> EngineBounds:
    """Out-degree m·n_max and path length 2^(2mk) from the termination argument."""
    d = nnf(d)
    clos = closure(d)
    rbox = rbox.with_roles(roles_in(d))
    m = len(clos)
    k = len(rbox.roles)
    n_max = max([c.n for c in clos if isinstance(c, NumberRestriction)] + [1])
    return EngineBounds(m * n_max, 2 ** (2 * m * k), m, k, n_max)


# ---------------------------------------------------------------- search


@dataclass
class EngineStats:
    rules: Counter = field(default_factory=Counter)
    backtracks: int = 0
    branch_points: int = 0
    nodes_created: int = 0
    max_depth: int = 0
    max_out_degree: int = 0
    steps: int = 0
    resets: int = 0
    seals: int = 0
    max_live_nodes: int = 1


@dataclass
class EngineVerdict:
    answer: str
    witness: object | None
    stats: EngineStats
    concept: Concept | None = None
    rbox: RoleBox | None = None

    @property
    def sat(self) -> bool:
        return self.answer == SAT


class _Choice:
    __slots__ = ("mark", "alts", "index")

    def __init__(self, mark: int, alts: list):
        self.mark = mark
        self.alts = alts
        self.index = 0


def _restricted(at, only, tree, rbox, x):
    return at(tree, rbox, x, only)


_KINDS = ("det", "choose", "or", "merge", "gen")


class _Agenda:
    """Which nodes currently admit which rule kind, maintained from the tree's touch log.

    Applicability of every rule at x depends only on x and its neighbours,
    so a change at t re-evaluates t, its parent and its children.  Blocking
    depends on x and its ancestors; a candidate found blocked is parked and
    woken when anything at or above it changes.  Every membership change is
    logged on the trail, so undoing the tree also restores the agenda and
    the nodes touched by the undo need no re-evaluation.
    """

    def __init__(self, tree: CompletionTree, rbox: RoleBox, choose_rule: bool, clos, trail: Trail):
        self.tree, self.rbox, self.trail = tree, rbox, trail
        # each test only needs to look at the label members of the matching shapes
        tests = {"det": (_deterministic_at, (And, Forall)), "or": (_or_at, (Or,)),
                 "merge": (_merge_at, (AtMost,)), "gen": (_generating_at, (Exists, AtLeast))}
        if choose_rule:
            tests["choose"] = (_choose_at, (NumberRestriction,))
        self.tests = {k: partial(_restricted, at, frozenset(c for c in clos if isinstance(c, shapes)))
                      for k, (at, shapes) in tests.items()}
        self.active: dict[str, set[int]] = {k: set() for k in _KINDS}
        self.parked: dict[str, set[int]] = {k: set() for k in _KINDS}
        tree.touched = {tree.root}

    def _move(self, x: int, src: set[int] | None, dst: set[int] | None) -> None:
        if src is not None:
            src.discard(x)
        if dst is not None:
            dst.add(x)

        def undo():
            if dst is not None:
                dst.discard(x)
            if src is not None:
                src.add(x)
        self.trail.push(undo)

    def forget_undone(self) -> None:
        """Call after rolling the trail back: the agenda already matches the tree."""
        self.tree.touched = set()

    def sync(self) -> None:
        tree = self.tree
        touched = tree.touched
        if not touched:
            return
        tree.touched = set()
        nodes = tree.nodes
        affected = set()
        for t in touched:
            n = nodes.get(t)
            if n is None:
                continue
            affected.add(t)
            if n.parent is not None:
                affected.add(n.parent)
            affected.update(n.children)
        for x in affected:
            self._evaluate(x)
        if any(self.parked.values()):
            self._wake(t for t in touched if t in nodes)

    def _evaluate(self, x: int) -> None:
        tree, rbox = self.tree, self.rbox
        for k, test in self.tests.items():
            live, parked = self.active[k], self.parked[k]
            if test(tree, rbox, x):
                if x in parked:
                    self._move(x, parked, live)
                elif x not in live:
                    self._move(x, None, live)
            elif x in live:
                self._move(x, live, None)
            elif x in parked:
                self._move(x, parked, None)

    def _wake(self, roots) -> None:
        nodes = self.tree.nodes
        seen = set()
        stack = list(roots)
        while stack:
            y = stack.pop()
            if y in seen:
                continue
            seen.add(y)
            for k in _KINDS:
                if y in self.parked[k]:
                    self._move(y, self.parked[k], self.active[k])
            stack.extend(nodes[y].children)

    def pick(self, kind: str) -> int | None:
        """Lowest-numbered node where ``kind`` applies and blocking allows it."""
        tree = self.tree
        live = self.active[kind]
        while live:
            x = min(live)
            if x not in tree.nodes:
                self._move(x, live, None)
                continue
            st = tree.status_of(x)
            if st.blocked if kind == "gen" else st.indirect:
                self._move(x, live, self.parked[kind])
                continue
            return x
        return None


class ShiqSearch:
    """Depth-first search over the non-deterministic rules, undoing via a trail.

    Rule priority: ⊓/∀/∀₊ to fixpoint, then choose, ⊔, ≤, then ∃/≥; every
    change restarts the scan from the deterministic rules.
    """

    def __init__(self, d: Concept, rbox: RoleBox = EMPTY_RBOX, *, tracer: Tracer | None = None,
                 choose_rule: bool = True, seed: int | None = None,
                 check_bounds: bool = True, max_steps: int | None = None):
        self.d = nnf(d)
        self.rbox = rbox.with_roles(roles_in(self.d))
        # subconcepts first so the error names the restriction as written
        check_simple_number_restrictions(subconcepts(self.d), self.rbox)
        check_simple_number_restrictions(closure(self.d), self.rbox)
        self.tracer = tracer
        self.choose_rule = choose_rule
        self.rng = random.Random(seed) if seed is not None else None
        self.check_bounds = check_bounds
        self.max_steps = max_steps
        self.bounds = engine_bounds(self.d, self.rbox)
        self.trail = Trail()
        self.tree = CompletionTree([self.d], trail=self.trail)
        self.stats = EngineStats()
        self._blocks: dict[int, int | None] = {}
        self.agenda = _Agenda(self.tree, self.rbox, choose_rule,
                              extended_closure(self.d, self.rbox), self.trail)

    # --------------------------------------------------------- helpers

    def _emit(self, kind, nodes=(), concept=None, detail=None):
        if self.tracer is not None:
            self.tracer.emit(kind, nodes, concept, detail)

    def _perform(self, act) -> set[int]:
        tree = self.tree
        before = tree.next_id
        touched = act.perform(tree, self.rbox)
        self.stats.rules[act.rule] += 1
        self.stats.steps += 1
        if self.max_steps is not None and self.stats.steps > self.max_steps:
            raise BudgetExceeded(f"SHIQ search exceeded {self.max_steps} rule applications")
        if self.tracer is not None:
            concept = getattr(act, "concepts", None) or getattr(act, "filler", None)
            self._emit("rule", (act.node, *sorted(touched - {act.node})), concept, act.rule)
            for nid in range(before, tree.next_id):
                n = tree.nodes[nid]
                self._emit("node", (nid,), None, {
                    "parent": n.parent, "roles": sorted(map(str, n.edge)),
                    "label": sorted(map(str, n.label))})
            self._trace_blocks()
        if tree.next_id > before:
            self.stats.nodes_created += tree.next_id - before
            self._check_bounds(act.node, tree.next_id - 1)
        return touched

    def _check_bounds(self, parent: int, newest: int) -> None:
        tree = self.tree
        deg = len(tree.children(parent))
        depth = tree.depth(newest)
        s = self.stats
        s.max_out_degree = max(s.max_out_degree, deg)
        s.max_depth = max(s.max_depth, depth)
        s.max_live_nodes = max(s.max_live_nodes, len(tree))
        if self.check_bounds:
            if deg > self.bounds.max_out_degree:
                raise AssertionError(
                    f"out-degree {deg} exceeds bound {self.bounds.max_out_degree}")
            if depth > self.bounds.max_path_length:
                raise AssertionError(
                    f"path length {depth} exceeds bound {self.bounds.max_path_length}")

    def _trace_blocks(self):
        status = self.tree.blocking()
        now = {x: s.by for x, s in status.items() if s.direct}
        for x, by in now.items():
            if self._blocks.get(x, -1) != by:
                self._emit("block", (x, by), None, "pair-wise")
        for x in self._blocks:
            if x not in now and x in status:
                self._emit("unblock", (x,))
        self._blocks = now

    def _clash(self, touched: set[int]) -> tuple[int, str] | None:
        tree = self.tree
        check = set()
        for x in touched:
            if x not in tree.nodes:
                continue
            n = tree.nodes[x]
            check.add(x)
            if n.parent is not None:
                check.add(n.parent)
            check.update(n.children)
        for x in sorted(check):
            why = clash_reason(tree, x, self.rbox)
            if why is not None:
                return x, why
        return None

    def _next(self, kind: str):
        x = self.agenda.pick(kind)
        return None if x is None else self.agenda.tests[kind](self.tree, self.rbox, x)

    def _alternatives(self):
        alts = self._next("choose") if self.choose_rule else None
        alts = alts or self._next("or") or self._next("merge")
        if alts and self.rng is not None:
            self.rng.shuffle(alts)
        return alts

    def run(self) -> EngineVerdict:
        tree = self.tree
        stack: list[_Choice] = []
        self._emit("node", (0,), self.d, {"parent": None, "roles": [], "label": [str(self.d)]})
        clash = self._clash({tree.root})
        while True:
            if clash is None:
                self.agenda.sync()
                act = self._next("det")
                if act is not None:
                    clash = self._clash(self._perform(act))
                    continue
                alts = self._alternatives()
                if alts:
                    self.stats.branch_points += 1
                    stack.append(_Choice(self.trail.mark(), alts))
                    clash = self._clash(self._perform(alts[0]))
                    continue
                gen = self._next("gen")
                if gen is not None:
                    clash = self._clash(self._perform(gen))
                    continue
                tree.trail = None
                tree.touched = None
                return EngineVerdict(SAT, tree, self.stats, self.d, self.rbox)
            # clash: back up to the most recent choice point with an untried alternative
            self._emit("clash", (clash[0],), None, clash[1])
            while stack:
                cp = stack[-1]
                cp.index += 1
                self.trail.undo_to(cp.mark)
                if cp.index < len(cp.alts):
                    break
                stack.pop()
            if not stack:
                return EngineVerdict(UNSAT, None, self.stats, self.d, self.rbox)
            self.agenda.forget_undone()
            self.stats.backtracks += 1
            self._emit("backtrack", (cp.alts[cp.index].node,), None, cp.index)
            if self.tracer is not None:
                self._trace_blocks()
            clash = self._clash(self._perform(cp.alts[cp.index]))


def decide_sat(d: Concept, rbox: RoleBox = EMPTY_RBOX, **options) -> EngineVerdict:
    """Decide satisfiability of ``d`` w.r.t. ``rbox``.

    Raises NonSimpleRoleInNumberRestriction if any number restriction in
    clos(d) uses a non-simple role.  Options: ``tracer``, ``choose_rule``
    (test switch), ``seed``, ``check_bounds``, ``max_steps``.
    """
    return ShiqSearch(d, rbox, **options).run()
