"""Model-theoretic semantics and bounded model search.

``eval_concept`` computes extensions straight from the set-theoretic
semantics, for any concept (NNF or not).  ``find_model`` searches domains
1..max_domain for a model; it is one-sided, since a concept may only have
infinite models.  The default search method encodes the question
propositionally and hands it to a SAT solver; ``method="enumerate"`` walks
every interpretation literally and is only practical for domains of size ≤ 2.
Every model either method returns is re-checked with ``eval_concept``.
"""

from __future__ import annotations

from dataclasses import dataclass, field
from itertools import combinations, product
from typing import Iterable

from pysat.formula import IDPool
from pysat.solvers import Solver

from .errors import BudgetExceeded
from .syntax import (
    And,
    Atom,
    AtLeast,
    AtMost,
    Bottom,
    Concept,
    EMPTY_RBOX,
    Exists,
    Forall,
    Not,
    Or,
    Role,
    RoleBox,
    Top,
    atoms_in,
    roles_in,
    walk,
)


@dataclass(frozen=True)
class Interpretation:
    domain: tuple[int, ...]
    atoms: dict[str, frozenset[int]] = field(default_factory=dict)
    roles: dict[str, frozenset[tuple[int, int]]] = field(default_factory=dict)

    def atom(self, name: str) -> frozenset[int]:
        return self.atoms.get(name, frozenset())

    def role(self, r: Role) -> frozenset[tuple[int, int]]:
        pairs = self.roles.get(r.name, frozenset())
        if r.inverted:
            return frozenset((b, a) for a, b in pairs)
        return pairs

    def successors(self, x: int, r: Role) -> list[int]:
        return sorted(b for a, b in self.role(r) if a == x)

    def __hash__(self):
        return hash((self.domain, tuple(sorted(self.atoms.items())), tuple(sorted(self.roles.items()))))


def transitive_closure(pairs: Iterable[tuple[int, int]]) -> frozenset[tuple[int, int]]:
    rel = set(pairs)
    while True:
        extra = {(a, d) for a, b in rel for c, d in rel if b == c} - rel
        if not extra:
            return frozenset(rel)
        rel |= extra


def eval_concept(i: Interpretation, c: Concept) -> frozenset[int]:
    memo: dict[Concept, frozenset[int]] = {}
    return _eval(i, c, memo)


def _eval(i: Interpretation, c: Concept, memo) -> frozenset[int]:
    hit = memo.get(c)
    if hit is not None:
        return hit
    dom = frozenset(i.domain)
    if isinstance(c, Top):
        out = dom
    elif isinstance(c, Bottom):
        out = frozenset()
    elif isinstance(c, Atom):
        out = i.atom(c.name) & dom
    elif isinstance(c, Not):
        out = dom - _eval(i, c.operand, memo)
    elif isinstance(c, And):
        out = _eval(i, c.left, memo) & _eval(i, c.right, memo)
    elif isinstance(c, Or):
        out = _eval(i, c.left, memo) | _eval(i, c.right, memo)
    else:
        ext = _eval(i, c.filler, memo)
        pairs = i.role(c.role)
        counts = {x: 0 for x in dom}
        for a, b in pairs:
            if b in ext:
                counts[a] += 1
        if isinstance(c, Exists):
            out = frozenset(x for x in dom if counts[x] >= 1)
        elif isinstance(c, Forall):
            bad = {a for a, b in pairs if b not in ext}
            out = dom - bad
        elif isinstance(c, AtLeast):
            out = frozenset(x for x in dom if counts[x] >= c.n)
        elif isinstance(c, AtMost):
            out = frozenset(x for x in dom if counts[x] <= c.n)
        else:
            raise TypeError(f"unknown concept {c!r}")
    memo[c] = out
    return out


def rbox_violations(i: Interpretation, rbox: RoleBox) -> list[str]:
    """Transitivity and role-inclusion requirements that ``i`` breaks."""
    out = []
    for name in sorted(rbox.transitive_roles):
        pairs = i.roles.get(name, frozenset())
        if transitive_closure(pairs) != pairs:
            out.append(f"{name} is not transitive")
    for r, s in sorted(rbox.subsumption, key=lambda p: (p[0].sort_key(), p[1].sort_key())):
        if r is not s and not i.role(r) <= i.role(s):
            out.append(f"{r.show()} ⋢ {s.show()}")
    return out


def _gcis(t) -> list[tuple[Concept, Concept]]:
    if t is None:
        return []
    return list(getattr(t, "gcis", t))


def is_model(i: Interpretation, c: Concept, rbox: RoleBox = EMPTY_RBOX, t=None) -> bool:
    if not eval_concept(i, c) or rbox_violations(i, rbox):
        return False
    dom = frozenset(i.domain)
    memo: dict = {}
    for lhs, rhs in _gcis(t):
        if not _eval(i, lhs, memo) <= _eval(i, rhs, memo):
            return False
    return len(dom) > 0


# ---------------------------------------------------------------- SAT encoding


class _Encoding:
    """Propositional encoding of "c has a model with n elements"."""

    def __init__(self, n: int, rbox: RoleBox, max_clauses: int | None):
        self.n = n
        self.rbox = rbox
        self.pool = IDPool()
        self.clauses: list[list[int]] = []
        self.max_clauses = max_clauses
        self.cvars: dict[tuple[Concept, int], int] = {}
        self.true = self.pool.id(("true",))
        self.add([self.true])

    def add(self, clause):
        self.clauses.append(clause)
        if self.max_clauses is not None and len(self.clauses) > self.max_clauses:
            raise BudgetExceeded(f"model search encoding exceeded {self.max_clauses} clauses")

    def atom(self, name: str, x: int) -> int:
        return self.pool.id(("atom", name, x))

    def edge(self, r: Role, x: int, y: int) -> int:
        if r.inverted:
            x, y = y, x
        return self.pool.id(("role", r.name, x, y))

    def aux(self, *key) -> int:
        return self.pool.id(("aux",) + key)

    def define_and(self, out: int, lits: list[int]) -> None:
        for l in lits:
            self.add([-out, l])
        self.add([out] + [-l for l in lits])

    def define_or(self, out: int, lits: list[int]) -> None:
        for l in lits:
            self.add([out, -l])
        self.add([-out] + lits)

    def define_at_least(self, out: int, lits: list[int], k: int) -> None:
        """out ⇔ at least k of lits hold (subset enumeration; lits are few)."""
        m = len(lits)
        if k <= 0:
            self.add([out])
            return
        if k > m:
            self.add([-out])
            return
        # out ⇒ among any m-k+1 literals at least one is true
        for sub in combinations(lits, m - k + 1):
            self.add([-out] + list(sub))
        # ¬out ⇒ no k literals are all true
        for sub in combinations(lits, k):
            self.add([out] + [-l for l in sub])

    def concept(self, c: Concept, x: int) -> int:
        key = (c, x)
        v = self.cvars.get(key)
        if v is not None:
            return v
        if isinstance(c, Atom):
            v = self.atom(c.name, x)
            self.cvars[key] = v
            return v
        if isinstance(c, Top):
            self.cvars[key] = self.true
            return self.true
        if isinstance(c, Bottom):
            self.cvars[key] = -self.true
            return -self.true
        if isinstance(c, Not):
            v = -self.concept(c.operand, x)
            self.cvars[key] = v
            return v
        v = self.pool.id(("concept", c, x))
        self.cvars[key] = v
        if isinstance(c, And):
            self.define_and(v, [self.concept(c.left, x), self.concept(c.right, x)])
        elif isinstance(c, Or):
            self.define_or(v, [self.concept(c.left, x), self.concept(c.right, x)])
        elif isinstance(c, Forall):
            # ∀R.C fails at x iff some R-successor misses C
            bad = []
            for y in range(self.n):
                t = self.aux("fail", c, x, y)
                self.define_and(t, [self.edge(c.role, x, y), -self.concept(c.filler, y)])
                bad.append(t)
            self.define_or(-v, bad)
        else:
            hits = []
            for y in range(self.n):
                t = self.aux("hit", c.role, c.filler, x, y)
                self.define_and(t, [self.edge(c.role, x, y), self.concept(c.filler, y)])
                hits.append(t)
            if isinstance(c, Exists):
                self.define_or(v, hits)
            elif isinstance(c, AtLeast):
                self.define_at_least(v, hits, c.n)
            elif isinstance(c, AtMost):
                self.define_at_least(-v, hits, c.n + 1)
            else:
                raise TypeError(f"unknown concept {c!r}")
        return v

    def role_axioms(self, names: Iterable[str]) -> None:
        rng = range(self.n)
        for name in sorted(self.rbox.transitive_roles):
            r = Role(name)
            for x, y, z in product(rng, rng, rng):
                self.add([-self.edge(r, x, y), -self.edge(r, y, z), self.edge(r, x, z)])
        for r, s in self.rbox.subsumption:
            if r is s:
                continue
            for x, y in product(rng, rng):
                self.add([-self.edge(r, x, y), self.edge(s, x, y)])
        for name in names:
            for x, y in product(rng, rng):
                self.edge(Role(name), x, y)

    def decode(self, model: list[int], atoms, role_names) -> Interpretation:
        true = {l for l in model if l > 0}
        dom = tuple(range(self.n))
        a = {name: frozenset(x for x in dom if self.atom(name, x) in true) for name in atoms}
        r = {name: frozenset((x, y) for x in dom for y in dom
                             if self.edge(Role(name), x, y) in true) for name in role_names}
        return Interpretation(dom, a, r)


def _vocabulary(c: Concept, rbox: RoleBox, gcis) -> tuple[list[str], list[str]]:
    atoms = set(atoms_in(c))
    roles = {r.name for r in roles_in(c)} | set(rbox.role_names())
    for lhs, rhs in gcis:
        for x in (lhs, rhs):
            atoms |= atoms_in(x)
            roles |= {r.name for r in roles_in(x)}
    return sorted(atoms), sorted(roles)


def _solve_size(c, rbox, gcis, n, atoms, role_names, max_clauses, solver_name, conflict_budget):
    enc = _Encoding(n, rbox, max_clauses)
    enc.role_axioms(role_names)
    # symmetry breaking: element 0 carries the goal
    enc.add([enc.concept(c, 0)])
    for lhs, rhs in gcis:
        for x in range(n):
            enc.add([-enc.concept(lhs, x), enc.concept(rhs, x)])
    with Solver(name=solver_name, bootstrap_with=enc.clauses) as s:
        if conflict_budget is not None:
            s.conf_budget(conflict_budget)
            res = s.solve_limited()
            if res is None:
                raise BudgetExceeded(f"SAT solver hit the conflict budget at domain size {n}")
        else:
            res = s.solve()
        if not res:
            return None
        return enc.decode(s.get_model(), atoms, role_names)


def find_model(c: Concept, rbox: RoleBox = EMPTY_RBOX, t=None, max_domain: int = 3, *,
               min_domain: int = 1, method: str = "sat", max_clauses: int | None = 2_000_000,
               conflict_budget: int | None = None, solver: str = "cadical153") -> Interpretation | None:
    """Smallest model of ``c`` (and the GCIs of ``t``) with at most ``max_domain`` elements.

    Returns None when no model exists up to the bound; that is not a proof of
    unsatisfiability.  Raises BudgetExceeded when a search cap is hit.
    """
    gcis = _gcis(t)
    atoms, role_names = _vocabulary(c, rbox, gcis)
    rbox = rbox.with_roles(Role(n) for n in role_names)
    for n in range(min_domain, max_domain + 1):
        if method == "sat":
            i = _solve_size(c, rbox, gcis, n, atoms, role_names, max_clauses, solver, conflict_budget)
        elif method == "enumerate":
            i = _enumerate_size(c, rbox, gcis, n, atoms, role_names, max_clauses)
        else:
            raise ValueError(f"unknown method {method!r}")
        if i is not None:
            if not is_model(i, c, rbox, gcis) or 0 not in eval_concept(i, c):
                raise AssertionError("model search returned a structure that is not a model")
            return i
    return None


# ---------------------------------------------------------------- literal enumeration


def _enumerate_size(c, rbox, gcis, n, atoms, role_names, cap):
    dom = tuple(range(n))
    pairs = [(x, y) for x in dom for y in dom]
    n_role_ext = 2 ** len(pairs)
    total = (2 ** (n * len(atoms))) * (n_role_ext ** len(role_names))
    if cap is not None and total > cap:
        raise BudgetExceeded(f"{total} interpretations of size {n} exceed the cap {cap}")

    def subsets(items):
        for mask in range(2 ** len(items)):
            yield frozenset(it for k, it in enumerate(items) if mask >> k & 1)

    # role extensions: transitive names are repaired to their closure, duplicates dropped
    choices = []
    for name in role_names:
        exts = list(subsets(pairs))
        if name in rbox.transitive_roles:
            exts = list(dict.fromkeys(transitive_closure(e) for e in exts))
        choices.append(exts)
    atom_choices = [list(subsets(list(dom))) for _ in atoms]
    for rext in product(*choices):
        roles = dict(zip(role_names, rext))
        probe = Interpretation(dom, {}, roles)
        if rbox_violations(probe, rbox):
            continue
        for aext in product(*atom_choices):
            i = Interpretation(dom, dict(zip(atoms, aext)), roles)
            if 0 in eval_concept(i, c) and is_model(i, c, rbox, gcis):
                return i
    return None


def model_size_needed(c: Concept) -> int:
    """2^|sub(c)| capped at 4: enough elements for ALC at the tested sizes."""
    return min(4, 2 ** len(set(walk(c))))
