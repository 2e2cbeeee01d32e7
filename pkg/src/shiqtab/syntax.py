"""Roles, concepts, role boxes and the syntactic closures the engines run on.

Concepts and roles are hash-consed: constructing a structurally equal value
returns the existing object, so equality is identity and hashing is a
precomputed serial number.  Serial numbers follow construction order, which
keeps set iteration (and therefore rule scheduling) reproducible between runs.
"""

from __future__ import annotations

import itertools
import threading
from dataclasses import dataclass, field
from typing import Iterable, Iterator

_serial = itertools.count()
_lock = threading.Lock()


class _Interned:
    __slots__ = ("_uid", "__weakref__")
    _table: dict = {}
    _fields: tuple[str, ...] = ()

    def __new__(cls, *args):
        key = (cls, *args)
        obj = _Interned._table.get(key)
        if obj is not None:
            return obj
        with _lock:
            obj = _Interned._table.get(key)
            if obj is None:
                obj = object.__new__(cls)
                for name, value in zip(cls._fields, args):
                    object.__setattr__(obj, name, value)
                object.__setattr__(obj, "_uid", next(_serial))
                obj._init_cache()
                _Interned._table[key] = obj
        return obj

    def __init__(self, *args):
        pass

    def _init_cache(self):
        pass

    def __setattr__(self, name, value):
        raise AttributeError(f"{type(self).__name__} is immutable")

    def __hash__(self):
        return self._uid

    def __reduce__(self):
        return (type(self), tuple(getattr(self, f) for f in self._fields))

    def __copy__(self):
        return self

    def __deepcopy__(self, memo):
        return self


# ---------------------------------------------------------------- roles


class Role(_Interned):
    """A role name, possibly inverted.  ``Role('R', True)`` is R⁻."""

    __slots__ = ("name", "inverted", "_inv")
    _fields = ("name", "inverted")

    def __new__(cls, name: str, inverted: bool = False):
        return super().__new__(cls, name, bool(inverted))

    @property
    def inv(self) -> "Role":
        try:
            return self._inv
        except AttributeError:
            r = Role(self.name, not self.inverted)
            object.__setattr__(self, "_inv", r)
            return r

    def __repr__(self):
        return f"Role({self.name!r}{', True' if self.inverted else ''})"

    def __str__(self):
        return f"(inv {self.name})" if self.inverted else self.name

    def show(self) -> str:
        return self.name + ("⁻" if self.inverted else "")

    def sort_key(self):
        return (self.name, self.inverted)


def inv(r: Role) -> Role:
    return r.inv


# ---------------------------------------------------------------- concepts


class Concept(_Interned):
    __slots__ = ("_nnf", "_neg", "_str", "_size")

    def _init_cache(self):
        object.__setattr__(self, "_nnf", None)
        object.__setattr__(self, "_neg", None)
        object.__setattr__(self, "_str", None)
        object.__setattr__(self, "_size", None)

    def children(self) -> tuple["Concept", ...]:
        return ()

    def __str__(self):
        if self._str is None:
            object.__setattr__(self, "_str", _sexpr(self))
        return self._str

    def __repr__(self):
        return f"<{self}>"

    def show(self) -> str:
        """Render in DL notation (∃R.C, ≤n R.C, ...)."""
        return _show(self)

    @property
    def size(self) -> int:
        """Number of nodes in the syntax tree."""
        if self._size is None:
            object.__setattr__(self, "_size", 1 + sum(c.size for c in self.children()))
        return self._size

    def sort_key(self):
        return str(self)

    def __invert__(self) -> "Concept":
        return neg(self)


class Atom(Concept):
    __slots__ = ("name",)
    _fields = ("name",)

    def __new__(cls, name: str):
        return super().__new__(cls, name)


class Top(Concept):
    __slots__ = ()


class Bottom(Concept):
    __slots__ = ()


class Not(Concept):
    __slots__ = ("operand",)
    _fields = ("operand",)

    def __new__(cls, operand: Concept):
        return super().__new__(cls, operand)

    def children(self):
        return (self.operand,)


class And(Concept):
    __slots__ = ("left", "right")
    _fields = ("left", "right")

    def __new__(cls, left: Concept, right: Concept):
        return super().__new__(cls, left, right)

    def children(self):
        return (self.left, self.right)


class Or(Concept):
    __slots__ = ("left", "right")
    _fields = ("left", "right")

    def __new__(cls, left: Concept, right: Concept):
        return super().__new__(cls, left, right)

    def children(self):
        return (self.left, self.right)


class Exists(Concept):
    __slots__ = ("role", "filler")
    _fields = ("role", "filler")

    def __new__(cls, role: Role, filler: Concept):
        return super().__new__(cls, role, filler)

    def children(self):
        return (self.filler,)


class Forall(Concept):
    __slots__ = ("role", "filler")
    _fields = ("role", "filler")

    def __new__(cls, role: Role, filler: Concept):
        return super().__new__(cls, role, filler)

    def children(self):
        return (self.filler,)


class AtLeast(Concept):
    __slots__ = ("n", "role", "filler")
    _fields = ("n", "role", "filler")

    def __new__(cls, n: int, role: Role, filler: Concept | None = None):
        if n < 0:
            raise ValueError("number restriction bound must be non-negative")
        return super().__new__(cls, int(n), role, TOP if filler is None else filler)

    def children(self):
        return (self.filler,)


class AtMost(Concept):
    __slots__ = ("n", "role", "filler")
    _fields = ("n", "role", "filler")

    def __new__(cls, n: int, role: Role, filler: Concept | None = None):
        if n < 0:
            raise ValueError("number restriction bound must be non-negative")
        return super().__new__(cls, int(n), role, TOP if filler is None else filler)

    def children(self):
        return (self.filler,)


TOP = Top()
BOTTOM = Bottom()

NumberRestriction = (AtLeast, AtMost)
RoleConcept = (Exists, Forall, AtLeast, AtMost)


def conjunction(concepts: Iterable[Concept]) -> Concept:
    """Right-associated binary conjunction; the empty conjunction is ⊤."""
    items = list(concepts)
    if not items:
        return TOP
    out = items[-1]
    for c in reversed(items[:-1]):
        out = And(c, out)
    return out


def disjunction(concepts: Iterable[Concept]) -> Concept:
    items = list(concepts)
    if not items:
        return BOTTOM
    out = items[-1]
    for c in reversed(items[:-1]):
        out = Or(c, out)
    return out


def _sexpr(c: Concept) -> str:
    if isinstance(c, Atom):
        return c.name
    if isinstance(c, Top):
        return "top"
    if isinstance(c, Bottom):
        return "bottom"
    if isinstance(c, Not):
        return f"(not {c.operand})"
    if isinstance(c, And):
        return f"(and {c.left} {c.right})"
    if isinstance(c, Or):
        return f"(or {c.left} {c.right})"
    if isinstance(c, Exists):
        return f"(some {c.role} {c.filler})"
    if isinstance(c, Forall):
        return f"(all {c.role} {c.filler})"
    if isinstance(c, AtLeast):
        return f"(at-least {c.n} {c.role} {c.filler})"
    if isinstance(c, AtMost):
        return f"(at-most {c.n} {c.role} {c.filler})"
    raise TypeError(c)


def _show(c: Concept) -> str:
    def wrap(x: Concept) -> str:
        s = _show(x)
        return f"({s})" if isinstance(x, (And, Or)) else s

    if isinstance(c, Atom):
        return c.name
    if isinstance(c, Top):
        return "⊤"
    if isinstance(c, Bottom):
        return "⊥"
    if isinstance(c, Not):
        return "¬" + wrap(c.operand)
    if isinstance(c, And):
        return f"{wrap(c.left)} ⊓ {wrap(c.right)}"
    if isinstance(c, Or):
        return f"{wrap(c.left)} ⊔ {wrap(c.right)}"
    if isinstance(c, Exists):
        return f"∃{c.role.show()}.{wrap(c.filler)}"
    if isinstance(c, Forall):
        return f"∀{c.role.show()}.{wrap(c.filler)}"
    if isinstance(c, AtLeast):
        return f"≥{c.n} {c.role.show()}.{wrap(c.filler)}"
    if isinstance(c, AtMost):
        return f"≤{c.n} {c.role.show()}.{wrap(c.filler)}"
    raise TypeError(c)


# ---------------------------------------------------------------- NNF


def nnf(c: Concept) -> Concept:
    """Negation normal form: negation is pushed down to concept names."""
    cached = c._nnf
    if cached is not None:
        return cached
    out = _nnf(c)
    object.__setattr__(c, "_nnf", out)
    return out


def _nnf(c: Concept) -> Concept:
    if isinstance(c, (Atom, Top, Bottom)):
        return c
    if isinstance(c, And):
        return And(nnf(c.left), nnf(c.right))
    if isinstance(c, Or):
        return Or(nnf(c.left), nnf(c.right))
    if isinstance(c, Exists):
        return Exists(c.role, nnf(c.filler))
    if isinstance(c, Forall):
        return Forall(c.role, nnf(c.filler))
    if isinstance(c, AtLeast):
        return AtLeast(c.n, c.role, nnf(c.filler))
    if isinstance(c, AtMost):
        return AtMost(c.n, c.role, nnf(c.filler))
    # negation
    d = c.operand
    if isinstance(d, Atom):
        return c
    if isinstance(d, Top):
        return BOTTOM
    if isinstance(d, Bottom):
        return TOP
    if isinstance(d, Not):
        return nnf(d.operand)
    if isinstance(d, And):
        return Or(nnf(Not(d.left)), nnf(Not(d.right)))
    if isinstance(d, Or):
        return And(nnf(Not(d.left)), nnf(Not(d.right)))
    if isinstance(d, Exists):
        return Forall(d.role, nnf(Not(d.filler)))
    if isinstance(d, Forall):
        return Exists(d.role, nnf(Not(d.filler)))
    if isinstance(d, AtLeast):
        if d.n == 0:
            return BOTTOM
        return AtMost(d.n - 1, d.role, nnf(d.filler))
    if isinstance(d, AtMost):
        return AtLeast(d.n + 1, d.role, nnf(d.filler))
    raise TypeError(d)


def neg(c: Concept) -> Concept:
    """``~C``: the NNF of ¬C."""
    cached = c._neg
    if cached is not None:
        return cached
    out = nnf(Not(c))
    object.__setattr__(c, "_neg", out)
    return out


def is_nnf(c: Concept) -> bool:
    if isinstance(c, Not):
        return isinstance(c.operand, (Atom, Top))
    return all(is_nnf(x) for x in c.children())


# ---------------------------------------------------------------- closures


def walk(c: Concept) -> Iterator[Concept]:
    """Pre-order traversal of all subterm occurrences."""
    stack = [c]
    while stack:
        x = stack.pop()
        yield x
        stack.extend(reversed(x.children()))


def subconcepts(d: Concept) -> frozenset[Concept]:
    """sub(D): the syntactic subconcepts of ``d``, including ``d``."""
    return frozenset(walk(d))


def closure(d: Concept) -> frozenset[Concept]:
    """clos(D): smallest superset of {d} closed under subconcepts and ``~``."""
    seen: set[Concept] = set()
    todo = [d]
    while todo:
        c = todo.pop()
        if c in seen:
            continue
        seen.add(c)
        todo.extend(c.children())
        todo.append(neg(c))
    return frozenset(seen)


def extended_closure(d: Concept, rbox: RoleBox) -> frozenset[Concept]:
    """clos(d) plus every ∀R.C the ∀₊-rule can introduce.

    The ∀₊-rule writes ∀R.C for a transitive R ⊑* S whenever ∀S.C is present,
    and that concept need not be a member of clos(d) when R ≠ S.
    """
    base = closure(nnf(d))
    extra = set()
    for c in base:
        if isinstance(c, Forall):
            for r in rbox.transitive_sub_roles(c.role):
                extra.add(Forall(r, c.filler))
    return base | frozenset(extra)


def roles_in(c: Concept) -> frozenset[Role]:
    return frozenset(x.role for x in walk(c) if isinstance(x, RoleConcept))


def atoms_in(c: Concept) -> frozenset[str]:
    return frozenset(x.name for x in walk(c) if isinstance(x, Atom))


def number_restrictions(concepts: Iterable[Concept]) -> list[Concept]:
    return [c for c in concepts if isinstance(c, NumberRestriction)]


# ---------------------------------------------------------------- role boxes


@dataclass(frozen=True)
class RoleBox:
    """Transitive role names, declared inclusions, and the closed hierarchy ⊑*.

    Build instances with :func:`close_hierarchy`; the ``_sup``/``_sub`` maps
    hold the reflexive-transitive, Inv-closed subsumption relation over
    ``roles`` (every mentioned role and its inverse).
    """

    transitive_roles: frozenset[str]
    inclusions: frozenset[tuple[Role, Role]]
    roles: frozenset[Role]
    _sup: dict = field(repr=False, compare=False)
    _sub: dict = field(repr=False, compare=False)
    _trans_sub: dict = field(default_factory=dict, repr=False, compare=False)

    @property
    def subsumption(self) -> frozenset[tuple[Role, Role]]:
        return frozenset((r, s) for r, sups in self._sup.items() for s in sups)

    def subsumed(self, r: Role, s: Role) -> bool:
        """r ⊑* s."""
        if r is s:
            return True
        sups = self._sup.get(r)
        return sups is not None and s in sups

    def super_roles(self, r: Role) -> frozenset[Role]:
        return self._sup.get(r, frozenset((r,)))

    def sub_roles(self, r: Role) -> frozenset[Role]:
        return self._sub.get(r, frozenset((r,)))

    def transitive_sub_roles(self, s: Role) -> tuple[Role, ...]:
        """All R with R ⊑* s and Trans(R), in a fixed order."""
        out = self._trans_sub.get(s)
        if out is None:
            out = tuple(sorted((r for r in self.sub_roles(s) if is_transitive(r, self)),
                               key=Role.sort_key))
            self._trans_sub[s] = out
        return out

    def with_roles(self, extra: Iterable[Role]) -> "RoleBox":
        extra = set(extra)
        if extra <= self.roles:
            return self
        return close_hierarchy(self.transitive_roles, self.inclusions, self.roles | extra)

    def role_names(self) -> frozenset[str]:
        return frozenset(r.name for r in self.roles)

    @property
    def is_flat(self) -> bool:
        """True when no role has a proper super-role (⊑* is the identity)."""
        return all(len(s) == 1 for s in self._sup.values())


def is_transitive(r: Role, rbox: RoleBox) -> bool:
    return r.name in rbox.transitive_roles


def is_simple(r: Role, rbox: RoleBox) -> bool:
    return not any(is_transitive(s, rbox) for s in rbox.sub_roles(r))


def close_hierarchy(transitive_roles: Iterable[str] = (),
                    inclusions: Iterable[tuple[Role, Role]] = (),
                    roles: Iterable[Role] = ()) -> RoleBox:
    """Close declared inclusions reflexively, transitively and under Inv."""
    trans = frozenset(transitive_roles)
    incl = frozenset(inclusions)
    universe: set[Role] = set(roles)
    universe.update(Role(n) for n in trans)
    for r, s in incl:
        universe.update((r, s))
    universe |= {r.inv for r in universe}

    sup: dict[Role, set[Role]] = {r: {r} for r in universe}
    for r, s in incl:
        sup[r].add(s)
        sup[r.inv].add(s.inv)
    changed = True
    while changed:
        changed = False
        for r in universe:
            extra = set()
            for s in sup[r]:
                extra |= sup[s]
            if not extra <= sup[r]:
                sup[r] |= extra
                changed = True
    sub: dict[Role, set[Role]] = {r: set() for r in universe}
    for r, sups in sup.items():
        for s in sups:
            sub[s].add(r)
    return RoleBox(
        transitive_roles=trans,
        inclusions=incl,
        roles=frozenset(universe),
        _sup={r: frozenset(v) for r, v in sup.items()},
        _sub={r: frozenset(v) for r, v in sub.items()},
    )


EMPTY_RBOX = close_hierarchy()


def check_simple_number_restrictions(concepts: Iterable[Concept], rbox: RoleBox):
    """Raise if any number restriction among ``concepts`` uses a non-simple role."""
    from .errors import NonSimpleRoleInNumberRestriction

    for c in sorted(number_restrictions(concepts), key=Concept.sort_key):
        if not is_simple(c.role, rbox):
            raise NonSimpleRoleInNumberRestriction(c.role, c)
