"""S-expression knowledge-base format: tokenizer, parser, document model and printer.

Statements::

    (transitive R)
    (implies-role R S)          ; R ⊑ S, either side may be (inv R)
    (define NAME C)             ; NAME abbreviates C wherever it is used
    (implies C D)               ; GCI C ⊑ D
    (equivalent C D)            ; C ⊑ D and D ⊑ C
    (sat C)                     ; query
    (subsumes SUB SUPER)        ; query: SUB ⊑ SUPER ?

Concepts: NAME, top, bottom, (not C), (and C ...), (or C ...), (some R C),
(all R C), (at-least n R [C]), (at-most n R [C]).  Roles: NAME or (inv NAME).
A comment runs from ``;`` to the end of the line.
"""

from __future__ import annotations

import re
from dataclasses import dataclass, field

from .errors import KbError, ParseError
from .kb import RESERVED_PREFIX, Terminology
from .syntax import (
    BOTTOM,
    TOP,
    And,
    Atom,
    AtLeast,
    AtMost,
    Concept,
    Exists,
    Forall,
    Not,
    NumberRestriction,
    Or,
    Role,
    RoleBox,
    close_hierarchy,
    conjunction,
    disjunction,
    neg,
)

KEYWORDS = frozenset({"top", "bottom", "not", "and", "or", "some", "all",
                      "at-least", "at-most", "inv"})
STATEMENTS = ("transitive", "implies-role", "define", "implies", "equivalent", "sat", "subsumes")

_TOKEN = re.compile(r"""
    (?P<ws>[ \t\r]+)
  | (?P<nl>\n)
  | (?P<comment>;[^\n]*)
  | (?P<lp>\()
  | (?P<rp>\))
  | (?P<int>\d+(?![A-Za-z_]))
  | (?P<ident>[A-Za-z_][A-Za-z0-9_\-.']*)
""", re.VERBOSE)


@dataclass(frozen=True)
class Token:
    kind: str
    text: str
    line: int
    column: int


def tokenize(text: str, source: str = "<input>") -> list[Token]:
    out = []
    pos, line, col = 0, 1, 1
    while pos < len(text):
        m = _TOKEN.match(text, pos)
        if m is None:
            raise ParseError(f"unexpected character {text[pos]!r}", line, col, source=source)
        kind = m.lastgroup
        if kind == "nl":
            line, col = line + 1, 1
        else:
            if kind not in ("ws", "comment"):
                out.append(Token(kind, m.group(), line, col))
            col += m.end() - m.start()
        pos = m.end()
    out.append(Token("eof", "", line, col))
    return out


@dataclass(frozen=True)
class Axiom:
    kind: str          # "implies" or "equivalent"
    lhs: Concept
    rhs: Concept


@dataclass(frozen=True)
class Query:
    kind: str          # "sat" or "subsumes"
    args: tuple[Concept, ...]


@dataclass(frozen=True)
class KbDocument:
    transitive: tuple[str, ...] = ()
    role_inclusions: tuple[tuple[Role, Role], ...] = ()
    definitions: tuple[tuple[str, Concept], ...] = ()
    axioms: tuple[Axiom, ...] = ()
    queries: tuple[Query, ...] = ()
    source: str = field(default="<input>", compare=False)
    # first source position of each concept (and of its negation), for diagnostics
    positions: dict = field(default_factory=dict, compare=False, repr=False)

    @property
    def defined(self) -> dict[str, Concept]:
        return dict(self.definitions)

    @property
    def role_decls(self):
        return self.transitive, self.role_inclusions

    @property
    def gcis(self) -> list[tuple[Concept, Concept]]:
        out = []
        for ax in self.axioms:
            out.append((ax.lhs, ax.rhs))
            if ax.kind == "equivalent":
                out.append((ax.rhs, ax.lhs))
        return out

    def rbox(self) -> RoleBox:
        return close_hierarchy(self.transitive, self.role_inclusions)

    def expand(self, c: Concept) -> Concept:
        """Replace defined names by their (recursively expanded) definitions."""
        defs = self.defined
        memo: dict[Concept, Concept] = {}
        active: list[str] = []

        def go(x: Concept) -> Concept:
            hit = memo.get(x)
            if hit is not None:
                return hit
            if isinstance(x, Atom):
                if x.name not in defs:
                    out = x
                else:
                    if x.name in active:
                        cycle = " -> ".join(active[active.index(x.name):] + [x.name])
                        raise KbError(f"cyclic definition: {cycle}")
                    active.append(x.name)
                    out = go(defs[x.name])
                    active.pop()
            elif isinstance(x, Not):
                out = Not(go(x.operand))
            elif isinstance(x, And):
                out = And(go(x.left), go(x.right))
            elif isinstance(x, Or):
                out = Or(go(x.left), go(x.right))
            elif isinstance(x, (Exists, Forall)):
                out = type(x)(x.role, go(x.filler))
            elif isinstance(x, NumberRestriction):
                out = type(x)(x.n, x.role, go(x.filler))
            else:
                out = x
            memo[x] = out
            return out
        return go(c)

    def terminology(self) -> Terminology:
        gcis = tuple((self.expand(a), self.expand(b)) for a, b in self.gcis)
        return Terminology(gcis, self.rbox())

    def concept(self, text: str) -> Concept:
        """A defined name, or an inline concept expression; returned expanded."""
        text = text.strip()
        if text in self.defined:
            return self.expand(Atom(text))
        return self.expand(parse_concept(text, source="<concept>"))

    def locate(self, c: Concept) -> tuple[int, int] | None:
        pos = self.positions.get(c)
        if pos is None and c is not None:
            pos = self.positions.get(neg(c))
        return pos


class _Parser:
    def __init__(self, text: str, source: str, allow_reserved: bool = False):
        self.source = source
        self.allow_reserved = allow_reserved
        self.toks = tokenize(text, source)
        self.i = 0
        self.positions: dict = {}

    def peek(self) -> Token:
        return self.toks[self.i]

    def next(self) -> Token:
        t = self.toks[self.i]
        self.i += 1
        return t

    def fail(self, msg, tok: Token, expected=()):
        if tok.kind == "eof":
            msg = f"{msg} at end of input"
        raise ParseError(msg, tok.line, tok.column, tuple(expected), self.source)

    def expect(self, kind, what):
        t = self.next()
        if t.kind != kind:
            self.fail(f"expected {what}, found {t.text or t.kind!r}", t, (what,))
        return t

    def ident(self, what="identifier") -> str:
        t = self.next()
        if t.kind != "ident" or t.text in KEYWORDS:
            self.fail(f"expected {what}, found {t.text or t.kind!r}", t, (what,))
        self.check_reserved(t)
        return t.text

    def check_reserved(self, t: Token):
        if t.text.startswith(RESERVED_PREFIX) and not self.allow_reserved:
            self.fail(f"identifier {t.text!r} uses the reserved prefix {RESERVED_PREFIX!r}", t)

    def role(self) -> Role:
        t = self.peek()
        if t.kind == "lp":
            self.next()
            kw = self.next()
            if kw.text != "inv":
                self.fail(f"expected 'inv', found {kw.text or kw.kind!r}", kw, ("inv",))
            name = self.ident("role name")
            self.expect("rp", "')'")
            return Role(name, True)
        return Role(self.ident("role name"))

    def concept(self) -> Concept:
        t = self.peek()
        if t.kind == "ident":
            self.next()
            if t.text == "top":
                return TOP
            if t.text == "bottom":
                return BOTTOM
            if t.text in KEYWORDS:
                self.fail(f"keyword {t.text!r} needs parentheses", t, ("concept",))
            self.check_reserved(t)
            return Atom(t.text)
        if t.kind != "lp":
            self.fail(f"expected a concept, found {t.text or t.kind!r}", t, ("concept", "'('"))
        self.next()
        head = self.next()
        op = head.text
        if op == "not":
            c = Not(self.concept())
        elif op in ("and", "or"):
            parts = []
            while self.peek().kind != "rp":
                if self.peek().kind == "eof":
                    self.fail("unterminated expression", self.peek(), ("concept", "')'"))
                parts.append(self.concept())
            c = conjunction(parts) if op == "and" else disjunction(parts)
        elif op in ("some", "all"):
            r = self.role()
            f = self.concept()
            c = Exists(r, f) if op == "some" else Forall(r, f)
        elif op in ("at-least", "at-most"):
            n = self.expect("int", "non-negative integer")
            r = self.role()
            f = TOP if self.peek().kind == "rp" else self.concept()
            c = (AtLeast if op == "at-least" else AtMost)(int(n.text), r, f)
            self.positions.setdefault(c, (t.line, t.column))
            self.positions.setdefault(neg(c), (t.line, t.column))
        else:
            self.fail(f"unknown concept operator {op or head.kind!r}", head,
                      ("not", "and", "or", "some", "all", "at-least", "at-most"))
        self.expect("rp", "')'")
        return c

    def document(self) -> KbDocument:
        trans, incl, defs, axioms, queries = [], [], {}, [], []
        while self.peek().kind != "eof":
            self.expect("lp", "'('")
            head = self.next()
            kw = head.text
            if kw == "transitive":
                name = self.ident("role name")
                if name not in trans:
                    trans.append(name)
            elif kw == "implies-role":
                incl.append((self.role(), self.role()))
            elif kw == "define":
                tok = self.peek()
                name = self.ident("concept name")
                if name in defs:
                    raise KbError(f"{self.source}:{tok.line}:{tok.column}: duplicate definition of {name}")
                defs[name] = self.concept()
            elif kw in ("implies", "equivalent"):
                axioms.append(Axiom(kw, self.concept(), self.concept()))
            elif kw == "sat":
                queries.append(Query(kw, (self.concept(),)))
            elif kw == "subsumes":
                queries.append(Query(kw, (self.concept(), self.concept())))
            else:
                self.fail(f"unknown statement {kw or head.kind!r}", head, STATEMENTS)
            self.expect("rp", "')'")
        return KbDocument(tuple(trans), tuple(incl), tuple(defs.items()), tuple(axioms),
                          tuple(queries), self.source, self.positions)


def parse_kb(text: str, source: str = "<input>") -> KbDocument:
    doc = _Parser(text, source).document()
    # surface cyclic definitions now rather than at first use
    for name, _ in doc.definitions:
        doc.expand(Atom(name))
    return doc


def parse_concept(text: str, source: str = "<concept>", allow_reserved: bool = False) -> Concept:
    p = _Parser(text, source, allow_reserved)
    c = p.concept()
    t = p.peek()
    if t.kind != "eof":
        p.fail(f"unexpected {t.text!r} after the concept", t, ("end of input",))
    return c


def parse_role(text: str, allow_reserved: bool = False) -> Role:
    p = _Parser(text, "<role>", allow_reserved)
    r = p.role()
    if p.peek().kind != "eof":
        p.fail("unexpected input after the role", p.peek())
    return r


# ---------------------------------------------------------------- printing


def format_role(r: Role) -> str:
    return str(r)


def format_concept(c: Concept) -> str:
    return str(c)


def format_kb(doc: KbDocument) -> str:
    lines = []
    for name in doc.transitive:
        lines.append(f"(transitive {name})")
    for r, s in doc.role_inclusions:
        lines.append(f"(implies-role {r} {s})")
    for name, c in doc.definitions:
        lines.append(f"(define {name} {c})")
    for ax in doc.axioms:
        lines.append(f"({ax.kind} {ax.lhs} {ax.rhs})")
    for q in doc.queries:
        lines.append(f"({q.kind} {' '.join(map(str, q.args))})")
    return "\n".join(lines) + ("\n" if lines else "")


def kb_from_parts(transitive=(), inclusions=(), definitions=(), gcis=(), queries=()) -> KbDocument:
    return KbDocument(tuple(transitive), tuple(inclusions), tuple(definitions),
                      tuple(Axiom("implies", a, b) for a, b in gcis), tuple(queries))

