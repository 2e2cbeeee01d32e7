"""The s-expression knowledge-base format."""

import pytest
from hypothesis import given
from hypothesis import strategies as st

from conftest import concepts
from shiqtab.errors import KbError, NonSimpleRoleInNumberRestriction, ParseError
from shiqtab.kbfile import Query, format_concept, format_kb, kb_from_parts, parse_concept, parse_kb
from shiqtab.shiq import decide_sat
from shiqtab.syntax import TOP, Atom, AtLeast, AtMost, Role

EXAMPLE = """(transitive R)
(implies-role F R)
(define C1 (some (inv F) (and C (at-most 1 F top))))
"""


class TestParse:
    def test_document(self):
        doc = parse_kb(EXAMPLE)
        assert doc.transitive == ("R",)
        assert doc.role_inclusions == ((Role("F"), Role("R")),)
        assert [n for n, _ in doc.definitions] == ["C1"]
        assert doc.rbox().subsumed(Role("F", True), Role("R", True))

    def test_unqualified_restriction(self):
        assert parse_concept("(at-least 2 R)") == AtLeast(2, Role("R"), TOP)

    def test_comments_and_queries(self):
        doc = parse_kb("; header\n(implies A B) ; trailing\n(sat A)\n(subsumes A B)\n")
        assert doc.queries == (Query("sat", (Atom("A"),)), Query("subsumes", (Atom("A"), Atom("B"))))

    def test_equivalent_gives_two_gcis(self):
        doc = parse_kb("(equivalent A (and B C))")
        assert len(doc.gcis) == 2

    def test_definitions_expand(self):
        doc = parse_kb("(define X (and A Y))\n(define Y B)")
        assert doc.concept("X") == parse_concept("(and A B)")
        assert doc.concept("(some R X)") == parse_concept("(some R (and A B))")


class TestErrors:
    def test_unterminated(self):
        with pytest.raises(ParseError) as e:
            parse_concept("(and A")
        assert "end of input" in str(e.value)

    def test_position(self):
        with pytest.raises(ParseError) as e:
            parse_kb("(implies A B)\n(implies A (frob B))")
        assert (e.value.line, e.value.column) == (2, 13)
        assert "and" in e.value.expected

    def test_duplicate_definition(self):
        with pytest.raises(KbError):
            parse_kb("(define X A)\n(define X B)")

    def test_cyclic_definition(self):
        with pytest.raises(KbError, match="cyclic"):
            parse_kb("(define X (some R Y))\n(define Y (and A X))")

    def test_reserved_name(self):
        with pytest.raises(ParseError, match="reserved"):
            parse_kb("(transitive __U)")
        with pytest.raises(ParseError, match="reserved"):
            parse_concept("(some __U A)")

    def test_unknown_statement(self):
        with pytest.raises(ParseError, match="unknown statement"):
            parse_kb("(assert A)")

    def test_non_simple_has_position(self):
        doc = parse_kb("(transitive R)\n(sat (at-most 1 R A))\n")
        c = doc.queries[0].args[0]
        with pytest.raises(NonSimpleRoleInNumberRestriction) as e:
            decide_sat(c, doc.rbox())
        assert doc.locate(e.value.concept) == (2, 6)
        assert doc.locate(AtMost(1, Role("R"), Atom("A"))) == (2, 6)


class TestRoundTrip:
    def test_example(self):
        doc = parse_kb(EXAMPLE + "(implies C1 (or A (not B)))\n(sat C1)\n")
        assert parse_kb(format_kb(doc)) == doc

    @given(st.lists(st.tuples(concepts(), concepts()), max_size=3), concepts())
    def test_random_documents(self, gcis, q):
        doc = kb_from_parts(["R"], [(Role("S"), Role("R", True))], [("N", q)], gcis,
                            [Query("sat", (q,))])
        text = format_kb(doc)
        assert parse_kb(text) == doc
        assert format_kb(parse_kb(text)) == text

    @given(concepts())
    def test_concepts(self, c):
        assert parse_concept(format_concept(c)) == c
