"""Command line, DOT output, domino generator and stored witnesses."""

import json
import subprocess
import sys
from pathlib import Path

import pytest

from conftest import C
from shiqtab.audit import validate_completion_tree
from shiqtab.cli import run_command
from shiqtab.completion import CompletionTree
from shiqtab.domino import DominoSystem, domino_doc, domino_gen
from shiqtab.dot import emit_dot
from shiqtab.errors import NonSimpleRoleInNumberRestriction
from shiqtab.kb import internalise_sat, is_satisfiable
from shiqtab.kbfile import parse_kb
from shiqtab.shiq import decide_sat
from shiqtab.si import si_decide_sat
from shiqtab.syntax import Role
from shiqtab.trace import Tracer
from shiqtab.witness_io import dump_witness, load_witness

DATA = Path(__file__).parent / "data"


def run(*argv):
    return run_command([str(a) for a in argv])


class TestSat:
    def test_contradiction(self):
        assert run("sat", "--concept", "(and A (not A))") == (1, "UNSAT\n")

    def test_infinite_model(self, tmp_path):
        dot = tmp_path / "t.dot"
        status, out = run("sat", "--kb", DATA / "infmodel.kb", "--concept", "InfModel",
                          "--trace", f"dot:{dot}")
        assert status == 0
        assert out.splitlines()[0] == "SAT"
        assert "blocked by" in out
        text = dot.read_text()
        assert 'class="blocked"' in text and 'class="blocker"' in text

    def test_queries_from_file(self):
        status, out = run("sat", "--kb", DATA / "infmodel.kb")
        assert status == 0 and out.startswith("SAT")

    def test_oracle_flag(self):
        status, out = run("sat", "--concept", "(and (some R A) (all R B))", "--oracle-max-domain", "2")
        assert status == 0 and "oracle: model with 1 elements" in out

    def test_si_engine(self):
        assert run("sat", "--engine", "si", "--concept", "(and (some R A) (all R (not A)))")[0] == 1

    def test_module_entry_point(self):
        p = subprocess.run([sys.executable, "-m", "shiqtab", "sat", "--concept", "A"],
                           capture_output=True, text=True)
        assert p.returncode == 0 and p.stdout == "SAT\n"


class TestSubsumesClassify:
    def test_gci_subsumption(self):
        assert run("subsumes", "--kb", DATA / "t.kb", "--sub", "A", "--super", "B") == (0, "YES\n")
        assert run("subsumes", "--kb", DATA / "t.kb", "--sub", "B", "--super", "A") == (1, "NO\n")

    def test_inline_subsumption(self):
        status, out = run("subsumes", "--sub", "(and A B)", "--super", "A")
        assert (status, out) == (0, "YES\n")

    def test_classify(self):
        status, out = run("classify", "--kb", DATA / "t.kb")
        assert status == 0
        lines = out.splitlines()
        assert lines[0] == "B" and lines[1] == "  A"


class TestErrors:
    def test_parse_error(self):
        status, out = run("sat", "--concept", "(and A")
        assert status == 2 and "end of input" in out

    def test_unknown_name(self):
        status, out = run("sat", "--kb", DATA / "t.kb", "--concept", "Nope")
        assert status == 2 and "unknown concept name" in out

    def test_non_simple_with_location(self, tmp_path):
        kb = tmp_path / "ns.kb"
        kb.write_text("(transitive R)\n(sat (at-most 1 R A))\n")
        status, out = run("sat", "--kb", kb)
        assert status == 2
        assert f"{kb}:2:6:" in out and "non-simple role R" in out

    def test_non_simple_names_restriction_as_written(self, tmp_path):
        kb = tmp_path / "t.kb"
        kb.write_text("(transitive R)\n")
        status, out = run("sat", "--kb", kb, "--concept", "(at-most 1 R A)")
        assert status == 2 and "(at-most 1 R A)" in out

    def test_missing_file(self, tmp_path):
        assert run("sat", "--kb", tmp_path / "none.kb", "--concept", "A")[0] == 2

    def test_usage(self):
        assert run("frobnicate")[0] == 2
        assert run("subsumes", "--sub", "A")[0] == 2
        assert run("sat", "--trace", "png:x", "--concept", "A")[0] == 2

    def test_si_sat_rejects_hierarchy(self, tmp_path):
        kb = tmp_path / "h.kb"
        kb.write_text("(implies-role F R)\n")
        assert run("si-sat", "--kb", kb, "--concept", "A")[0] == 2


class TestSiSat:
    def test_reset_trace(self, tmp_path):
        dot = tmp_path / "si.dot"
        status, out = run("si-sat", "--reset", "-v", "--concept",
                          "(and (some (inv R) (all R (not A))) (some R B))", "--trace", f"dot:{dot}")
        assert status == 0
        text = dot.read_text()
        assert "reset #1" in text

    def test_plain(self):
        assert run("si-sat", "--concept", "(and (some (inv R) (all R (not A))) A)")[0] == 1


class TestValidate:
    def test_roundtrip(self, tmp_path):
        w = tmp_path / "w.json"
        assert run("sat", "--kb", DATA / "infmodel.kb", "--save-witness", w)[0] == 0
        status, out = run("validate", "--witness", w, "-v")
        assert status == 0 and out.rstrip().endswith("VALID")
        assert out.count("unravel budget") == 3

    def test_tampered(self, tmp_path):
        w = tmp_path / "w.json"
        run("sat", "--kb", DATA / "infmodel.kb", "--save-witness", w)
        data = json.loads(w.read_text())
        data["nodes"][0]["label"].append("(not C)")
        data["nodes"][0]["label"].append("C")
        w.write_text(json.dumps(data))
        status, out = run("validate", "--witness", w)
        assert status == 1 and "INVALID" in out

    def test_malformed(self, tmp_path):
        w = tmp_path / "w.json"
        w.write_text("{}")
        assert run("validate", "--witness", w)[0] == 2


class TestWitnessIO:
    def test_dump_load(self, infmodel):
        c, rb = infmodel
        p = internalise_sat(parse_kb("(transitive R)(implies-role F R)").terminology(), c)
        v = decide_sat(p.goal, p.rbox_u)
        text = dump_witness(v.witness, p.goal, p.rbox_u)
        w = load_witness(text)
        assert dump_witness(w.tree, w.concept, w.rbox) == text
        assert validate_completion_tree(w.tree, w.concept, w.rbox).ok

    def test_cyclic_parents_rejected(self):
        text = json.dumps({"format": "shiq-witness/1", "concept": "A", "nodes": [
            {"id": 0, "parent": 1, "edge": [], "label": ["A"]},
            {"id": 1, "parent": 0, "edge": ["R"], "label": []}]})
        with pytest.raises(ValueError):
            load_witness(text)


class TestDot:
    def test_exists_witness(self):
        out = emit_dot(decide_sat(C("(some R A)")).witness)
        assert out.startswith("digraph completion {")
        assert out.count("->") == 1 and 'label="R"' in out
        assert out.count("[label=") == 3

    def test_deterministic(self, infmodel):
        c, rb = infmodel
        a = emit_dot(decide_sat(c, rb, seed=3).witness)
        b = emit_dot(decide_sat(c, rb, seed=3).witness)
        assert a == b
        t1, t2 = Tracer(), Tracer()
        decide_sat(c, rb, seed=3, tracer=t1)
        decide_sat(c, rb, seed=3, tracer=t2)
        assert emit_dot(t1) == emit_dot(t2)

    def test_empty_edge_dashed(self):
        t = CompletionTree([C("A")])
        y = t.new_child(0, [C("(some R A)").role], [])
        t.clear_edge(y)
        assert 'label="∅", style="dashed"' in emit_dot(t)

    def test_si_shows_b_labels(self):
        v = si_decide_sat(C("(and (some R A) (all R B))"))
        out = emit_dot(v.witness)
        assert "L: {" in out and "B: {" in out

    def test_escaping(self):
        t = CompletionTree([C("A")])
        assert '\\n' in emit_dot(t) and "\n{" not in emit_dot(t)

    def test_rejects_other_objects(self):
        with pytest.raises(TypeError):
            emit_dot(42)


class TestDomino:
    def one_tile(self):
        return DominoSystem(("t",), frozenset({("t", "t")}), frozenset({("t", "t")}))

    def test_single_tile(self):
        text = domino_gen(self.one_tile())
        doc = domino_doc(self.one_tile())
        grid = [ax for ax in doc.axioms if str(ax.lhs) in "ABCD"]
        cover = [ax for ax in doc.axioms if str(ax.lhs).startswith("(or")]
        compat = [ax for ax in doc.axioms if str(ax.lhs).startswith("Tile_")]
        assert len(grid) == 4 and len(cover) == 1 and len(compat) == 1
        assert len(doc.axioms) == 6
        a_axiom = next(line for line in text.splitlines() if line.startswith("(implies A "))
        assert "(at-most 3 S11)" in a_axiom

    def test_hierarchy(self):
        rb = domino_doc(self.one_tile()).rbox()
        assert set(rb.transitive_roles) == {"S11", "S12", "S21", "S22"}
        assert rb.subsumed(Role("X1"), Role("S11")) and rb.subsumed(Role("Y2"), Role("S22"))
        assert not rb.subsumed(Role("X1"), Role("S22"))

    def test_engine_refuses(self):
        sys_ = DominoSystem(("a", "b"), frozenset({("a", "b"), ("b", "a")}), frozenset({("a", "a"), ("b", "b")}))
        doc = domino_doc(sys_)
        t = doc.terminology()
        with pytest.raises(NonSimpleRoleInNumberRestriction) as e:
            is_satisfiable(t, doc.queries[0].args[0])
        assert e.value.role.name.startswith("S")
        assert e.value.role.name in {"S11", "S12", "S21", "S22"}

    def test_empty_rejected(self):
        with pytest.raises(ValueError):
            DominoSystem((), frozenset(), frozenset())
        assert run("domino-gen", "--tiles", "")[0] == 2

    def test_json(self, tmp_path):
        s = self.one_tile()
        assert DominoSystem.from_json(s.to_json()) == s
        f = tmp_path / "sys.json"
        f.write_text(s.to_json())
        status, out = run("domino-gen", "--system", f)
        assert status == 0 and out == domino_gen(s)

    def test_cli_sat_rejects(self, tmp_path):
        kb = tmp_path / "d.kb"
        run("domino-gen", "--tiles", "a", "-o", kb)
        status, out = run("sat", "--kb", kb)
        assert status == 2 and "S11" in out
