"""Command-line front end: ``shiqtab sat|subsumes|classify|si-sat|validate|domino-gen``.

Exit status is 0 for SAT / YES / valid, 1 for UNSAT / NO / invalid and 2
for usage or input errors.
"""

from __future__ import annotations

import argparse
import contextlib
import io
import sys
from pathlib import Path

from .audit import validate_completion_tree
from .completion import CompletionTree
from .domino import DominoSystem, domino_gen
from .dot import emit_dot
from .errors import KbError, NonSimpleRoleInNumberRestriction, NotSiConcept, ParseError, ShiqError
from .kb import classify, internalise_sat, is_satisfiable
from .kbfile import KbDocument, parse_kb
from .oracle import find_model
from .si import si_decide_sat, si_decide_sat_trace
from .syntax import And, Atom, Not, NumberRestriction, atoms_in
from .tableau import block_distance, unravel_witness, validate_tableau
from .trace import Tracer
from .witness_io import dump_witness, load_witness

SAT_OK, NEGATIVE, USAGE = 0, 1, 2


class UsageError(Exception):
    """Bad input detected by the front end itself (exit status 2)."""


class _Parser(argparse.ArgumentParser):
    # keep argparse from calling sys.exit so run_command can report status 2
    def error(self, message):
        raise UsageError(f"{self.prog}: {message}")


def build_parser() -> argparse.ArgumentParser:
    p = _Parser(prog="shiqtab", description="SHIQ / SI concept satisfiability and subsumption.")
    sub = p.add_subparsers(dest="command", parser_class=_Parser)
    sub.required = True

    def common(sp, engine=True):
        sp.add_argument("--kb", metavar="FILE", help="knowledge base in s-expression format")
        sp.add_argument("--seed", type=int, default=None, help="fix tie-breaking orders")
        sp.add_argument("--trace", metavar="dot:FILE", help="write a Graphviz rendering of the run")
        sp.add_argument("--oracle-max-domain", type=int, metavar="N", default=None,
                        help="cross-check against a brute-force model search up to N elements")
        sp.add_argument("-v", "--verbose", action="store_true", help="print search statistics")
        if engine:
            sp.add_argument("--engine", choices=("shiq", "si"), default="shiq")

    sp = sub.add_parser("sat", help="decide satisfiability of a concept")
    common(sp)
    sp.add_argument("--concept", help="defined name or inline concept; default: the KB's sat queries")
    sp.add_argument("--save-witness", metavar="FILE", help="store the completion tree as JSON")

    sp = sub.add_parser("si-sat", help="decide an SI concept with the SI engine")
    common(sp, engine=False)
    sp.add_argument("--concept")
    sp.add_argument("--reset", action="store_true",
                    help="use the depth-first variant that discards finished subtrees")

    sp = sub.add_parser("subsumes", help="decide SUB ⊑ SUPER")
    common(sp)
    sp.add_argument("--sub", required=True)
    sp.add_argument("--super", required=True, dest="sup")

    sp = sub.add_parser("classify", help="print the hierarchy of the KB's concept names")
    common(sp)
    sp.add_argument("--exhaustive", action="store_true", help="run every pairwise test")

    sp = sub.add_parser("validate", help="audit a stored witness")
    sp.add_argument("--witness", required=True, metavar="FILE")
    sp.add_argument("--budgets", type=int, default=3, metavar="K",
                    help="unravel at 1..K times the block distance (default 3)")
    sp.add_argument("-v", "--verbose", action="store_true")

    sp = sub.add_parser("domino-gen", help="emit the grid-tiling KB for a domino system")
    sp.add_argument("--system", metavar="FILE", help="JSON with tiles, horizontal, vertical")
    sp.add_argument("--tiles", help="comma-separated tiles; every pair compatible both ways")
    sp.add_argument("-o", "--output", metavar="FILE")
    return p


# ---------------------------------------------------------------- helpers


def _read(path: str) -> str:
    try:
        return Path(path).read_text(encoding="utf-8")
    except OSError as e:
        raise UsageError(f"cannot read {path}: {e.strerror}") from None


def _load_doc(args) -> KbDocument:
    if args.kb is None:
        return KbDocument(source="<empty>")
    return parse_kb(_read(args.kb), source=args.kb)


def _known_names(doc: KbDocument) -> set[str]:
    names = set(doc.defined)
    for a, b in doc.gcis:
        names |= atoms_in(a) | atoms_in(b)
    for _, c in doc.definitions:
        names |= atoms_in(c)
    for q in doc.queries:
        for c in q.args:
            names |= atoms_in(c)
    return names


def _concept(doc: KbDocument, text: str, kb_given: bool):
    text = text.strip()
    if kb_given and not text.startswith("(") and text not in ("top", "bottom") \
            and text not in _known_names(doc):
        raise UsageError(f"unknown concept name {text!r}")
    return doc.concept(text)


def _trace_path(spec: str | None) -> Path | None:
    if spec is None:
        return None
    kind, _, path = spec.partition(":")
    if kind != "dot" or not path:
        raise UsageError(f"--trace expects dot:FILE, got {spec!r}")
    return Path(path)


def _write_trace(path: Path | None, obj, out: list[str]):
    if path is None:
        return
    path.write_text(emit_dot(obj), encoding="utf-8")
    out.append(f"trace written to {path}")


def _blocks(tree) -> list[str]:
    if isinstance(tree, CompletionTree):
        return [f"x{x} blocked by x{s.by}" for x, s in sorted(tree.blocking().items()) if s.direct]
    return [f"x{x} blocked by x{b}" for x, b in sorted(tree.blocking().items())
            if b is not False and b is not True]


def _stats_lines(v) -> list[str]:
    s = v.stats
    return [f"steps: {s.steps}  nodes: {s.nodes_created}  backtracks: {s.backtracks}  "
            f"max depth: {s.max_depth}"]


def _oracle(doc, c, n, answer, out):
    """Compare with the brute-force search; a model the engine denies is fatal."""
    t = doc.terminology()
    m = find_model(c, t.rbox, t if t.gcis else None, max_domain=n)
    if m is None:
        out.append(f"oracle: no model with at most {n} elements")
        return
    out.append(f"oracle: model with {len(m.domain)} elements")
    if not answer:
        raise ShiqError("oracle found a model for a concept the engine reported UNSAT")


def _locate(doc: KbDocument, e: NonSimpleRoleInNumberRestriction) -> str:
    pos = doc.locate(e.concept) if e.concept is not None else None
    if pos is None:
        # the reported concept is in NNF; fall back to any restriction on that role
        for c, p in doc.positions.items():
            if isinstance(c, NumberRestriction) and c.role.name == e.role.name:
                pos = p
                break
    return f"{doc.source}:{pos[0]}:{pos[1]}: " if pos else ""


# ---------------------------------------------------------------- commands


def _decide(doc, c, args, tracer, engine):
    t = doc.terminology()
    if engine == "si":
        return is_satisfiable(t, c, engine="si", seed=args.seed, tracer=tracer)
    return is_satisfiable(t, c, seed=args.seed, tracer=tracer)


def cmd_sat(args, out) -> int:
    doc = _load_doc(args)
    trace = _trace_path(args.trace)
    if args.concept is not None:
        targets = [(args.concept, _concept(doc, args.concept, args.kb is not None))]
    else:
        targets = [(str(q.args[0]), doc.expand(q.args[0])) for q in doc.queries if q.kind == "sat"]
        if not targets:
            raise UsageError("no --concept given and the KB has no (sat ...) queries")
    status = SAT_OK
    for name, c in targets:
        tracer = Tracer()
        v = _decide(doc, c, args, tracer, args.engine)
        word = "SAT" if v.sat else "UNSAT"
        out.append(word if len(targets) == 1 else f"{name}: {word}")
        if not v.sat:
            status = NEGATIVE
        if args.verbose:
            out += _stats_lines(v)
        if v.sat and v.witness is not None:
            out += _blocks(v.witness)
        if args.oracle_max_domain:
            _oracle(doc, c, args.oracle_max_domain, v.sat, out)
        _write_trace(trace, v.witness if v.witness is not None else tracer, out)
        if args.save_witness:
            if v.witness is None or not isinstance(v.witness, CompletionTree):
                raise UsageError("--save-witness needs a SAT answer from the shiq engine")
            p = internalise_sat(doc.terminology(), c)
            Path(args.save_witness).write_text(dump_witness(v.witness, p.goal, p.rbox_u), encoding="utf-8")
            out.append(f"witness written to {args.save_witness}")
    return status


def cmd_si_sat(args, out) -> int:
    doc = _load_doc(args)
    if doc.gcis:
        raise NotSiConcept("si-sat takes no GCIs")
    rbox = doc.rbox()
    if not rbox.is_flat:
        raise NotSiConcept("si-sat does not accept a role hierarchy")
    if args.concept is None:
        raise UsageError("si-sat needs --concept")
    c = _concept(doc, args.concept, args.kb is not None)
    tracer = Tracer()
    run = si_decide_sat_trace if args.reset else si_decide_sat
    v = run(c, rbox.transitive_roles, seed=args.seed, tracer=tracer)
    out.append("SAT" if v.sat else "UNSAT")
    if args.verbose:
        out += _stats_lines(v)
        if args.reset:
            out.append(f"resets: {v.stats.resets}  seals: {v.stats.seals}  "
                       f"max live nodes: {v.stats.max_live_nodes}")
    if v.sat and v.witness is not None:
        out += _blocks(v.witness)
    if args.oracle_max_domain:
        _oracle(doc, c, args.oracle_max_domain, v.sat, out)
    _write_trace(_trace_path(args.trace), v.witness if v.witness is not None else tracer, out)
    return SAT_OK if v.sat else NEGATIVE


def cmd_subsumes(args, out) -> int:
    doc = _load_doc(args)
    kb = args.kb is not None
    c, d = _concept(doc, args.sub, kb), _concept(doc, args.sup, kb)
    tracer = Tracer()
    v = _decide(doc, And(c, Not(d)), args, tracer, args.engine)
    holds = not v.sat
    out.append("YES" if holds else "NO")
    if args.verbose:
        out += _stats_lines(v)
    if args.oracle_max_domain:
        _oracle(doc, And(c, Not(d)), args.oracle_max_domain, v.sat, out)
    _write_trace(_trace_path(args.trace), v.witness if v.witness is not None else tracer, out)
    return SAT_OK if holds else NEGATIVE


def cmd_classify(args, out) -> int:
    doc = _load_doc(args)
    t = doc.terminology()
    # defined names plus the atomic names the axioms and definitions mention
    atoms = sorted(_known_names(doc) - set(doc.defined))
    names = {n: doc.expand(Atom(n)) for n in doc.defined}
    names.update((n, Atom(n)) for n in atoms)
    if not names:
        raise UsageError("nothing to classify: the KB mentions no concept names")
    try:
        h = classify(t, names, exhaustive=args.exhaustive, engine=args.engine, seed=args.seed)
    except NonSimpleRoleInNumberRestriction as e:
        name = (e.where or "").removeprefix("definition of ")
        pos = doc.positions.get(doc.defined.get(name)) if name in doc.defined else None
        if pos is None:
            raise
        raise UsageError(f"{doc.source}:{pos[0]}:{pos[1]}: {e}") from None
    out.append(h.to_text().rstrip("\n"))
    if args.verbose:
        out.append(f"tests: {h.tests}")
    return SAT_OK


def cmd_validate(args, out) -> int:
    try:
        w = load_witness(_read(args.witness))
    except (ValueError, KeyError, TypeError) as e:
        raise UsageError(f"{args.witness}: {e}") from None
    rep = validate_completion_tree(w.tree, w.concept, w.rbox)
    if not rep.ok:
        out.append("INVALID")
        out += [f"  {v}" for v in rep.violations]
        return NEGATIVE
    base = block_distance(w.tree)
    for k in range(1, args.budgets + 1):
        t = unravel_witness(w.tree, w.concept, w.rbox, k * base, check=False)
        r = validate_tableau(t, w.concept, w.rbox)
        if args.verbose:
            out.append(f"unravel budget {k * base}: {len(t.individuals)} paths, {r}")
        if not r.ok:
            out.append("INVALID")
            out += [f"  budget {k * base}: {v}" for v in r.violations]
            return NEGATIVE
    out.append("VALID")
    return SAT_OK


def cmd_domino_gen(args, out) -> int:
    if (args.system is None) == (args.tiles is None):
        raise UsageError("domino-gen needs exactly one of --system or --tiles")
    try:
        if args.system is not None:
            system = DominoSystem.from_json(_read(args.system))
        else:
            tiles = tuple(t.strip() for t in args.tiles.split(",") if t.strip())
            pairs = frozenset((a, b) for a in tiles for b in tiles)
            system = DominoSystem(tiles, pairs, pairs)
    except ValueError as e:
        raise UsageError(f"bad domino system: {e}") from None
    text = domino_gen(system)
    if args.output:
        Path(args.output).write_text(text, encoding="utf-8")
        out.append(f"written to {args.output}")
    else:
        out.append(text.rstrip("\n"))
    return SAT_OK


COMMANDS = {
    "sat": cmd_sat,
    "si-sat": cmd_si_sat,
    "subsumes": cmd_subsumes,
    "classify": cmd_classify,
    "validate": cmd_validate,
    "domino-gen": cmd_domino_gen,
}


def _execute(argv, out: list[str], err: list[str]) -> int:
    try:
        args = build_parser().parse_args(argv)
    except UsageError as e:
        err.append(str(e))
        return USAGE
    try:
        return COMMANDS[args.command](args, out)
    except NonSimpleRoleInNumberRestriction as e:
        where = ""
        if getattr(args, "kb", None):
            try:
                where = _locate(parse_kb(_read(args.kb), source=args.kb), e)
            except ShiqError:
                pass
        if not where and getattr(args, "concept", None):
            where = "--concept: "
        err.append(f"error: {where}{e}")
    except (ParseError, KbError, NotSiConcept, UsageError, ShiqError) as e:
        err.append(f"error: {e}")
    return USAGE


def run_command(argv) -> tuple[int, str]:
    """Run one command; returns (exit status, stdout and stderr text)."""
    out, err = [], []
    buf = io.StringIO()
    with contextlib.redirect_stdout(buf), contextlib.redirect_stderr(buf):
        try:
            status = _execute(list(argv), out, err)
        except SystemExit as e:   # --help
            status = e.code if isinstance(e.code, int) else USAGE
    text = "\n".join(out + err)
    if buf.getvalue():
        text = buf.getvalue() + text
    return status, text + ("\n" if text else "")


def main(argv=None) -> int:
    out, err = [], []
    status = _execute(sys.argv[1:] if argv is None else list(argv), out, err)
    if out:
        print("\n".join(out))
    if err:
        print("\n".join(err), file=sys.stderr)
    return status


if __name__ == "__main__":
    sys.exit(main())
