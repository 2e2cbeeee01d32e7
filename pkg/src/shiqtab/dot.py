"""Graphviz DOT output for completion trees, SI trees and trace event logs."""

from __future__ import annotations

from .completion import CompletionTree
from .si import SiTree, si_blocker
from .trace import Tracer


def _q(text: str) -> str:
    text = text.replace("\\", "\\\\").replace('"', '\\"').replace("\n", "\\n")
    return '"' + text + '"'


def _label_text(concepts) -> str:
    return "{" + ", ".join(sorted(c.show() for c in concepts)) + "}"


def _completion_dot(tree: CompletionTree, name: str) -> list[str]:
    status = tree.blocking()
    blockers = {s.by for s in status.values() if s.direct}
    out = []
    for x in tree.order():
        n = tree.nodes[x]
        text = f"x{x}\n" + _label_text(n.label)
        attrs = [f"label={_q(text)}"]
        st = status[x]
        if st.direct:
            attrs += ['style="filled"', 'fillcolor="lightgray"', f"xlabel={_q(f'blocked by x{st.by}')}",
                      'class="blocked"']
        elif st.indirect:
            attrs += ['style="dotted"', 'class="indirectly-blocked"']
        if x in blockers:
            attrs += ['peripheries=2', 'class="blocker"']
        out.append(f"  n{x} [{', '.join(attrs)}];")
    for x in tree.order():
        n = tree.nodes[x]
        if n.parent is None:
            continue
        roles = ", ".join(sorted(r.show() for r in n.edge)) or "∅"
        style = ', style="dashed"' if not n.edge else ""
        out.append(f"  n{n.parent} -> n{x} [label={_q(roles)}{style}];")
    for x in tree.order():
        st = status[x]
        if st.direct:
            out.append(f'  n{x} -> n{st.by} [style="dotted", constraint=false, label="blocks"];')
    for a, b in sorted(tree.distinct):
        out.append(f'  n{a} -> n{b} [style="dotted", dir=none, color="red", constraint=false, label="≠"];')
    return out


def _si_dot(tree: SiTree) -> list[str]:
    out = []
    for x in tree.order():
        n = tree.nodes[x]
        text = f"x{x}\nL: {_label_text(n.L)}\nB: {_label_text(n.B)}"
        attrs = [f"label={_q(text)}"]
        b = si_blocker(tree, x)
        if b is not None:
            attrs += ['style="filled"', 'fillcolor="lightgray"', f"xlabel={_q(f'blocked by x{b}')}",
                      'class="blocked"']
        if n.sealed:
            attrs.append('shape="box"')
        out.append(f"  n{x} [{', '.join(attrs)}];")
    for x in tree.order():
        n = tree.nodes[x]
        if n.parent is not None:
            out.append(f"  n{n.parent} -> n{x} [label={_q(n.role.show())}];")
    return out


def _trace_dot(tracer: Tracer) -> list[str]:
    """Every node ever created, with resets and seals as numbered notes."""
    out = []
    edges = []
    seen = set()
    gone: set[int] = set()
    notes = []
    for ev in tracer.events:
        if ev.kind == "node" and ev.nodes:
            x = ev.nodes[0]
            if x in seen:
                continue
            seen.add(x)
            info = ev.detail or {}
            label = "{" + ", ".join(info.get("label", [])) + "}"
            out.append(f"  n{x} [label={_q(f'x{x} ' + label)}];")
            if info.get("parent") is not None:
                roles = ", ".join(info.get("roles", []))
                edges.append(f"  n{info['parent']} -> n{x} [label={_q(roles)}];")
        elif ev.kind in ("reset", "seal"):
            notes.append(ev)
            gone.update(ev.nodes[1:])
        elif ev.kind == "block" and len(ev.nodes) == 2:
            edges.append(f'  n{ev.nodes[0]} -> n{ev.nodes[1]} [style="dotted", constraint=false, '
                         f'label={_q(f"blocks @{ev.step}")}];')
    for k, ev in enumerate(notes, 1):
        head = ev.nodes[0]
        deleted = ", ".join(f"x{x}" for x in ev.nodes[1:])
        out.append(f"  note{k} [shape=note, label={_q(f'{ev.kind} #{k} (step {ev.step}): {deleted}')}];")
        out.append(f'  note{k} -> n{head} [style="dashed", arrowhead=none];')
    for x in sorted(gone & seen):
        out.append(f'  n{x} [color="gray", fontcolor="gray"];')
    return out + edges


def emit_dot(obj, name: str = "completion") -> str:
    """Deterministic DOT text for a CompletionTree, SiTree, or Tracer."""
    if isinstance(obj, CompletionTree):
        body = _completion_dot(obj, name)
    elif isinstance(obj, SiTree):
        body = _si_dot(obj)
    elif isinstance(obj, Tracer):
        body = _trace_dot(obj)
    else:
        raise TypeError(f"cannot render {type(obj).__name__}")
    return "\n".join([f"digraph {name} {{", "  node [shape=ellipse, fontsize=10];", *body, "}"]) + "\n"
