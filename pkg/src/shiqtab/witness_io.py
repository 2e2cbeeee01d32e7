"""JSON serialisation of SHIQ completion trees, so witnesses can be audited later."""

from __future__ import annotations

import json
from dataclasses import dataclass

from .completion import CompletionTree, Node
from .kbfile import parse_concept, parse_role
from .syntax import Concept, RoleBox, close_hierarchy

FORMAT = "shiq-witness/1"


@dataclass
class StoredWitness:
    concept: Concept
    rbox: RoleBox
    tree: CompletionTree


def dump_witness(tree: CompletionTree, concept: Concept, rbox: RoleBox) -> str:
    nodes = []
    for x in tree.order():
        n = tree.nodes[x]
        nodes.append({
            "id": x,
            "parent": n.parent,
            "edge": sorted(str(r) for r in n.edge),
            "label": sorted(str(c) for c in n.label),
        })
    data = {
        "format": FORMAT,
        "concept": str(concept),
        "transitive": sorted(rbox.transitive_roles),
        "inclusions": sorted([str(r), str(s)] for r, s in rbox.inclusions),
        "nodes": nodes,
        "distinct": sorted([a, b] for a, b in tree.distinct),
    }
    return json.dumps(data, indent=2, ensure_ascii=False) + "\n"


def load_witness(text: str) -> StoredWitness:
    """Inverse of :func:`dump_witness`; raises ValueError on malformed input."""
    try:
        data = json.loads(text)
    except json.JSONDecodeError as e:
        raise ValueError(f"witness is not valid JSON: {e}") from None
    if not isinstance(data, dict) or data.get("format") != FORMAT:
        raise ValueError(f"expected a {FORMAT} document")
    concept = parse_concept(data["concept"], allow_reserved=True)
    rbox = close_hierarchy(data.get("transitive", ()),
                           [(parse_role(a, True), parse_role(b, True)) for a, b in data.get("inclusions", ())])
    tree = CompletionTree()
    tree.nodes.clear()
    entries = sorted(data["nodes"], key=lambda e: e["id"])
    ids = {e["id"] for e in entries}
    if 0 not in ids:
        raise ValueError("witness has no root node 0")
    for e in entries:
        parent = e.get("parent")
        if parent is not None and parent not in ids:
            raise ValueError(f"node {e['id']} has unknown parent {parent}")
        node = Node(e["id"], parent, 0, {parse_concept(c, allow_reserved=True) for c in e["label"]},
                    {parse_role(r, True) for r in e["edge"]})
        tree.nodes[e["id"]] = node
    if tree.nodes[0].parent is not None:
        raise ValueError("root node 0 must not have a parent")
    for x in sorted(tree.nodes):
        p = tree.nodes[x].parent
        if p is not None:
            tree.nodes[p].children.append(x)
    # depths from the root, tolerating any id order
    todo, seen = [0], {0}
    while todo:
        x = todo.pop()
        for c in tree.nodes[x].children:
            if c in seen:
                continue
            seen.add(c)
            tree.nodes[c].depth = tree.nodes[x].depth + 1
            todo.append(c)
    tree.next_id = max(ids) + 1
    tree.distinct = {(min(a, b), max(a, b)) for a, b in data.get("distinct", ())}
    tree.version += 1
    rbox = rbox.with_roles(r for n in tree.nodes.values() for r in n.edge)
    return StoredWitness(concept, rbox, tree)
