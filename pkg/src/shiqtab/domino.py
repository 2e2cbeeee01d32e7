"""Grid-tiling knowledge bases that need counting over transitive roles.

The generated axioms lay out an N×N grid with alternating horizontal roles
X1/X2 and vertical roles Y1/Y2, and close each 2×2 square with an
``(at-most 3 Sij)`` restriction on a transitive super-role.  Because those
super-roles are transitive, the restrictions are outside the decidable
fragment; the engines refuse such input instead of deciding it.
"""

from __future__ import annotations

import json
import re
from dataclasses import dataclass

from .kbfile import parse_kb

_IDENT = re.compile(r"[A-Za-z][A-Za-z0-9_\-]*\Z")

# point types, their successors (X-role, target, Y-role, target) and closing super-role
_GRID = {
    "A": ("X1", "B", "Y1", "C", "S11"),
    "B": ("X2", "A", "Y1", "D", "S21"),
    "C": ("X1", "D", "Y2", "A", "S12"),
    "D": ("X2", "C", "Y2", "B", "S22"),
}
_SUPER = {"X1": ("S11", "S12"), "X2": ("S21", "S22"), "Y1": ("S11", "S21"), "Y2": ("S12", "S22")}


@dataclass(frozen=True)
class DominoSystem:
    tiles: tuple[str, ...]
    horizontal: frozenset[tuple[str, str]]
    vertical: frozenset[tuple[str, str]]

    def __post_init__(self):
        if not self.tiles:
            raise ValueError("a domino system needs at least one tile type")
        for t in self.tiles:
            if not _IDENT.match(t):
                raise ValueError(f"tile name {t!r} is not an identifier")
        if len(set(self.tiles)) != len(self.tiles):
            raise ValueError("duplicate tile names")
        known = set(self.tiles)
        for rel in (self.horizontal, self.vertical):
            for a, b in rel:
                if a not in known or b not in known:
                    raise ValueError(f"pair ({a}, {b}) mentions an unknown tile")

    @classmethod
    def from_json(cls, text: str) -> "DominoSystem":
        data = json.loads(text)
        return cls(tuple(data.get("tiles", ())),
                   frozenset(map(tuple, data.get("horizontal", ()))),
                   frozenset(map(tuple, data.get("vertical", ()))))

    def to_json(self) -> str:
        return json.dumps({"tiles": list(self.tiles),
                           "horizontal": sorted(map(list, self.horizontal)),
                           "vertical": sorted(map(list, self.vertical))}, indent=2)


def tile_concept(name: str) -> str:
    return f"Tile_{name}"


def _nary(op: str, parts: list[str]) -> str:
    if len(parts) == 1:
        return parts[0]
    return f"({op} {' '.join(parts)})" if parts else ("top" if op == "and" else "bottom")


def domino_gen(system: DominoSystem) -> str:
    """KB text encoding ``system``; parseable, but rejected by the engines."""
    lines = ["; grid of alternating X1/X2 (horizontal) and Y1/Y2 (vertical) roles",
             "; Sij are transitive super-roles closing each square"]
    for s in ("S11", "S12", "S21", "S22"):
        lines.append(f"(transitive {s})")
    for r, sups in _SUPER.items():
        for s in sups:
            lines.append(f"(implies-role {r} {s})")
    lines.append("; grid axioms")
    for p, (x, xt, y, yt, s) in _GRID.items():
        others = [f"(not {q})" for q in _GRID if q != p]
        rhs = _nary("and", others + [f"(some {x} {xt})", f"(some {y} {yt})", f"(at-most 3 {s})"])
        lines.append(f"(implies {p} {rhs})")
    lines.append("; each tile type forces compatible neighbours")
    tiles = system.tiles
    for d in tiles:
        parts = [f"(not {tile_concept(e)})" for e in tiles if e != d]
        right = _nary("or", [tile_concept(e) for e in tiles if (d, e) in system.horizontal])
        up = _nary("or", [tile_concept(e) for e in tiles if (d, e) in system.vertical])
        parts += [f"(all X1 {right})", f"(all X2 {right})", f"(all Y1 {up})", f"(all Y2 {up})"]
        lines.append(f"(implies {tile_concept(d)} {_nary('and', parts)})")
    lines.append("; every grid point carries a tile")
    lines.append(f"(implies (or A B C D) {_nary('or', [tile_concept(d) for d in tiles])})")
    lines.append("(sat A)")
    return "\n".join(lines) + "\n"


def domino_doc(system: DominoSystem):
    return parse_kb(domino_gen(system), source="<domino>")

