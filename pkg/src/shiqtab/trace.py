"""Optional event stream emitted by the engines.

Each event is ``(step, kind, nodes, concept, detail)``.  Kinds used:

``rule``      a rule fired; ``detail`` names it
``node``      a node was created; ``detail`` is ``{"parent", "roles", "label"}``
``block``     a block was established; nodes = (blocked, blocker or None)
``unblock``   a block was broken
``clash``     a clash was detected at a node
``backtrack`` the search returned to a choice point
``reset``     SI trace mode deleted a node's successors; nodes = (y, *deleted)
``seal``      SI trace mode dropped a verified subtree below a node
"""

from __future__ import annotations

from dataclasses import dataclass, field
from typing import Any


@dataclass(frozen=True)
class TraceEvent:
    step: int
    kind: str
    nodes: tuple[int, ...] = ()
    concept: Any = None
    detail: Any = None


@dataclass
class Tracer:
    events: list[TraceEvent] = field(default_factory=list)
    _step: int = 0

    def emit(self, kind: str, nodes=(), concept=None, detail=None) -> None:
        self._step += 1
        self.events.append(TraceEvent(self._step, kind, tuple(nodes), concept, detail))

    def of_kind(self, kind: str) -> list[TraceEvent]:
        return [e for e in self.events if e.kind == kind]
