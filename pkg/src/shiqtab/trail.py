"""Undo log for reversible mutations, shared by both engines' trees."""

from __future__ import annotations

from typing import Callable


class Trail:
    """Chronological log of undo closures.

    A structure that wants backtracking calls :meth:`push` with a closure that
    reverts each mutation it performs; :meth:`undo_to` pops closures back to a
    previously taken :meth:`mark`.
    """

    __slots__ = ("_log",)

    def __init__(self):
        self._log: list[Callable[[], None]] = []

    def push(self, undo: Callable[[], None]) -> None:
        self._log.append(undo)

    def mark(self) -> int:
        return len(self._log)

    def undo_to(self, mark: int) -> int:
        log = self._log
        n = 0
        while len(log) > mark:
            log.pop()()
            n += 1
        return n

    def __len__(self):
        return len(self._log)
