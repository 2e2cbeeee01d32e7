"""Exception types shared across the package."""

from __future__ import annotations


class ShiqError(Exception):
    """Base class for all errors raised by this package."""


class NonSimpleRoleInNumberRestriction(ShiqError):
    """A number restriction uses a role that is transitive or has a transitive sub-role.

    Such restrictions take the logic outside the decidable fragment, so the
    engines refuse to run rather than attempting a decision.
    """

    def __init__(self, role, concept=None, where: str | None = None):
        self.role = role
        self.concept = concept
        self.where = where
        msg = f"number restriction on non-simple role {role}"
        if concept is not None:
            msg += f" in {concept}"
        if where:
            msg += f" ({where})"
        super().__init__(msg)


class NotSiConcept(ShiqError):
    """The SI engine was handed a concept or role box outside SI."""


class BudgetExceeded(ShiqError):
    """A bounded search hit its configured cap before finishing."""


class ParseError(ShiqError):
    def __init__(self, message: str, line: int, column: int,
                 expected: tuple[str, ...] = (), source: str = "<input>"):
        self.message = message
        self.line = line
        self.column = column
        self.expected = tuple(expected)
        self.source = source
        text = f"{source}:{line}:{column}: {message}"
        if self.expected:
            text += " (expected " + " or ".join(self.expected) + ")"
        super().__init__(text)


class KbError(ShiqError):
    """Semantic problem in a knowledge base: duplicates, unknown or cyclic names."""
