"""Exceptions raised by SurfaceScope."""


class MeshFormatError(ValueError):
    """A document or mesh references something that does not exist."""


class MeshValidationError(ValueError):
    """A mesh breaks one of the surface invariants."""

    def __init__(self, reason, element=None):
        super().__init__(f"{reason}: {element}" if element is not None else reason)
        self.reason = reason
        self.element = element


class MoveError(ValueError):
    """A move was asked for outside its preconditions."""


class BudgetExceededError(ValueError):
    """An exhaustive method was asked to go beyond its bound."""


class ConsistencyError(ValueError):
    """An identity that must always hold was violated."""


class SpecError(ValueError):
    """A tree spec breaks one of its constraints."""
