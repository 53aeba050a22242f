"""Exception types shared across the package."""


class InvalidParameterError(ValueError):
    """An argument lies outside the domain of the operation."""


class CapabilityError(RuntimeError):
    """The requested brute-force computation is too large to run."""


class ClosureViolationError(ValueError):
    """An element list is not closed under the binary operation."""

    def __init__(self, left_label: str, right_label: str):
        self.left_label = left_label
        self.right_label = right_label
        super().__init__(
            f"sum of {left_label!r} and {right_label!r} is not in the element list"
        )


class TableParseError(ValueError):
    """A table file could not be parsed; the message carries a location hint."""


class TableValidationError(ValueError):
    """A parsed table fails structural validation (shape, range, associativity)."""


class WitnessVerificationError(RuntimeError):
    """A constructed witness failed re-verification against the Cayley table.

    Raising this signals an implementation bug, not bad user input.
    """
