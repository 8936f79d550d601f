"""Exception types shared across the package.

The CLI maps InputError (and subclasses) to exit code 2 and
QuotientCeilingError to exit code 3.
"""


class InputError(ValueError):
    """Malformed or out-of-contract input: bad literals, off-variety points,
    arity mismatches, unreadable spec files."""


class SpecValidationError(InputError):
    """A group spec file parsed but failed validation (singular curve,
    generators off the variety, failed independence audit)."""


class PreconditionError(RuntimeError):
    """An operation was called on data that has not met its precondition,
    e.g. divisibility queries on a point whose decomposition is Undecided."""


class QuotientCeilingError(RuntimeError):
    """A quotient or residue enumeration would exceed the configured ceiling."""

    def __init__(self, attempted: int, ceiling: int):
        self.attempted = attempted
        self.ceiling = ceiling
        super().__init__(
            f"residue enumeration of size {attempted} exceeds ceiling {ceiling}"
        )
