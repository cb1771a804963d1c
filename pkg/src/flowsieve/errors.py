"""Exception hierarchy shared across the package.

The CLI maps these onto exit codes: UsageError -> 1, DataError -> 2,
anything else (including InternalError) -> 3.
"""


class FlowSieveError(Exception):
    """Base class for all package-specific errors."""


class UsageError(FlowSieveError):
    """Invalid command-line usage or run configuration."""


class DataError(FlowSieveError):
    """Input data violates a documented precondition or schema."""


class InternalError(FlowSieveError):
    """An internal invariant was violated; indicates a bug."""
