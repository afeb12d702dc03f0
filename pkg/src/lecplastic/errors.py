"""Exception types shared across the package."""


class LecError(Exception):
    """Base class for all package errors."""


class ProfileFormatError(LecError):
    """A profile file could not be parsed (bad JSON, schema or rational syntax)."""


class ProfileValidationError(LecError):
    """A parsed profile violates one of the semi-axis profile invariants."""

    def __init__(self, code, message, components=()):
        super().__init__(f"{code}: {message}")
        self.code = code
        self.components = tuple(components)


class IndexBeyondSupport(LecError, IndexError):
    pass


class NoConvergence(LecError):
    pass


class CheckFailed(LecError):
    """A verification clause failed; ``clause`` names which one."""

    def __init__(self, clause, message):
        super().__init__(f"{clause}: {message}")
        self.clause = clause


class InternalError(LecError):
    pass
