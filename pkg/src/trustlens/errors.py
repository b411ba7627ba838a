"""Exception types shared across modules."""


class TrustlensError(Exception):
    """Base class for library errors."""


class ParseError(TrustlensError):
    """A source file or record could not be parsed.

    Carries the (1-based) line number and source path when known so CLI
    error output can point at the offending record.
    """

    def __init__(self, message: str, *, line: int = None, path: str = None):
        self.line = line
        self.path = path
        where = ""
        if path is not None:
            where = f"{path}"
            if line is not None:
                where += f":{line}"
        elif line is not None:
            where = f"line {line}"
        super().__init__(f"{where}: {message}" if where else message)


class ConvergenceError(TrustlensError):
    """An iterative solver stopped short of its optimality tolerance."""

    def __init__(self, message: str, *, duality_gap: float = None):
        self.duality_gap = duality_gap
        super().__init__(message)


class OracleError(TrustlensError):
    """A label oracle could not answer a query (unknown user, offline service)."""
