"""Exception types shared across the package."""


class ExtractError(Exception):
    """Base class for all errors raised by extractkit."""


class ContractError(ExtractError, ValueError):
    """An argument violates the documented precondition of an operation."""


class ResourceLimitError(ExtractError):
    """A configured budget (states, rows, universe size) was exhausted.

    Raised instead of running unbounded work; callers that report verdicts
    should translate it into an "unknown" outcome.
    """

    def __init__(self, message: str, *, used: int | None = None, limit: int | None = None):
        super().__init__(message)
        self.used = used
        self.limit = limit

    def __reduce__(self):
        # keyword-only fields survive pickling (worker processes)
        return _rebuild_resource_error, (self.args[0], self.used, self.limit)


class ParseError(ExtractError, ValueError):
    """Malformed textual input. Carries a 1-based line and column when known."""

    def __init__(self, message: str, line: int | None = None, column: int | None = None):
        self.line = line
        self.column = column
        where = ""
        if line is not None:
            where = f"line {line}"
            if column is not None:
                where += f", column {column}"
            where += ": "
        super().__init__(where + message)
        self.message = message

    def __reduce__(self):
        return ParseError, (self.message, self.line, self.column)


def _rebuild_resource_error(message, used, limit):
    return ResourceLimitError(message, used=used, limit=limit)
