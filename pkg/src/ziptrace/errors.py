"""Exception types shared across the package."""


class ZipTraceError(Exception):
    """Base class for all errors raised by ziptrace."""


class TraceParseError(ZipTraceError):
    """Malformed line in a trace or grammar file."""

    def __init__(self, message: str, line: int | None = None):
        self.line = line
        if line is not None:
            message = f"line {line}: {message}"
        super().__init__(message)


class GrammarError(ZipTraceError):
    """A grammar violates one of the straight-line-program invariants."""


class OracleCapExceeded(ZipTraceError):
    """A brute-force oracle was asked to handle a trace above its size cap."""


class UsageError(ZipTraceError):
    """An operation was called with arguments outside its contract."""
