"""Exception types shared across the package."""


class FormatError(ValueError):
    """Malformed input file. Carries the 1-based line number when known."""

    def __init__(self, message, line=None):
        if line is not None:
            message = f"line {line}: {message}"
        super().__init__(message)
        self.line = line


class ParameterError(ValueError):
    """Invalid method or harness parameter."""


class LeakageError(AssertionError):
    """A test index leaked into a training-side structure."""
