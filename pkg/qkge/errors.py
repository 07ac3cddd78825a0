"""Exception hierarchy shared by the library and the command line."""


class QKGEError(Exception):
    """Base class for all expected failures."""

    exit_code = 1


class UsageError(QKGEError, ValueError):
    """A call or flag violated an operation's preconditions."""


class ConfigurationError(QKGEError, ValueError):
    """Invalid configuration value or dataset too small for it."""


class DataError(QKGEError):
    """Dataset files could not be read."""

    exit_code = 2


class ParseError(DataError):
    """Malformed line in a triple file."""

    def __init__(self, path, line_number: int, message: str):
        self.path = path
        self.line_number = line_number
        super().__init__(f"{path}:{line_number}: {message}")


class VocabularyError(DataError, KeyError):
    """Unknown entity or relation string."""

    def __init__(self, kind: str, name: str, suggestions: list[str] | None = None):
        self.kind = kind
        self.name = name
        self.suggestions = suggestions or []
        message = f"Unknown {kind} '{name}'"
        if self.suggestions:
            message += f" (did you mean: {', '.join(self.suggestions)}?)"
        super().__init__(message)

    def __str__(self) -> str:
        # KeyError would repr() the message
        return self.args[0]


class IntegrityError(QKGEError):
    """Corrupted checkpoint or checkpoint/data mismatch."""

    exit_code = 2


class NumericalError(QKGEError, ArithmeticError):
    """Non-finite gradient, parameter, moment or loss."""

    exit_code = 3
