"""
Exception types raised by rfcheck.

All subclass ValueError, so callers that only care about bad input can
catch ValueError. The command line maps them to exit status 2.
"""


class ConfigurationError(ValueError):
    """Invalid parameters, such as mtry outside 1..p or t_n > a_n."""


class DomainError(ValueError):
    """Inputs outside the domain of a mathematical operation."""


class ParseError(ValueError):
    """
    Malformed file content. `line` is the 1-based line number where parsing
    failed, when known.
    """

    def __init__(self, message: str, line: int = None):
        if line is not None:
            message = f"line {line}: {message}"
        super().__init__(message)
        self.line = line


class ValidationError(ValueError):
    """Parsed values that break a data invariant."""


class DegenerateModelError(ValueError):
    """The theoretical criterion of a model is identically zero."""
