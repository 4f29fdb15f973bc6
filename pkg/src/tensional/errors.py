"""Exception hierarchy shared by every module."""


class TensionalError(Exception):
    """Base class for all errors raised by the package."""


# -- expression front end -------------------------------------------------

class ParseError(TensionalError):
    """An expression could not be parsed.

    Attributes
    ----------
    offset : int
        1-based byte offset into the UTF-8 source.
    expected : tuple of str
        Token kinds that would have been accepted at ``offset``.
    """

    def __init__(self, message, offset, expected=()):
        self.offset = offset
        self.expected = tuple(expected)
        detail = f"{message} at offset {offset}"
        if self.expected:
            detail += f" (expected one of: {', '.join(self.expected)})"
        super().__init__(detail)


class ExprSyntaxError(ParseError):
    pass


class UnknownVariable(ParseError):
    pass


class UnknownFunction(ParseError):
    pass


class ExpansionTooLarge(TensionalError):
    pass


# -- numerics ---------------------------------------------------------------

class NumericalError(TensionalError):
    """Base class for failures during evaluation (CLI exit code 3)."""


class DomainError(NumericalError):
    pass


class OrderTooLarge(NumericalError):
    pass


class IndexTooDeep(NumericalError):
    pass


class NotPositiveDefinite(NumericalError):
    def __init__(self, message, eigenvalue=None):
        self.eigenvalue = eigenvalue
        super().__init__(message)


class ImageOutOfChart(NumericalError):
    pass


class ModeUnsupported(NumericalError):
    pass


class RankDeficient(NumericalError):
    pass


class NotNormal(NumericalError):
    pass


class NotHypersurface(NumericalError):
    pass


class NotArclength(NumericalError):
    pass


class DegenerateFrame(NumericalError):
    pass


# -- casebook / configuration ----------------------------------------------

class UnknownCase(TensionalError):
    pass


class ConfigError(TensionalError):
    """Base class for configuration problems (CLI exit code 2)."""


class ConfigParseError(ConfigError):
    pass


class ValidationError(ConfigError):
    """Collects every problem found in a configuration.

    Each entry of ``problems`` is a ``(path, message)`` pair where ``path``
    is a slash-separated pointer such as ``manifolds/H/metric``.
    """

    def __init__(self, problems):
        self.problems = list(problems)
        lines = [f"{path}: {msg}" for path, msg in self.problems]
        super().__init__("invalid configuration:\n  " + "\n  ".join(lines))
