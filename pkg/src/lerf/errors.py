"""Exception taxonomy shared across the package.

The CLI maps these onto exit codes: DecodeError -> 3 (I/O),
FormatError -> 4, everything else that reaches the top level -> 2.
"""


class LerfError(Exception):
    """Base class for all errors raised by this package."""


class DecodeError(LerfError):
    """A file could not be read or decoded (missing, wrong codec, wrong depth)."""


class FormatError(LerfError):
    """A binary or text payload violates its documented format."""


class ShapeError(LerfError):
    """Array/image dimensions do not match the operation's contract."""


class ParameterError(LerfError):
    """A numeric argument is outside its documented domain."""


class ConfigError(LerfError):
    """Inconsistent job configuration (missing bank, family mismatch, ...)."""


class EvaluationError(LerfError):
    """A metric cannot be evaluated on the given inputs (empty mask, tiny image)."""
