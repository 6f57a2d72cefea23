"""Exception taxonomy shared across the package.

Errors are grouped so the command-line layer can map them onto distinct
exit codes: configuration and parameter problems, file-format and I/O
problems, and numeric/model failures inside a solve.
"""


class StenoflowError(Exception):
    """Base class for all package errors."""


class ParameterError(StenoflowError, ValueError):
    """A scalar argument violates its documented bound."""


class ExtentError(ParameterError):
    """A coordinate or window lies outside the geometry extent."""


class InvariantError(StenoflowError, ValueError):
    """A structural invariant of a container type is violated."""


class ConfigError(StenoflowError, ValueError):
    """A run configuration file or override is malformed."""


class ModelError(StenoflowError, ValueError):
    """A network description is inconsistent (shape chain, topology)."""


class NumericError(StenoflowError, ArithmeticError):
    """A solve produced non-finite values or failed a residual check."""


class WeightFormatError(StenoflowError, ValueError):
    """Base class for weight-file decoding failures."""


class WeightMagicError(WeightFormatError):
    """The file does not start with the expected magic bytes."""


class WeightVersionError(WeightFormatError):
    """The file declares an unsupported format version."""


class WeightChecksumError(WeightFormatError):
    """The payload is truncated or fails its checksum."""


class WeightShapeError(WeightFormatError):
    """The declared layer chain is dimensionally inconsistent."""
