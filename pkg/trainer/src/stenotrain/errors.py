"""Exception hierarchy of the trainer.

Every error raised by this package derives from :class:`TrainerError`;
callers who want one catch-all handler can use the base class, while the
command line maps the subclasses to distinct exit codes.
"""

from __future__ import annotations

__all__ = [
    "TrainerError",
    "ConfigError",
    "DatasetError",
    "TrainingError",
    "WeightFormatError",
    "WeightChecksumError",
]


class TrainerError(Exception):
    """Base class for all trainer errors."""


class ConfigError(TrainerError):
    """Invalid or inconsistent training configuration."""


class DatasetError(TrainerError):
    """Missing, malformed, or mutually inconsistent training pairs."""


class TrainingError(TrainerError):
    """The optimization itself failed (for example a non-finite loss)."""


class WeightFormatError(TrainerError):
    """A weight file violates the binary format."""


class WeightChecksumError(WeightFormatError):
    """A weight file is truncated or fails its payload checksum."""
