"""Exception hierarchy. Each class carries the CLI exit code it maps to."""

from __future__ import annotations


class VbgError(Exception):
    """Base class for all toolkit errors."""

    exit_code: int = 3

    def __init__(self, detail: str):
        super().__init__(detail)
        self.detail = detail


class InvalidInputError(VbgError, ValueError):
    """Bad parameters, shape mismatches, degenerate datasets."""

    exit_code = 2


class FrameFormatError(VbgError):
    """Image file cannot be decoded as an 8-bit RGB PNG or JPEG."""

    exit_code = 2


class MissingArtifactError(VbgError, FileNotFoundError):
    """A model, manifest or feature file the operation needs is absent."""

    exit_code = 3


class StaleActivationError(VbgError, RuntimeError):
    """Backward pass requested without a matching train-mode forward."""

    exit_code = 3
