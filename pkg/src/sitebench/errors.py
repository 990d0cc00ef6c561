"""Exception hierarchy shared across the package."""

from __future__ import annotations


class SiteBenchError(Exception):
    """Base class for every error raised by this package."""


class ValidationError(SiteBenchError):
    """An input violates a documented invariant.

    ``field`` names the offending field when one can be identified.
    """

    def __init__(self, message: str, *, field: str | None = None) -> None:
        super().__init__(message)
        self.field = field


class FormatError(SiteBenchError):
    """A feature file does not conform to the SITB binary format.

    ``code`` is a stable machine-readable identifier ("bad magic",
    "corrupt length", ...); the message may add detail.
    """

    def __init__(self, message: str, *, code: str) -> None:
        super().__init__(message)
        self.code = code


class ManifestError(SiteBenchError):
    """A benchmark manifest is malformed or fails cross-reference checks."""

    def __init__(self, message: str, *, code: str) -> None:
        super().__init__(message)
        self.code = code


class MissingEntryError(SiteBenchError):
    """A (model, dataset) pair required by a diagnostic is absent from a table."""

    def __init__(self, message: str, *, model_id: str, dataset_id: str) -> None:
        super().__init__(message)
        self.model_id = model_id
        self.dataset_id = dataset_id


class UndefinedCorrelationError(SiteBenchError):
    """Correlation is undefined (a sequence with zero variance)."""


class UndefinedStatisticError(SiteBenchError):
    """A dispersion statistic is undefined for the given inputs."""
