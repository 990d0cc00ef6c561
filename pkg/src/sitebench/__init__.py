"""Transferability scoring of stored feature matrices plus benchmark diagnostics.

Subpackages and modules:

- ``feature_store``: SITB feature files, manifests, accuracy/score tables.
- ``metrics``: the six transferability scores behind one interface.
- ``rank_stats``: Kendall's tau, hyperbolically weighted tau, Pearson.
- ``diagnostics``: static baseline, ablation sweeps, fidelity, audits.
- ``report``: summary aggregation and CSV/JSON emission.
- ``cli``: the ``sitebench`` command.
"""

from . import diagnostics, feature_store, metrics, rank_stats, report
from .errors import (
    FormatError,
    ManifestError,
    MissingEntryError,
    SiteBenchError,
    UndefinedCorrelationError,
    UndefinedStatisticError,
    ValidationError,
)

__version__ = "0.1.0"

__all__ = [
    "diagnostics",
    "feature_store",
    "metrics",
    "rank_stats",
    "report",
    "FormatError",
    "ManifestError",
    "MissingEntryError",
    "SiteBenchError",
    "UndefinedCorrelationError",
    "UndefinedStatisticError",
    "ValidationError",
    "__version__",
]
