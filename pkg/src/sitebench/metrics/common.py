"""Shared plumbing for the scoring metrics: configs, score records, input checks."""

from __future__ import annotations

from dataclasses import dataclass, field
from typing import Any, Callable, Mapping

import numpy as np

from ..errors import ValidationError
from ..feature_store import METRIC_IDS, FeatureMatrix, LabelVector

Number = float | int


def _positive(x: Number) -> bool:
    return x > 0


def _non_negative(x: Number) -> bool:
    return x >= 0


def _count(x: Number) -> bool:
    return isinstance(x, int) and x >= 1


def _optional_count(x: Any) -> bool:
    return x is None or _count(x)


def _unit_fraction(x: Number) -> bool:
    return 0 < x <= 1


def _boolean(x: Any) -> bool:
    return isinstance(x, bool)


# metric_id -> option name -> (default, validator, doc)
OPTION_SPECS: dict[str, dict[str, tuple[Any, Callable[[Any], bool], str]]] = {
    "hscore": {
        "pinv_rel_cutoff": (1e-10, _positive, "relative eigenvalue cutoff for the pseudo-inverse"),
    },
    "logme": {
        "max_iter": (100, _count, "fixed-point iteration cap per class"),
        "tol": (1e-3, _positive, "stop when the evidence changes by less than this"),
    },
    "nleep": {
        "variance_retained": (0.80, _unit_fraction, "PCA keeps this fraction of total variance"),
        "n_components": (None, _optional_count, "mixture size; None = min(5C, n//10)"),
        "em_max_iter": (100, _count, "EM iteration cap"),
        "em_tol": (1e-4, _positive, "stop when mean log-likelihood changes by less than this"),
        "variance_floor": (1e-6, _positive, "lower bound on per-dimension variances"),
    },
    "transrate": {
        "eps": (1.0, _positive, "distortion scale in the coding-rate terms"),
    },
    "gbc": {
        "variance_floor": (1e-6, _positive, "lower bound on per-dimension variances"),
        "pca_dim": (None, _optional_count, "project to this many components first; None = no PCA"),
    },
    "sfda": {
        "shrinkage": (1.0, _non_negative, "within-scatter ridge, scaled by tr(S_w)/d"),
        "noise_refit": (False, _boolean, "enable the Gaussian feature-noise re-fit stage"),
        "noise_scale": (0.1, _positive, "noise std as a fraction of per-dimension feature std"),
    },
}

assert tuple(sorted(OPTION_SPECS)) == METRIC_IDS


@dataclass(frozen=True)
class MetricConfig:
    """Identifier plus numeric options for one metric; unset options use defaults."""

    metric_id: str
    options: Mapping[str, Any] = field(default_factory=dict)
    seed: int = 42

    def __post_init__(self) -> None:
        if self.metric_id not in OPTION_SPECS:
            raise ValidationError(
                f"unknown metric_id {self.metric_id!r}; known: {', '.join(METRIC_IDS)}",
                field="metric_id",
            )
        spec = OPTION_SPECS[self.metric_id]
        for name, value in self.options.items():
            if name not in spec:
                raise ValidationError(
                    f"{self.metric_id} has no option {name!r}", field=name
                )
            _, check, doc = spec[name]
            if not check(value):
                raise ValidationError(
                    f"{self.metric_id}.{name}={value!r} out of range ({doc})", field=name
                )
        object.__setattr__(self, "options", dict(self.options))

    def opt(self, name: str) -> Any:
        if name in self.options:
            return self.options[name]
        return OPTION_SPECS[self.metric_id][name][0]


def resolve_config(cfg: MetricConfig | None, metric_id: str) -> MetricConfig:
    if cfg is None:
        return MetricConfig(metric_id=metric_id)
    if cfg.metric_id != metric_id:
        raise ValidationError(
            f"config is for {cfg.metric_id!r}, expected {metric_id!r}", field="metric_id"
        )
    return cfg


@dataclass(frozen=True)
class MetricScore:
    """One metric evaluation; ``diagnostics`` is always set for iterative metrics."""

    metric_id: str
    model_id: str
    dataset_id: str
    value: float
    diagnostics: dict[str, Any] | None = None

    def __post_init__(self) -> None:
        if not np.isfinite(self.value):
            raise ValidationError(
                f"{self.metric_id} produced non-finite value {self.value}", field="value"
            )


def check_inputs(
    features: FeatureMatrix, labels: LabelVector, *, min_per_class: int = 1
) -> tuple[np.ndarray, np.ndarray, int]:
    """Validate a (features, labels) pair for scoring.

    Returns (X as float64, y as int64, C) where C = max label + 1.  Requires
    aligned lengths, at least two classes, every class in [0, C) present at
    least ``min_per_class`` times.
    """
    if len(labels) != features.n:
        raise ValidationError(
            f"label count {len(labels)} != sample count {features.n}", field="labels"
        )
    labels.validate_classes(min_count=min_per_class)
    x = features.values.astype(np.float64)
    y = labels.labels.astype(np.int64)
    return x, y, int(y.max()) + 1


def class_means(x: np.ndarray, y: np.ndarray, num_classes: int) -> np.ndarray:
    means = np.empty((num_classes, x.shape[1]))
    for c in range(num_classes):
        means[c] = x[y == c].mean(axis=0)
    return means


def population_covariance(x: np.ndarray) -> np.ndarray:
    """Covariance with 1/n normalization."""
    xc = x - x.mean(axis=0)
    return xc.T @ xc / x.shape[0]


def pca_fit(x: np.ndarray) -> tuple[np.ndarray, np.ndarray, np.ndarray]:
    """Eigendecomposition of the population covariance, eigenvalues descending.

    Returns (mean, eigenvalues, eigenvectors-as-columns).
    """
    mean = x.mean(axis=0)
    cov = population_covariance(x)
    evals, evecs = np.linalg.eigh(cov)
    order = np.argsort(evals)[::-1]
    return mean, evals[order], evecs[:, order]


def canonical_row_order(x: np.ndarray) -> np.ndarray:
    """Indices sorting rows lexicographically by coordinates.

    Fit-time reductions run over rows in this order so results do not
    depend on how the caller happened to order the samples.
    """
    return np.lexsort(x.T[::-1])
