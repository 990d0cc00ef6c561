"""The six transferability metrics behind one scoring interface.

Every metric is a pure function of (features, labels, config, seed); the
batch runner evaluates each (metric, model, dataset) triple independently,
records per-triple failures without aborting, and merges results by key,
so it may be parallelized freely.
"""

from __future__ import annotations

from dataclasses import dataclass, field
from typing import Callable, Sequence

from ..errors import SiteBenchError
from ..feature_store import (
    BenchmarkManifest,
    FeatureMatrix,
    LabelVector,
    ScoreTable,
    read_features,
)
from .common import METRIC_IDS, OPTION_SPECS, MetricConfig, MetricScore
from .gbc import gbc
from .hscore import hscore
from .logme import logme
from .nleep import nleep
from .sfda import sfda
from .transrate import transrate

MetricFn = Callable[[FeatureMatrix, LabelVector, MetricConfig | None], MetricScore]

METRICS: dict[str, MetricFn] = {
    "gbc": gbc,
    "hscore": hscore,
    "logme": logme,
    "nleep": nleep,
    "sfda": sfda,
    "transrate": transrate,
}

assert tuple(sorted(METRICS)) == METRIC_IDS


def compute_metric(
    features: FeatureMatrix, labels: LabelVector, cfg: MetricConfig
) -> MetricScore:
    return METRICS[cfg.metric_id](features, labels, cfg)


def default_configs(seed: int = 42) -> list[MetricConfig]:
    return [MetricConfig(metric_id=m, seed=seed) for m in METRIC_IDS]


@dataclass(frozen=True)
class ScoringError:
    metric_id: str
    model_id: str
    dataset_id: str
    message: str


@dataclass
class ScoringRun:
    """Everything a batch produced: scores, per-triple failures."""

    results: list[MetricScore] = field(default_factory=list)
    errors: list[ScoringError] = field(default_factory=list)

    def table(self) -> ScoreTable:
        table = ScoreTable()
        for score in self.results:
            table.put(score.metric_id, score.model_id, score.dataset_id, score.value)
        return table


def score_all(manifest: BenchmarkManifest, metrics: Sequence[MetricConfig]) -> ScoringRun:
    """Score every registered (model, dataset) pair with every config.

    Feature files are read once per pair; a failing triple lands in
    ``errors`` and the batch continues.  Output order is fixed by sorting
    pairs, so reruns are byte-identical downstream.
    """
    run = ScoringRun()
    refs = sorted(manifest.feature_files, key=lambda r: (r.model_id, r.dataset_id))
    for ref in refs:
        try:
            features, labels = read_features(
                manifest.resolve(ref), model_id=ref.model_id, dataset_id=ref.dataset_id
            )
        except (SiteBenchError, OSError) as exc:
            for cfg in metrics:
                run.errors.append(
                    ScoringError(cfg.metric_id, ref.model_id, ref.dataset_id, str(exc))
                )
            continue
        for cfg in metrics:
            try:
                run.results.append(compute_metric(features, labels, cfg))
            except SiteBenchError as exc:
                run.errors.append(
                    ScoringError(cfg.metric_id, ref.model_id, ref.dataset_id, str(exc))
                )
    return run


__all__ = [
    "METRICS",
    "METRIC_IDS",
    "OPTION_SPECS",
    "MetricConfig",
    "MetricScore",
    "ScoringError",
    "ScoringRun",
    "compute_metric",
    "default_configs",
    "gbc",
    "hscore",
    "logme",
    "nleep",
    "score_all",
    "sfda",
    "transrate",
]
