"""TransRate: coding-rate gap between all features and their class-conditional parts.

With Z the mean-centered n x d feature matrix, the coding rate is

    R(Z, eps) = 1/2 logdet(I_d + d / (n eps^2) Z^T Z)

and the score is R(Z, eps) minus the sample-weighted average of the
per-class rates, each class re-centered on its own mean.  The gap is a
mutual-information surrogate and is non-negative up to numerical noise.
"""

from __future__ import annotations

import numpy as np

from ..feature_store import FeatureMatrix, LabelVector
from .common import MetricConfig, MetricScore, check_inputs, resolve_config


def coding_rate(z: np.ndarray, eps: float) -> float:
    n, d = z.shape
    scale = d / (n * eps * eps)
    _, logdet = np.linalg.slogdet(np.eye(d) + scale * (z.T @ z))
    return 0.5 * float(logdet)


def transrate(
    features: FeatureMatrix, labels: LabelVector, cfg: MetricConfig | None = None
) -> MetricScore:
    cfg = resolve_config(cfg, "transrate")
    x, y, c = check_inputs(features, labels, min_per_class=1)
    n = x.shape[0]
    eps = cfg.opt("eps")

    z = x - x.mean(axis=0)
    whole = coding_rate(z, eps)
    within = 0.0
    for cls in range(c):
        zc = z[y == cls]
        zc = zc - zc.mean(axis=0)
        within += (zc.shape[0] / n) * coding_rate(zc, eps)

    return MetricScore(
        metric_id="transrate",
        model_id=features.model_id,
        dataset_id=features.dataset_id,
        value=whole - within,
    )
