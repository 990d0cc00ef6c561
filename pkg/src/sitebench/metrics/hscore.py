"""H-score: trace(pinv(Sigma_f) Sigma_z).

Sigma_f is the population covariance of the features and Sigma_z the
population covariance of the per-sample class-mean assignment (each row
replaced by the mean of its class).  The pseudo-inverse is taken by
eigendecomposition with eigenvalues below ``pinv_rel_cutoff * lambda_max``
treated as zero, so rank-deficient inputs degrade to 0 instead of blowing up.
"""

from __future__ import annotations

import numpy as np

from ..feature_store import FeatureMatrix, LabelVector
from .common import MetricConfig, MetricScore, check_inputs, class_means, resolve_config


def hscore(
    features: FeatureMatrix, labels: LabelVector, cfg: MetricConfig | None = None
) -> MetricScore:
    cfg = resolve_config(cfg, "hscore")
    x, y, c = check_inputs(features, labels, min_per_class=2)
    n, d = x.shape

    mean = x.mean(axis=0)
    xc = x - mean
    cov_f = xc.T @ xc / n
    assigned = class_means(x, y, c)[y] - mean
    cov_z = assigned.T @ assigned / n

    evals, evecs = np.linalg.eigh(cov_f)
    lam_max = max(float(evals[-1]), 0.0)
    cutoff = cfg.opt("pinv_rel_cutoff") * lam_max
    keep = evals > cutoff
    rank = int(keep.sum())
    inv = np.zeros_like(evals)
    inv[keep] = 1.0 / evals[keep]
    pinv_f = (evecs * inv) @ evecs.T

    value = float(np.sum(pinv_f * cov_z))  # trace of the product, both symmetric
    return MetricScore(
        metric_id="hscore",
        model_id=features.model_id,
        dataset_id=features.dataset_id,
        value=value,
        diagnostics={"rank": rank, "rank_deficient": rank < d},
    )
