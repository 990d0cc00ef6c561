"""GBC: negated sum of pairwise Gaussian Bhattacharyya coefficients.

Each class is summarized by a diagonal Gaussian (population mean and
variance, variances floored at ``variance_floor``).  For every unordered
class pair the Bhattacharyya distance for diagonal Gaussians is

    D_B = 1/8 sum_j (mu1_j - mu2_j)^2 / vbar_j
        + 1/2 sum_j ln( vbar_j / sqrt(v1_j v2_j) ),   vbar = (v1 + v2) / 2

and the score is -sum_{c<c'} exp(-D_B), so heavily overlapping classes
push the score toward -C(C-1)/2 while well-separated ones approach 0.
"""

from __future__ import annotations

import itertools

import numpy as np

from ..feature_store import FeatureMatrix, LabelVector
from .common import MetricConfig, MetricScore, check_inputs, pca_fit, resolve_config


def bhattacharyya_diagonal(
    mu1: np.ndarray, var1: np.ndarray, mu2: np.ndarray, var2: np.ndarray
) -> float:
    vbar = 0.5 * (var1 + var2)
    mean_term = 0.125 * float(np.sum((mu1 - mu2) ** 2 / vbar))
    log_term = 0.5 * float(np.sum(np.log(vbar) - 0.5 * (np.log(var1) + np.log(var2))))
    return mean_term + log_term


def gbc(
    features: FeatureMatrix, labels: LabelVector, cfg: MetricConfig | None = None
) -> MetricScore:
    cfg = resolve_config(cfg, "gbc")
    x, y, c = check_inputs(features, labels, min_per_class=2)
    floor = cfg.opt("variance_floor")

    pca_dim = cfg.opt("pca_dim")
    if pca_dim is not None and pca_dim < x.shape[1]:
        mean, _, evecs = pca_fit(x)
        x = (x - mean) @ evecs[:, :pca_dim]

    mus = np.empty((c, x.shape[1]))
    vars_ = np.empty((c, x.shape[1]))
    floored = 0
    for cls in range(c):
        xc = x[y == cls]
        mus[cls] = xc.mean(axis=0)
        v = xc.var(axis=0)
        floored += int(np.sum(v < floor))
        vars_[cls] = np.maximum(v, floor)

    value = 0.0
    for a, b in itertools.combinations(range(c), 2):
        value -= np.exp(-bhattacharyya_diagonal(mus[a], vars_[a], mus[b], vars_[b]))

    return MetricScore(
        metric_id="gbc",
        model_id=features.model_id,
        dataset_id=features.dataset_id,
        value=float(value),
        diagnostics={"floored_dimensions": floored},
    )
