"""NLEEP: log-expected empirical prediction through a Gaussian-mixture posterior.

Pipeline: (1) PCA keeping ``variance_retained`` of the total variance,
(2) diagonal-covariance GMM fit by EM, (3) the responsibilities r_{iz}
act as pseudo-source posteriors, (4) empirical joint
P(y, z) = 1/n sum_i r_{iz} [y_i = y] and conditional P(y|z) = P(y,z)/P(z),
(5) score = 1/n sum_i log sum_z P(y_i|z) r_{iz}, which is never positive.

Everything that aggregates over samples during fitting runs on rows in
canonical lexicographic order, and the mixture is seeded by a deterministic
k-means++-style farthest-first pass, so the score does not depend on the
row order of the input.
"""

from __future__ import annotations

import numpy as np
from scipy.special import logsumexp

from ..errors import ValidationError
from ..feature_store import FeatureMatrix, LabelVector
from .common import (
    MetricConfig,
    MetricScore,
    canonical_row_order,
    check_inputs,
    pca_fit,
    resolve_config,
)

_PRUNE_WEIGHT = 1e-10


def _seed_centers(x: np.ndarray, k: int) -> np.ndarray:
    """Farthest-first center selection; ties resolve to the earliest row.

    On lexicographically sorted input this is a pure function of the row
    set.  Duplicate rows can yield fewer than k distinct centers; the
    duplicates are dropped here.
    """
    d2 = ((x - x.mean(axis=0)) ** 2).sum(axis=1)
    chosen = [int(np.argmin(d2))]
    min_d2 = ((x - x[chosen[0]]) ** 2).sum(axis=1)
    while len(chosen) < k:
        nxt = int(np.argmax(min_d2))
        if min_d2[nxt] == 0.0:
            break  # every remaining point duplicates a chosen center
        chosen.append(nxt)
        min_d2 = np.minimum(min_d2, ((x - x[nxt]) ** 2).sum(axis=1))
    return x[chosen]


def _log_prob(x: np.ndarray, pi: np.ndarray, mu: np.ndarray, var: np.ndarray) -> np.ndarray:
    """log pi_k + log N(x_i | mu_k, diag(var_k)) as an (n, K) array.

    The Mahalanobis term expands into three matrix products, avoiding an
    n x K x d intermediate.
    """
    d = x.shape[1]
    log_det = np.sum(np.log(var), axis=1)
    inv = 1.0 / var
    maha = (
        (x * x) @ inv.T
        - 2.0 * (x @ (mu * inv).T)
        + np.sum(mu * mu * inv, axis=1)[None, :]
    )
    return np.log(pi)[None, :] - 0.5 * (d * np.log(2.0 * np.pi) + log_det[None, :] + maha)


def _fit_diag_gmm(
    x: np.ndarray, k: int, max_iter: int, tol: float, floor: float
) -> tuple[tuple[np.ndarray, np.ndarray, np.ndarray], dict]:
    n, d = x.shape
    centers = _seed_centers(x, k)
    k_eff = centers.shape[0]

    # hard assignment to the nearest seed initializes the parameters
    dist = np.stack([((x - c) ** 2).sum(axis=1) for c in centers], axis=1)
    assign = np.argmin(dist, axis=1)
    counts = np.bincount(assign, minlength=k_eff).astype(float)
    live = counts > 0
    centers, counts = centers[live], counts[live]
    assign = np.searchsorted(np.flatnonzero(live), assign)
    k_eff = centers.shape[0]

    pi = counts / n
    mu = np.vstack([x[assign == j].mean(axis=0) for j in range(k_eff)])
    var = np.vstack(
        [np.maximum(x[assign == j].var(axis=0), floor) for j in range(k_eff)]
    )

    prev_ll = None
    iterations = 0
    converged = False
    for iterations in range(1, max_iter + 1):
        log_p = _log_prob(x, pi, mu, var)
        lse = logsumexp(log_p, axis=1)
        ll = float(np.mean(lse))
        resp = np.exp(log_p - lse[:, None])

        nk = resp.sum(axis=0)
        nk = np.maximum(nk, 1e-300)
        pi = nk / n
        mu = resp.T @ x / nk[:, None]
        second = resp.T @ (x * x) / nk[:, None]
        var = np.maximum(second - mu * mu, floor)

        if prev_ll is not None and abs(ll - prev_ll) < tol:
            converged = True
            break
        prev_ll = ll

    pruned = int(np.sum(pi < _PRUNE_WEIGHT))
    if pruned:
        live = pi >= _PRUNE_WEIGHT
        pi, mu, var = pi[live], mu[live], var[live]
        pi = pi / pi.sum()

    diag = {
        "iterations": iterations,
        "converged": converged,
        "components": int(pi.size),
        "pruned_components": pruned + (k - k_eff),
    }
    return (pi, mu, var), diag


def default_component_count(n: int, num_classes: int) -> int:
    return max(1, min(5 * num_classes, n // 10))


def nleep(
    features: FeatureMatrix, labels: LabelVector, cfg: MetricConfig | None = None
) -> MetricScore:
    cfg = resolve_config(cfg, "nleep")
    x, y, c = check_inputs(features, labels, min_per_class=1)
    n, d = x.shape

    k = cfg.opt("n_components")
    if k is None:
        k = default_component_count(n, c)
    if k > n:
        raise ValidationError(
            f"component count {k} exceeds sample count {n}", field="n_components"
        )

    xs = x[canonical_row_order(x)]
    mean, evals, evecs = pca_fit(xs)
    total = float(np.sum(np.maximum(evals, 0.0)))
    if total <= 0.0:
        q = 1
        retained = 1.0
    else:
        csum = np.cumsum(np.maximum(evals, 0.0))
        target = cfg.opt("variance_retained") * total
        q = int(np.searchsorted(csum, target - 1e-12 * total)) + 1
        q = min(q, d)
        retained = float(csum[q - 1] / total)
    basis = evecs[:, :q]

    params, em_diag = _fit_diag_gmm(
        (xs - mean) @ basis,
        k,
        cfg.opt("em_max_iter"),
        cfg.opt("em_tol"),
        cfg.opt("variance_floor"),
    )

    # responsibilities and the joint are evaluated on the caller's rows
    z = (x - mean) @ basis
    log_p = _log_prob(z, *params)
    resp = np.exp(log_p - logsumexp(log_p, axis=1)[:, None])

    joint = np.zeros((c, resp.shape[1]))
    for cls in range(c):
        joint[cls] = resp[y == cls].sum(axis=0) / n
    p_z = joint.sum(axis=0)
    cond = joint / p_z[None, :]

    per_sample = np.minimum(np.sum(cond[y] * resp, axis=1), 1.0)
    value = float(np.mean(np.log(per_sample)))

    return MetricScore(
        metric_id="nleep",
        model_id=features.model_id,
        dataset_id=features.dataset_id,
        value=value,
        diagnostics={"retained_variance": retained, "pca_dim": q, **em_diag},
    )
