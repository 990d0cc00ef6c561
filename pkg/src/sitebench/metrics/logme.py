"""LogME: averaged per-class Bayesian linear-regression log-evidence.

Each class contributes a one-vs-rest 0/1 target column regressed by a
Bayesian linear model with prior precision alpha and noise precision beta.
The hyperparameters follow the evidence fixed point

    Lambda = alpha I + beta F^T F
    m      = beta Lambda^{-1} F^T y
    gamma  = sum_i beta s_i^2 / (alpha + beta s_i^2)
    alpha <- gamma / ||m||^2
    beta  <- (n - gamma) / ||y - F m||^2

with s_i the singular values of F, starting from alpha = beta = 1 and
stopping once the log-evidence

    n/2 ln beta + d/2 ln alpha - n/2 ln 2pi
      - beta/2 ||y - F m||^2 - alpha/2 ||m||^2 - 1/2 ln det Lambda

moves by less than ``tol``.  The metric value is the per-class evidence
divided by n, averaged over classes.
"""

from __future__ import annotations

import math

import numpy as np

from ..feature_store import FeatureMatrix, LabelVector
from .common import MetricConfig, MetricScore, check_inputs, resolve_config

_LOG_2PI = math.log(2.0 * math.pi)


def _fixed_point(
    s2: np.ndarray,
    z: np.ndarray,
    y_norm2: float,
    n: int,
    d: int,
    max_iter: int,
    tol: float,
) -> tuple[float, int, bool]:
    """Run the evidence fixed point in the SVD basis.

    ``s2`` are squared singular values, ``z = U^T y``, and ``y_norm2`` is
    ||y||^2 (its component outside the column space enters the residual).
    Returns (evidence, iterations, converged).
    """
    s = np.sqrt(s2)
    resid_perp = max(y_norm2 - float(z @ z), 0.0)
    alpha = 1.0
    beta = 1.0
    evidence = -math.inf
    for it in range(1, max_iter + 1):
        lam = alpha + beta * s2
        m = beta * s * z / lam
        m_norm2 = float(m @ m)
        r = z - s * m
        resid2 = max(float(r @ r) + resid_perp, 1e-300)
        logdet = float(np.sum(np.log(lam))) + (d - s2.size) * math.log(alpha)
        new_evidence = 0.5 * (
            n * math.log(beta)
            + d * math.log(alpha)
            - n * _LOG_2PI
            - beta * resid2
            - alpha * m_norm2
            - logdet
        )
        if abs(new_evidence - evidence) < tol:
            return new_evidence, it, True
        evidence = new_evidence
        gamma = float(np.sum(beta * s2 / lam))
        if m_norm2 > 0.0:
            alpha = min(max(gamma / m_norm2, 1e-12), 1e12)
        beta = min(max((n - gamma) / resid2, 1e-12), 1e12)
    return evidence, max_iter, False


def logme(
    features: FeatureMatrix, labels: LabelVector, cfg: MetricConfig | None = None
) -> MetricScore:
    cfg = resolve_config(cfg, "logme")
    x, y, c = check_inputs(features, labels, min_per_class=1)
    n, d = x.shape
    max_iter = cfg.opt("max_iter")
    tol = cfg.opt("tol")

    # One SVD serves every class; s2 and U^T carry all the geometry needed.
    u, s, _ = np.linalg.svd(x, full_matrices=False)
    s2 = s * s

    per_class: list[float] = []
    iterations: list[int] = []
    converged_flags: list[bool] = []
    for k in range(c):
        target = (y == k).astype(np.float64)
        z = u.T @ target
        evidence, its, conv = _fixed_point(
            s2, z, float(target @ target), n, d, max_iter, tol
        )
        per_class.append(evidence / n)
        iterations.append(its)
        converged_flags.append(conv)

    return MetricScore(
        metric_id="logme",
        model_id=features.model_id,
        dataset_id=features.dataset_id,
        value=float(np.mean(per_class)),
        diagnostics={
            "iterations": iterations,
            "converged": all(converged_flags),
            "per_class_evidence": per_class,
        },
    )
