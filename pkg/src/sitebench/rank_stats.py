"""Rank correlation statistics for comparing predicted and ground-truth orderings.

Kendall's tau here is the plain pair-sign statistic

    tau = 2 / (M (M-1)) * sum_{i<j} sgn(G_i - G_j) sgn(T_i - T_j)

with sgn(0) = 0, so tied pairs contribute nothing to the numerator while
the denominator stays M(M-1)/2.  The weighted variant multiplies each pair
by the hyperbolic weight w(r, s) = 1/(r+1) + 1/(s+1) of the two items'
ground-truth ranks and divides by the total pair weight, which bounds the
statistic in [-1, 1] with perfect agreement at exactly 1.
"""

from __future__ import annotations

from dataclasses import dataclass
from typing import Mapping, Sequence

import numpy as np

from .errors import UndefinedCorrelationError, ValidationError


@dataclass(frozen=True)
class RankedScores:
    """Ground-truth and predicted scores aligned over the same models."""

    model_ids: tuple[str, ...]
    ground_truth: tuple[float, ...]
    predicted: tuple[float, ...]

    def __post_init__(self) -> None:
        m = len(self.model_ids)
        if m < 2:
            raise ValidationError("need at least 2 models", field="model_ids")
        if len(self.ground_truth) != m or len(self.predicted) != m:
            raise ValidationError(
                "model_ids, ground_truth and predicted must have equal length",
                field="ground_truth",
            )
        if len(set(self.model_ids)) != m:
            raise ValidationError("model_ids must be unique", field="model_ids")
        for name in ("ground_truth", "predicted"):
            if not np.all(np.isfinite(getattr(self, name))):
                raise ValidationError(f"non-finite value in {name}", field=name)

    @classmethod
    def from_maps(
        cls,
        ground_truth: Mapping[str, float],
        predicted: Mapping[str, float],
        model_ids: Sequence[str] | None = None,
    ) -> "RankedScores":
        ids = sorted(ground_truth) if model_ids is None else list(model_ids)
        return cls(
            model_ids=tuple(ids),
            ground_truth=tuple(float(ground_truth[i]) for i in ids),
            predicted=tuple(float(predicted[i]) for i in ids),
        )


def rank_desc(
    values: Sequence[float], model_ids: Sequence[str] | None = None
) -> dict[str, int]:
    """Assign rank 0 to the largest value; ties break by ascending model_id.

    When ``model_ids`` is omitted, positional indices serve as ids (as
    strings), so ties then break by original position.
    """
    if len(values) < 1:
        raise ValidationError("need at least 1 value", field="values")
    ids = [str(i) for i in range(len(values))] if model_ids is None else list(model_ids)
    if len(ids) != len(values):
        raise ValidationError("model_ids and values must align", field="model_ids")
    order = sorted(range(len(values)), key=lambda i: (-float(values[i]), ids[i]))
    return {ids[i]: rank for rank, i in enumerate(order)}


def _pair_signs(rs: RankedScores) -> tuple[np.ndarray, np.ndarray, np.ndarray, np.ndarray]:
    g = np.asarray(rs.ground_truth, dtype=float)
    t = np.asarray(rs.predicted, dtype=float)
    i, j = np.triu_indices(len(g), k=1)
    return np.sign(g[i] - g[j]), np.sign(t[i] - t[j]), i, j


def kendall_tau(rs: RankedScores) -> float:
    """Plain Kendall's tau over all M(M-1)/2 pairs; ties count as zero."""
    sg, st, _, _ = _pair_signs(rs)
    m = len(rs.model_ids)
    return float(2.0 * np.sum(sg * st) / (m * (m - 1)))


def weighted_kendall_tau(rs: RankedScores) -> float:
    """Hyperbolically weighted Kendall's tau, normalized by total pair weight.

    Ranks come from the ground truth alone (rank 0 = best), so every pair
    touching a top-ranked model carries a large weight.
    """
    sg, st, i, j = _pair_signs(rs)
    ranks = rank_desc(rs.ground_truth, rs.model_ids)
    r = np.array([ranks[m] for m in rs.model_ids], dtype=float)
    w = 1.0 / (r[i] + 1.0) + 1.0 / (r[j] + 1.0)
    return float(np.sum(sg * st * w) / np.sum(w))


def pearson(x: Sequence[float], y: Sequence[float]) -> float:
    """Product-moment correlation; raises when either input has no variance."""
    xa = np.asarray(x, dtype=float)
    ya = np.asarray(y, dtype=float)
    if xa.shape != ya.shape or xa.ndim != 1:
        raise ValidationError("inputs must be 1-D sequences of equal length", field="x")
    if xa.size < 2:
        raise ValidationError("need at least 2 points", field="x")
    if not (np.all(np.isfinite(xa)) and np.all(np.isfinite(ya))):
        raise ValidationError("non-finite value in correlation input", field="x")
    xc = xa - xa.mean()
    yc = ya - ya.mean()
    sx = np.sqrt(np.sum(xc * xc))
    sy = np.sqrt(np.sum(yc * yc))
    if sx == 0.0 or sy == 0.0:
        raise UndefinedCorrelationError(
            "correlation undefined: constant sequence"
        )
    r = float(np.sum(xc * yc) / (sx * sy))
    return min(1.0, max(-1.0, r))
