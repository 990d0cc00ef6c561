"""Benchmark diagnostics: static baseline, ablation sweeps, fidelity, audits.

These routines probe whether a benchmark can distinguish real
transferability estimation from leaderboard memorization: a
dataset-agnostic static ranking, robustness of the weighted rank
correlation as dominant models are removed, correlation between pairwise
score gaps and accuracy gaps, and dispersion/checklist audits over the
model pool and accuracy table.
"""

from __future__ import annotations

import itertools
from dataclasses import dataclass, field
from typing import Iterable, Mapping, Sequence

from .errors import (
    MissingEntryError,
    UndefinedCorrelationError,
    UndefinedStatisticError,
    ValidationError,
)
from .feature_store import AccuracyTable, BenchmarkManifest, ScoreTable
from .rank_stats import RankedScores, kendall_tau, pearson, rank_desc, weighted_kendall_tau

#: Fixed sequence used by the static baseline: sizes descend and the two big
#: families alternate, which is enough to win the usual leaderboard.
DEFAULT_STATIC_ORDER: tuple[str, ...] = (
    "ResNet-152",
    "DenseNet-201",
    "ResNet-101",
    "DenseNet-169",
    "ResNet-50",
    "DenseNet-121",
    "ResNet-34",
    "GoogleNet",
    "Inceptionv3",
    "MobileNet",
    "MNASNet",
)

#: Default removal sequence: the oversized variants of the two dominant families.
DEFAULT_ABLATION_SEQUENCE: tuple[str, ...] = (
    "ResNet-152",
    "ResNet-101",
    "DenseNet-169",
    "DenseNet-201",
)


@dataclass(frozen=True)
class StaticOrder:
    """A fixed model ordering, best first."""

    model_ids: tuple[str, ...]

    def __post_init__(self) -> None:
        if len(set(self.model_ids)) != len(self.model_ids):
            raise ValidationError("static order contains duplicates", field="model_ids")
        if not self.model_ids:
            raise ValidationError("static order is empty", field="model_ids")


@dataclass(frozen=True)
class AblationPlan:
    """Model ids to remove cumulatively, in order."""

    removal_sequence: tuple[str, ...]

    def __post_init__(self) -> None:
        if len(set(self.removal_sequence)) != len(self.removal_sequence):
            raise ValidationError("removal sequence contains duplicates", field="removal_sequence")

    def validate_for(self, models: Iterable[str]) -> None:
        pool = set(models)
        for m in self.removal_sequence:
            if m not in pool:
                raise ValidationError(
                    f"ablation removes unknown model {m!r}", field="removal_sequence"
                )
        if len(pool) - len(self.removal_sequence) < 2:
            raise ValidationError(
                "fewer than 2 models would remain after full removal",
                field="removal_sequence",
            )


@dataclass(frozen=True)
class FidelityRecord:
    """Pearson correlation between pairwise score and accuracy deltas."""

    metric_id: str
    dataset_id: str
    pearson_r: float | None
    pair_count: int
    undefined: bool = False


def order_by_params(manifest: BenchmarkManifest) -> StaticOrder:
    """Convenience generator: sort by params_millions descending, ties by id."""
    ordered = sorted(manifest.models, key=lambda m: (-m.params_millions, m.model_id))
    return StaticOrder(tuple(m.model_id for m in ordered))


def static_scores(order: StaticOrder, models: Iterable[str]) -> dict[str, float]:
    """Dataset-independent scores: position k in the order gets len(order) - k.

    Earlier models score strictly higher.  Every requested model must
    appear in the order.
    """
    positions = {m: i for i, m in enumerate(order.model_ids)}
    scores: dict[str, float] = {}
    for m in models:
        if m not in positions:
            raise ValidationError(f"model {m!r} missing from static order", field="models")
        scores[m] = float(len(order.model_ids) - positions[m])
    return scores


def evaluate_metric(
    scores: ScoreTable,
    acc: AccuracyTable,
    metric_id: str,
    dataset_id: str,
    model_subset: Sequence[str],
) -> float:
    """Weighted Kendall's tau of a metric against ground truth on a model subset."""
    ids = sorted(model_subset)
    rs = RankedScores(
        model_ids=tuple(ids),
        ground_truth=tuple(acc.get(m, dataset_id) for m in ids),
        predicted=tuple(scores.get(metric_id, m, dataset_id) for m in ids),
    )
    return weighted_kendall_tau(rs)


def ablation_sweep(
    scores: ScoreTable,
    acc: AccuracyTable,
    metric_id: str,
    dataset_id: str,
    plan: AblationPlan,
    models: Iterable[str],
) -> list[tuple[tuple[str, ...], float]]:
    """Recompute the weighted tau as the plan's models are removed one by one.

    Entry k covers the pool minus the first k removals; entry 0 is the
    full pool, so the result has len(plan) + 1 entries.
    """
    pool = sorted(models)
    plan.validate_for(pool)
    out: list[tuple[tuple[str, ...], float]] = []
    for k in range(len(plan.removal_sequence) + 1):
        removed = plan.removal_sequence[:k]
        subset = [m for m in pool if m not in set(removed)]
        out.append((removed, evaluate_metric(scores, acc, metric_id, dataset_id, subset)))
    return out


def delta_pairs(values: Mapping[str, float], model_subset: Sequence[str]) -> list[float]:
    """Signed differences v_i - v_j over unordered pairs in canonical id order."""
    ids = sorted(model_subset)
    missing = [m for m in ids if m not in values]
    if missing:
        raise ValidationError(f"no value for model {missing[0]!r}", field="values")
    return [values[a] - values[b] for a, b in itertools.combinations(ids, 2)]


def fidelity_correlation(
    scores: ScoreTable, acc: AccuracyTable, metric_id: str, dataset_id: str,
    model_subset: Sequence[str],
) -> FidelityRecord:
    """Pearson r between pairwise accuracy deltas and pairwise score deltas.

    Constant scores or accuracies make the correlation undefined; that is
    surfaced as a flagged record rather than an exception.
    """
    ids = sorted(model_subset)
    acc_map = {m: acc.get(m, dataset_id) for m in ids}
    score_map = {m: scores.get(metric_id, m, dataset_id) for m in ids}
    d_acc = delta_pairs(acc_map, ids)
    d_scores = delta_pairs(score_map, ids)
    try:
        r = pearson(d_acc, d_scores)
    except UndefinedCorrelationError:
        return FidelityRecord(metric_id, dataset_id, None, len(d_acc), undefined=True)
    return FidelityRecord(metric_id, dataset_id, r, len(d_acc))


@dataclass(frozen=True)
class DispersionStats:
    top1_concentration: float
    mean_pairwise_tau: float
    winner_histogram: dict[str, int] = field(compare=False)


def rank_dispersion(
    acc: AccuracyTable, models: Sequence[str], datasets: Sequence[str]
) -> DispersionStats:
    """How concentrated the leaderboard is across datasets.

    top1_concentration is the largest fraction of datasets won by a single
    model (ties go to the lexicographically first id, matching rank_desc);
    mean_pairwise_tau averages Kendall's tau between the ground-truth
    rankings of every dataset pair.
    """
    model_ids = sorted(models)
    dataset_ids = sorted(datasets)
    if len(dataset_ids) < 2:
        raise UndefinedStatisticError("rank dispersion needs at least 2 datasets")
    if len(model_ids) < 2:
        raise UndefinedStatisticError("rank dispersion needs at least 2 models")

    columns = {
        ds: [acc.get(m, ds) for m in model_ids] for ds in dataset_ids
    }
    wins: dict[str, int] = {}
    for ds in dataset_ids:
        ranks = rank_desc(columns[ds], model_ids)
        winner = min(ranks, key=ranks.get)
        wins[winner] = wins.get(winner, 0) + 1
    top1 = max(wins.values()) / len(dataset_ids)

    taus = [
        kendall_tau(
            RankedScores(
                model_ids=tuple(model_ids),
                ground_truth=tuple(columns[a]),
                predicted=tuple(columns[b]),
            )
        )
        for a, b in itertools.combinations(dataset_ids, 2)
    ]
    return DispersionStats(
        top1_concentration=float(top1),
        mean_pairwise_tau=float(sum(taus) / len(taus)),
        winner_histogram=wins,
    )


@dataclass(frozen=True)
class AuditThresholds:
    hierarchy_ratio: float = 1.5
    budget_ratio: float = 3.0
    headroom_min_accuracy: float = 0.99
    dispersion_top1: float = 0.5


@dataclass(frozen=True)
class CheckResult:
    verdict: str  # "pass" | "flag" | "insufficient"
    evidence: str


@dataclass(frozen=True)
class AuditReport:
    """One verdict per benchmark-construction checklist item, plus dispersion."""

    family_hierarchy: CheckResult
    budget_match: CheckResult
    headroom: CheckResult
    domain_variety: CheckResult
    rank_dispersion: CheckResult
    dispersion: DispersionStats | None

    def checks(self) -> dict[str, CheckResult]:
        return {
            "family_hierarchy": self.family_hierarchy,
            "budget_match": self.budget_match,
            "headroom": self.headroom,
            "domain_variety": self.domain_variety,
            "rank_dispersion": self.rank_dispersion,
        }

    def all_pass(self) -> bool:
        return all(c.verdict == "pass" for c in self.checks().values())


def _check_family_hierarchy(manifest: BenchmarkManifest, ratio: float) -> CheckResult:
    if any(not m.family for m in manifest.models):
        return CheckResult("insufficient", "insufficient metadata: model without family tag")
    by_family: dict[str, list[float]] = {}
    for m in manifest.models:
        by_family.setdefault(m.family, []).append(m.params_millions)
    offenders = sorted(
        fam
        for fam, params in by_family.items()
        if len(params) >= 2 and max(params) / min(params) > ratio
    )
    if offenders:
        return CheckResult(
            "flag",
            "size ladder within family (max/min params > "
            f"{ratio}x): {', '.join(offenders)}",
        )
    return CheckResult("pass", f"no family spans more than {ratio}x in size")


def _check_budget_match(manifest: BenchmarkManifest, ratio: float) -> CheckResult:
    params = [m.params_millions for m in manifest.models]
    spread = max(params) / min(params)
    if spread > ratio:
        return CheckResult(
            "flag", f"pool spans {spread:.2f}x in params, above {ratio}x"
        )
    return CheckResult("pass", f"pool spans {spread:.2f}x in params, within {ratio}x")


def _check_headroom(
    manifest: BenchmarkManifest, acc: AccuracyTable, min_accuracy: float
) -> CheckResult:
    saturated = []
    for ds in manifest.dataset_ids():
        try:
            worst = min(acc.get(m.model_id, ds) for m in manifest.models)
        except MissingEntryError:
            return CheckResult(
                "insufficient", f"insufficient metadata: incomplete accuracies for {ds}"
            )
        if worst > min_accuracy:
            saturated.append(ds)
    if saturated:
        return CheckResult(
            "flag",
            f"every model above {min_accuracy:.0%} on: {', '.join(sorted(saturated))}",
        )
    return CheckResult("pass", "every dataset leaves performance headroom")


def _check_domain_variety(manifest: BenchmarkManifest) -> CheckResult:
    tags = {d.domain_tag for d in manifest.datasets}
    if "" in tags:
        return CheckResult("insufficient", "insufficient metadata: dataset without domain tag")
    if len(tags) < 2:
        return CheckResult("flag", f"single domain tag: {next(iter(tags))!r}")
    return CheckResult("pass", f"{len(tags)} distinct domain tags")


def audit_benchmark(
    manifest: BenchmarkManifest,
    acc: AccuracyTable,
    thresholds: AuditThresholds = AuditThresholds(),
) -> AuditReport:
    """Run the five benchmark-construction checks; informational, never raises."""
    dispersion: DispersionStats | None = None
    try:
        dispersion = rank_dispersion(
            acc, manifest.model_ids(), manifest.dataset_ids()
        )
        if dispersion.top1_concentration >= thresholds.dispersion_top1:
            disp_check = CheckResult(
                "flag",
                f"one model wins {dispersion.top1_concentration:.0%} of datasets "
                f"(>= {thresholds.dispersion_top1:.0%})",
            )
        else:
            disp_check = CheckResult(
                "pass",
                f"top model wins {dispersion.top1_concentration:.0%} of datasets",
            )
    except (UndefinedStatisticError, MissingEntryError) as exc:
        disp_check = CheckResult("insufficient", f"insufficient metadata: {exc}")

    return AuditReport(
        family_hierarchy=_check_family_hierarchy(manifest, thresholds.hierarchy_ratio),
        budget_match=_check_budget_match(manifest, thresholds.budget_ratio),
        headroom=_check_headroom(manifest, acc, thresholds.headroom_min_accuracy),
        domain_variety=_check_domain_variety(manifest),
        rank_dispersion=disp_check,
        dispersion=dispersion,
    )
