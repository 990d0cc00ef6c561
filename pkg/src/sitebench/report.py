"""Report aggregation and machine-readable output files.

Rank correlations and fidelity values print with 3 decimals; row averages
are computed on the unrounded values and only rounded at print time.  Raw
scores print with full round-trip precision.  All writes go through a
temp-file-and-rename so readers never see partial output.
"""

from __future__ import annotations

import csv
import json
import os
import re
import tempfile
from dataclasses import dataclass
from pathlib import Path
from typing import Iterable, Mapping, Sequence

from .diagnostics import AuditReport, FidelityRecord
from .errors import ValidationError
from .feature_store import ScoreTable
from .metrics import MetricScore, ScoringError


def atomic_write_text(path: str | Path, text: str) -> None:
    path = Path(path)
    path.parent.mkdir(parents=True, exist_ok=True)
    fd, tmp = tempfile.mkstemp(dir=path.parent, prefix=path.name, suffix=".tmp")
    try:
        with os.fdopen(fd, "w", newline="") as fh:
            fh.write(text)
        os.replace(tmp, path)
    except BaseException:
        if os.path.exists(tmp):
            os.unlink(tmp)
        raise


def _csv_text(header: Sequence[str], rows: Iterable[Sequence]) -> str:
    import io

    buf = io.StringIO()
    writer = csv.writer(buf, lineterminator="\n")
    writer.writerow(header)
    writer.writerows(rows)
    return buf.getvalue()


def _f3(x: float) -> str:
    return f"{x:.3f}"


@dataclass(frozen=True)
class SummaryRow:
    metric_id: str
    per_dataset: dict[str, float]
    average: float


@dataclass(frozen=True)
class SummaryTable:
    """Per-metric weighted-tau rows over datasets, plus an Average column.

    Metric rows sort by ascending average; the static baseline, when
    present, always sits last.
    """

    dataset_ids: tuple[str, ...]
    rows: tuple[SummaryRow, ...]


def build_summary(
    tau_by_metric: Mapping[str, Mapping[str, float]],
    dataset_ids: Sequence[str] | None = None,
) -> SummaryTable:
    """Aggregate per-dataset weighted-tau values into the summary layout.

    Every metric must cover every dataset; the Average column is the
    arithmetic mean of the unrounded per-dataset values.
    """
    if not tau_by_metric:
        raise ValidationError("no metrics to summarize", field="tau_by_metric")
    if dataset_ids is None:
        first = next(iter(tau_by_metric.values()))
        datasets = tuple(sorted(first))
    else:
        datasets = tuple(dataset_ids)
    if not datasets:
        raise ValidationError("no datasets to summarize", field="dataset_ids")

    rows = []
    for metric_id, cells in tau_by_metric.items():
        missing = [ds for ds in datasets if ds not in cells]
        if missing:
            raise ValidationError(
                f"{metric_id} has no value for dataset {missing[0]!r}", field="tau_by_metric"
            )
        values = {ds: float(cells[ds]) for ds in datasets}
        average = sum(values[ds] for ds in datasets) / len(datasets)
        rows.append(SummaryRow(metric_id=metric_id, per_dataset=values, average=average))

    rows.sort(key=lambda r: (r.metric_id == "static", r.average, r.metric_id))
    return SummaryTable(dataset_ids=datasets, rows=tuple(rows))


def write_summary_csv(table: SummaryTable, path: str | Path) -> None:
    header = ["metric", *table.dataset_ids, "Average"]
    rows = [
        [row.metric_id]
        + [_f3(row.per_dataset[ds]) for ds in table.dataset_ids]
        + [_f3(row.average)]
        for row in table.rows
    ]
    atomic_write_text(path, _csv_text(header, rows))


def write_scores_csv(results: Sequence[MetricScore], path: str | Path) -> None:
    rows = []
    for s in sorted(results, key=lambda s: (s.metric_id, s.model_id, s.dataset_id)):
        converged = True
        if s.diagnostics is not None and "converged" in s.diagnostics:
            converged = bool(s.diagnostics["converged"])
        rows.append(
            [s.metric_id, s.model_id, s.dataset_id, repr(s.value), str(converged).lower()]
        )
    atomic_write_text(path, _csv_text(["metric", "model", "dataset", "score", "converged"], rows))


def read_scores_csv(path: str | Path) -> ScoreTable:
    table = ScoreTable()
    with open(path, newline="") as fh:
        for row in csv.DictReader(fh):
            table.put(row["metric"], row["model"], row["dataset"], float(row["score"]))
    return table


def write_errors_csv(errors: Sequence[ScoringError], path: str | Path) -> None:
    rows = [
        [e.metric_id, e.model_id, e.dataset_id, e.message]
        for e in sorted(errors, key=lambda e: (e.metric_id, e.model_id, e.dataset_id))
    ]
    atomic_write_text(path, _csv_text(["metric", "model", "dataset", "error"], rows))


def write_ablation_csv(
    sweeps: Mapping[tuple[str, str], Sequence[tuple[tuple[str, ...], float]]],
    path: str | Path,
) -> None:
    """``sweeps`` maps (metric_id, dataset_id) to ablation entries."""
    rows = []
    for (metric_id, dataset_id) in sorted(sweeps):
        for removed, tau in sweeps[(metric_id, dataset_id)]:
            rows.append([metric_id, dataset_id, ";".join(removed), _f3(tau)])
    atomic_write_text(path, _csv_text(["metric", "dataset", "removed_prefix", "tau_w"], rows))


def write_static_csv(taus: Mapping[str, float], path: str | Path) -> None:
    """Per-dataset weighted tau of the static baseline."""
    rows = [[ds, _f3(taus[ds])] for ds in sorted(taus)]
    atomic_write_text(path, _csv_text(["dataset", "tau_w"], rows))


def write_fidelity_csv(records: Sequence[FidelityRecord], path: str | Path) -> None:
    rows = []
    for rec in sorted(records, key=lambda r: (r.metric_id, r.dataset_id)):
        r_text = "nan" if rec.pearson_r is None else _f3(rec.pearson_r)
        rows.append([rec.metric_id, rec.dataset_id, r_text, rec.pair_count])
    atomic_write_text(path, _csv_text(["metric", "dataset", "pearson_r", "pair_count"], rows))


def safe_name(text: str) -> str:
    return re.sub(r"[^A-Za-z0-9._-]", "_", text)


def write_scatter_csv(
    model_ids: Sequence[str],
    scores: Mapping[str, float],
    accuracies: Mapping[str, float],
    path: str | Path,
) -> None:
    rows = [
        [m, repr(float(scores[m])), repr(float(accuracies[m]))] for m in sorted(model_ids)
    ]
    atomic_write_text(path, _csv_text(["model", "score", "accuracy"], rows))


def audit_report_json(report: AuditReport) -> str:
    doc: dict = {
        name: {"verdict": check.verdict, "evidence": check.evidence}
        for name, check in report.checks().items()
    }
    if report.dispersion is None:
        doc["dispersion"] = {"top1_concentration": None, "mean_pairwise_tau": None}
    else:
        doc["dispersion"] = {
            "top1_concentration": report.dispersion.top1_concentration,
            "mean_pairwise_tau": report.dispersion.mean_pairwise_tau,
        }
    return json.dumps(doc, indent=2, sort_keys=True) + "\n"


def write_audit_json(report: AuditReport, path: str | Path) -> None:
    atomic_write_text(path, audit_report_json(report))
