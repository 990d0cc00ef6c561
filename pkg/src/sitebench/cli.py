"""Command-line surface: validate, score, evaluate, static, ablate, fidelity, audit.

All commands read a JSON run config (``--config``).  Relative paths in the
config resolve against the config file's directory; feature paths resolve
against the data root, which is ``--data-root`` when given, else the
config's ``data_root``, else $SITE_DATA_ROOT, else the manifest's
directory.

Config keys (all optional except ``manifest``):

    manifest       path to the benchmark manifest JSON
    data_root      directory anchoring feature file paths
    output_dir     where reports go (default "out")
    seed           64-bit scoring seed (default 42)
    metrics        list of metric ids or {"id": ..., "options": {...}}
    static_order   model ids, best first (default: the built-in order)
    ablation_plan  model ids to remove cumulatively (default: built-in,
                   filtered to the manifest)
    audit          {hierarchy_ratio, budget_ratio, headroom_min_accuracy,
                    dispersion_top1}
    scores         path to a scores.csv (default "<output_dir>/scores.csv")
"""

from __future__ import annotations

import json
import os
import sys
from dataclasses import dataclass
from pathlib import Path

import click

from . import report as rpt
from .diagnostics import (
    DEFAULT_ABLATION_SEQUENCE,
    DEFAULT_STATIC_ORDER,
    AblationPlan,
    AuditThresholds,
    StaticOrder,
    ablation_sweep,
    audit_benchmark,
    evaluate_metric,
    fidelity_correlation,
    static_scores,
)
from .errors import SiteBenchError, ValidationError
from .feature_store import (
    BenchmarkManifest,
    ScoreTable,
    load_manifest,
    validate_manifest_files,
)
from .metrics import METRIC_IDS, MetricConfig, score_all

ENV_DATA_ROOT = "SITE_DATA_ROOT"


@dataclass
class RunConfig:
    manifest_path: Path
    data_root: Path | None
    output_dir: Path
    seed: int
    metrics: list[MetricConfig]
    static_order: StaticOrder
    ablation_plan: tuple[str, ...] | None  # None = use the filtered default
    thresholds: AuditThresholds
    scores_path: Path


def load_run_config(path: str | Path, data_root_override: str | None = None) -> RunConfig:
    path = Path(path)
    if not path.exists():
        raise click.UsageError(f"config file {path} does not exist")
    try:
        doc = json.loads(path.read_text())
    except json.JSONDecodeError as exc:
        raise click.UsageError(f"config is not valid JSON: {exc}")
    if not isinstance(doc, dict):
        raise click.UsageError("config root must be a JSON object")
    base = path.parent

    if "manifest" not in doc:
        raise click.UsageError("config is missing the 'manifest' key")
    manifest_path = base / str(doc["manifest"])

    if data_root_override is not None:
        data_root: Path | None = Path(data_root_override)
    elif "data_root" in doc:
        data_root = base / str(doc["data_root"])
    elif os.environ.get(ENV_DATA_ROOT):
        data_root = Path(os.environ[ENV_DATA_ROOT])
    else:
        data_root = None

    output_dir = base / str(doc.get("output_dir", "out"))
    seed = doc.get("seed", 42)
    if not isinstance(seed, int):
        raise click.UsageError(f"seed must be an integer, got {seed!r}")

    metrics = []
    for entry in doc.get("metrics", list(METRIC_IDS)):
        if isinstance(entry, str):
            metric_id, options = entry, {}
        elif isinstance(entry, dict):
            metric_id = entry.get("id", entry.get("metric_id"))
            options = entry.get("options", {})
        else:
            raise click.UsageError(f"bad metrics entry: {entry!r}")
        try:
            metrics.append(MetricConfig(metric_id=metric_id, options=options, seed=seed))
        except ValidationError as exc:
            raise click.UsageError(str(exc))

    try:
        static_order = StaticOrder(tuple(doc.get("static_order", DEFAULT_STATIC_ORDER)))
    except ValidationError as exc:
        raise click.UsageError(f"bad static_order: {exc}")
    plan = doc.get("ablation_plan")
    audit_doc = doc.get("audit", {})
    try:
        thresholds = AuditThresholds(**audit_doc)
    except TypeError as exc:
        raise click.UsageError(f"bad audit thresholds: {exc}")

    scores_path = base / str(doc["scores"]) if "scores" in doc else output_dir / "scores.csv"

    return RunConfig(
        manifest_path=manifest_path,
        data_root=data_root,
        output_dir=output_dir,
        seed=seed,
        metrics=metrics,
        static_order=static_order,
        ablation_plan=None if plan is None else tuple(plan),
        thresholds=thresholds,
        scores_path=scores_path,
    )


def _load_manifest(cfg: RunConfig) -> BenchmarkManifest:
    try:
        return load_manifest(cfg.manifest_path, cfg.data_root)
    except SiteBenchError as exc:
        raise click.ClickException(str(exc))


def _default_plan(manifest: BenchmarkManifest) -> AblationPlan:
    pool = set(manifest.model_ids())
    removals = [m for m in DEFAULT_ABLATION_SEQUENCE if m in pool]
    while removals and len(pool) - len(removals) < 2:
        removals.pop()
    return AblationPlan(tuple(removals))


def _resolve_plan(cfg: RunConfig, manifest: BenchmarkManifest) -> AblationPlan:
    if cfg.ablation_plan is None:
        return _default_plan(manifest)
    try:
        plan = AblationPlan(cfg.ablation_plan)
        plan.validate_for(manifest.model_ids())
    except ValidationError as exc:
        raise click.ClickException(str(exc))
    return plan


def _models_per_dataset(manifest: BenchmarkManifest) -> dict[str, list[str]]:
    out = {}
    for ds in manifest.dataset_ids():
        models = manifest.models_for_dataset(ds)
        out[ds] = models if models else manifest.model_ids()
    return out


def _read_scores(cfg: RunConfig) -> ScoreTable:
    if not cfg.scores_path.exists():
        raise click.ClickException(
            f"scores file {cfg.scores_path} does not exist; run 'score' first"
        )
    try:
        return rpt.read_scores_csv(cfg.scores_path)
    except (SiteBenchError, KeyError, ValueError) as exc:
        raise click.ClickException(f"bad scores file {cfg.scores_path}: {exc}")


_config_option = click.option(
    "--config", "config_path", required=True, type=click.Path(), help="run config JSON"
)
_data_root_option = click.option(
    "--data-root", "data_root", default=None, type=click.Path(), help="override data root"
)


@click.group()
def main() -> None:
    """Transferability scoring and benchmark diagnostics."""


@main.command()
@_config_option
@_data_root_option
def validate(config_path: str, data_root: str | None) -> None:
    """Check the manifest and every registered feature file."""
    cfg = load_run_config(config_path, data_root)
    issues: list[dict] = []
    try:
        manifest = load_manifest(cfg.manifest_path, cfg.data_root)
    except SiteBenchError as exc:
        issues.append(
            {"scope": "manifest", "code": getattr(exc, "code", "error"), "message": str(exc)}
        )
        click.echo(json.dumps({"status": "error", "issues": issues}, indent=2))
        sys.exit(1)
    for issue in validate_manifest_files(manifest):
        issues.append(
            {
                "scope": "feature_file",
                "model": issue.model_id,
                "dataset": issue.dataset_id,
                "path": issue.path,
                "code": issue.code,
                "message": issue.message,
            }
        )
    status = "ok" if not issues else "error"
    click.echo(json.dumps({"status": status, "issues": issues}, indent=2))
    sys.exit(0 if not issues else 1)


@main.command()
@_config_option
@_data_root_option
def score(config_path: str, data_root: str | None) -> None:
    """Score every (metric, model, dataset) triple into scores.csv."""
    cfg = load_run_config(config_path, data_root)
    manifest = _load_manifest(cfg)
    run = score_all(manifest, cfg.metrics)
    cfg.output_dir.mkdir(parents=True, exist_ok=True)
    rpt.write_scores_csv(run.results, cfg.output_dir / "scores.csv")
    rpt.write_errors_csv(run.errors, cfg.output_dir / "errors.csv")
    click.echo(f"wrote {cfg.output_dir / 'scores.csv'} ({len(run.results)} rows)")
    if run.errors:
        click.echo(f"{len(run.errors)} failed triples in {cfg.output_dir / 'errors.csv'}")
    sys.exit(0 if run.results else 1)


def _summary_taus(
    cfg: RunConfig, manifest: BenchmarkManifest, scores: ScoreTable
) -> dict[str, dict[str, float]]:
    per_dataset_models = _models_per_dataset(manifest)
    taus: dict[str, dict[str, float]] = {}
    try:
        for metric_id in scores.metric_ids():
            taus[metric_id] = {
                ds: evaluate_metric(scores, manifest.accuracies, metric_id, ds, models)
                for ds, models in per_dataset_models.items()
            }
        static_table = ScoreTable()
        for ds, models in per_dataset_models.items():
            for m, v in static_scores(cfg.static_order, models).items():
                static_table.put("static", m, ds, v)
        taus["static"] = {
            ds: evaluate_metric(static_table, manifest.accuracies, "static", ds, models)
            for ds, models in per_dataset_models.items()
        }
    except SiteBenchError as exc:
        raise click.ClickException(str(exc))
    return taus


@main.command()
@_config_option
@_data_root_option
def evaluate(config_path: str, data_root: str | None) -> None:
    """Emit summary.csv, ablation.csv, fidelity.csv and scatter files."""
    cfg = load_run_config(config_path, data_root)
    manifest = _load_manifest(cfg)
    scores = _read_scores(cfg)
    cfg.output_dir.mkdir(parents=True, exist_ok=True)

    table = rpt.build_summary(_summary_taus(cfg, manifest, scores), manifest.dataset_ids())
    rpt.write_summary_csv(table, cfg.output_dir / "summary.csv")

    plan = _resolve_plan(cfg, manifest)
    per_dataset_models = _models_per_dataset(manifest)
    metric_ids = scores.metric_ids()
    sweeps = {}
    fidelity = []
    try:
        for metric_id in metric_ids:
            for ds, models in per_dataset_models.items():
                sweeps[(metric_id, ds)] = ablation_sweep(
                    scores, manifest.accuracies, metric_id, ds, plan, models
                )
                fidelity.append(
                    fidelity_correlation(scores, manifest.accuracies, metric_id, ds, models)
                )
    except SiteBenchError as exc:
        raise click.ClickException(str(exc))
    rpt.write_ablation_csv(sweeps, cfg.output_dir / "ablation.csv")
    rpt.write_fidelity_csv(fidelity, cfg.output_dir / "fidelity.csv")

    try:
        for metric_id in metric_ids:
            for ds, models in per_dataset_models.items():
                rpt.write_scatter_csv(
                    models,
                    {m: scores.get(metric_id, m, ds) for m in models},
                    {m: manifest.accuracies.get(m, ds) for m in models},
                    cfg.output_dir
                    / f"scatter_{rpt.safe_name(metric_id)}_{rpt.safe_name(ds)}.csv",
                )
    except SiteBenchError as exc:
        raise click.ClickException(str(exc))

    for name in ("summary.csv", "ablation.csv", "fidelity.csv"):
        click.echo(f"wrote {cfg.output_dir / name}")


@main.command()
@_config_option
@_data_root_option
def static(config_path: str, data_root: str | None) -> None:
    """Weighted tau of the fixed static ranking on every dataset."""
    cfg = load_run_config(config_path, data_root)
    manifest = _load_manifest(cfg)
    cfg.output_dir.mkdir(parents=True, exist_ok=True)
    taus = {}
    try:
        for ds, models in _models_per_dataset(manifest).items():
            table = ScoreTable()
            for m, v in static_scores(cfg.static_order, models).items():
                table.put("static", m, ds, v)
            taus[ds] = evaluate_metric(table, manifest.accuracies, "static", ds, models)
    except SiteBenchError as exc:
        raise click.ClickException(str(exc))
    rpt.write_static_csv(taus, cfg.output_dir / "static.csv")
    click.echo(f"wrote {cfg.output_dir / 'static.csv'}")


@main.command()
@_config_option
@_data_root_option
def ablate(config_path: str, data_root: str | None) -> None:
    """Ablation sweeps only (needs scores.csv)."""
    cfg = load_run_config(config_path, data_root)
    manifest = _load_manifest(cfg)
    scores = _read_scores(cfg)
    plan = _resolve_plan(cfg, manifest)
    cfg.output_dir.mkdir(parents=True, exist_ok=True)
    sweeps = {}
    try:
        for metric_id in scores.metric_ids():
            for ds, models in _models_per_dataset(manifest).items():
                sweeps[(metric_id, ds)] = ablation_sweep(
                    scores, manifest.accuracies, metric_id, ds, plan, models
                )
    except SiteBenchError as exc:
        raise click.ClickException(str(exc))
    rpt.write_ablation_csv(sweeps, cfg.output_dir / "ablation.csv")
    click.echo(f"wrote {cfg.output_dir / 'ablation.csv'}")


@main.command()
@_config_option
@_data_root_option
def fidelity(config_path: str, data_root: str | None) -> None:
    """Pairwise-delta correlation only (needs scores.csv)."""
    cfg = load_run_config(config_path, data_root)
    manifest = _load_manifest(cfg)
    scores = _read_scores(cfg)
    cfg.output_dir.mkdir(parents=True, exist_ok=True)
    records = []
    try:
        for metric_id in scores.metric_ids():
            for ds, models in _models_per_dataset(manifest).items():
                records.append(
                    fidelity_correlation(scores, manifest.accuracies, metric_id, ds, models)
                )
    except SiteBenchError as exc:
        raise click.ClickException(str(exc))
    rpt.write_fidelity_csv(records, cfg.output_dir / "fidelity.csv")
    click.echo(f"wrote {cfg.output_dir / 'fidelity.csv'}")


@main.command()
@_config_option
@_data_root_option
def audit(config_path: str, data_root: str | None) -> None:
    """Benchmark-construction checklist; informational, always exits 0."""
    cfg = load_run_config(config_path, data_root)
    manifest = _load_manifest(cfg)
    report = audit_benchmark(manifest, manifest.accuracies, cfg.thresholds)
    cfg.output_dir.mkdir(parents=True, exist_ok=True)
    rpt.write_audit_json(report, cfg.output_dir / "audit.json")
    click.echo(f"wrote {cfg.output_dir / 'audit.json'}")
    sys.exit(0)


if __name__ == "__main__":
    main()
