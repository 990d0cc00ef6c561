"""Benchmark manifests: model/dataset registries, accuracy and score tables.

The manifest is a JSON document:

    {
      "version": 1,
      "models":     [{"id": ..., "family": ..., "params_millions": ..., "notes": ...}],
      "datasets":   [{"id": ..., "num_classes": ..., "domain": ...}],
      "features":   [{"model": ..., "dataset": ..., "path": ...}],
      "accuracies": [{"model": ..., "dataset": ..., "accuracy": ...}]
    }

Accuracy values may be JSON numbers or decimal strings; writers should emit
strings so manifests stay diff-able across platforms.
"""

from __future__ import annotations

import json
from dataclasses import dataclass, field
from pathlib import Path
from typing import Iterable, Iterator, Mapping

import numpy as np

from ..errors import FormatError, ManifestError, MissingEntryError, ValidationError
from .sitb import read_features

#: metric identifiers a ScoreTable accepts; "static" is the fixed-order baseline.
METRIC_IDS = ("gbc", "hscore", "logme", "nleep", "sfda", "transrate")
SCORE_TABLE_IDS = METRIC_IDS + ("static",)


@dataclass(frozen=True)
class ModelRecord:
    model_id: str
    family: str
    params_millions: float
    notes: str | None = None

    def __post_init__(self) -> None:
        if not self.model_id:
            raise ValidationError("model_id must be non-empty", field="model_id")
        if not self.params_millions > 0:
            raise ValidationError(
                f"params_millions must be > 0, got {self.params_millions}",
                field="params_millions",
            )


@dataclass(frozen=True)
class DatasetRecord:
    dataset_id: str
    num_classes: int
    domain_tag: str

    def __post_init__(self) -> None:
        if not self.dataset_id:
            raise ValidationError("dataset_id must be non-empty", field="dataset_id")
        if self.num_classes < 2:
            raise ValidationError(
                f"num_classes must be >= 2, got {self.num_classes}", field="num_classes"
            )


@dataclass(frozen=True)
class FeatureFileRef:
    model_id: str
    dataset_id: str
    path: str


class AccuracyTable:
    """Ground-truth accuracies keyed by (model_id, dataset_id), each in [0, 1]."""

    def __init__(self, entries: Mapping[tuple[str, str], float]) -> None:
        table: dict[tuple[str, str], float] = {}
        for key, value in entries.items():
            value = float(value)
            if not 0.0 <= value <= 1.0:
                raise ValidationError(
                    f"accuracy for {key} is {value}, outside [0, 1]", field="accuracy"
                )
            table[key] = value
        self._entries = table

    def __len__(self) -> int:
        return len(self._entries)

    def __contains__(self, key: tuple[str, str]) -> bool:
        return key in self._entries

    def __iter__(self) -> Iterator[tuple[str, str]]:
        return iter(self._entries)

    def get(self, model_id: str, dataset_id: str) -> float:
        try:
            return self._entries[(model_id, dataset_id)]
        except KeyError:
            raise MissingEntryError(
                f"no accuracy for ({model_id}, {dataset_id})",
                model_id=model_id,
                dataset_id=dataset_id,
            ) from None

    def items(self) -> Iterable[tuple[tuple[str, str], float]]:
        return self._entries.items()


class ScoreTable:
    """Metric outputs keyed by (metric_id, model_id, dataset_id), all finite."""

    def __init__(self, entries: Mapping[tuple[str, str, str], float] | None = None) -> None:
        self._entries: dict[tuple[str, str, str], float] = {}
        if entries:
            for key, value in entries.items():
                self.put(*key, value)

    def put(self, metric_id: str, model_id: str, dataset_id: str, value: float) -> None:
        if metric_id not in SCORE_TABLE_IDS:
            raise ValidationError(
                f"unknown metric_id {metric_id!r}", field="metric_id"
            )
        value = float(value)
        if not np.isfinite(value):
            raise ValidationError(
                f"score for ({metric_id}, {model_id}, {dataset_id}) is not finite",
                field="value",
            )
        self._entries[(metric_id, model_id, dataset_id)] = value

    def get(self, metric_id: str, model_id: str, dataset_id: str) -> float:
        try:
            return self._entries[(metric_id, model_id, dataset_id)]
        except KeyError:
            raise MissingEntryError(
                f"no {metric_id} score for ({model_id}, {dataset_id})",
                model_id=model_id,
                dataset_id=dataset_id,
            ) from None

    def __len__(self) -> int:
        return len(self._entries)

    def __contains__(self, key: tuple[str, str, str]) -> bool:
        return key in self._entries

    def items(self) -> Iterable[tuple[tuple[str, str, str], float]]:
        return self._entries.items()

    def metric_ids(self) -> list[str]:
        return sorted({k[0] for k in self._entries})


@dataclass(frozen=True)
class BenchmarkManifest:
    """A validated registry of models, datasets, feature files and accuracies."""

    version: int
    models: tuple[ModelRecord, ...]
    datasets: tuple[DatasetRecord, ...]
    feature_files: tuple[FeatureFileRef, ...]
    accuracies: AccuracyTable
    root: Path = field(compare=False)

    def model_ids(self) -> list[str]:
        return [m.model_id for m in self.models]

    def dataset_ids(self) -> list[str]:
        return [d.dataset_id for d in self.datasets]

    def model(self, model_id: str) -> ModelRecord:
        for m in self.models:
            if m.model_id == model_id:
                return m
        raise ManifestError(f"unknown model_id {model_id!r}", code="unknown model_id")

    def dataset(self, dataset_id: str) -> DatasetRecord:
        for d in self.datasets:
            if d.dataset_id == dataset_id:
                return d
        raise ManifestError(
            f"unknown dataset_id {dataset_id!r}", code="unknown dataset_id"
        )

    def resolve(self, ref: FeatureFileRef) -> Path:
        return self.root / ref.path

    def models_for_dataset(self, dataset_id: str) -> list[str]:
        return sorted(
            ref.model_id for ref in self.feature_files if ref.dataset_id == dataset_id
        )


def _require(obj: Mapping, key: str, where: str):
    if key not in obj:
        raise ManifestError(f"{where} is missing key {key!r}", code="missing key")
    return obj[key]


def load_manifest(path: str | Path, data_root: str | Path | None = None) -> BenchmarkManifest:
    """Load and fully validate a manifest.

    ``data_root`` anchors the relative feature paths; it defaults to the
    manifest's own directory.  Raises ManifestError naming the first
    violated constraint; feature files are checked for existence here and
    for content by :func:`validate_manifest_files`.
    """
    path = Path(path)
    if not path.exists():
        raise ManifestError(f"manifest file {path} does not exist", code="missing file")
    try:
        doc = json.loads(path.read_text())
    except json.JSONDecodeError as exc:
        raise ManifestError(f"manifest is not valid JSON: {exc}", code="invalid json")
    if not isinstance(doc, dict):
        raise ManifestError("manifest root must be a JSON object", code="invalid json")

    version = _require(doc, "version", "manifest")
    if version != 1:
        raise ManifestError(f"unsupported manifest version {version!r}", code="bad version")

    root = Path(data_root) if data_root is not None else path.parent

    models = []
    for entry in _require(doc, "models", "manifest"):
        models.append(
            ModelRecord(
                model_id=str(_require(entry, "id", "model entry")),
                family=str(_require(entry, "family", "model entry")),
                params_millions=float(_require(entry, "params_millions", "model entry")),
                notes=entry.get("notes"),
            )
        )
    if len(models) < 2:
        raise ManifestError("at least 2 models required", code="too few models")
    model_ids = [m.model_id for m in models]
    if len(set(model_ids)) != len(model_ids):
        dup = next(m for m in model_ids if model_ids.count(m) > 1)
        raise ManifestError(f"duplicate model_id {dup!r}", code="duplicate model_id")

    datasets = []
    for entry in _require(doc, "datasets", "manifest"):
        datasets.append(
            DatasetRecord(
                dataset_id=str(_require(entry, "id", "dataset entry")),
                num_classes=int(_require(entry, "num_classes", "dataset entry")),
                domain_tag=str(_require(entry, "domain", "dataset entry")),
            )
        )
    if not datasets:
        raise ManifestError("at least 1 dataset required", code="too few datasets")
    dataset_ids = [d.dataset_id for d in datasets]
    if len(set(dataset_ids)) != len(dataset_ids):
        dup = next(d for d in dataset_ids if dataset_ids.count(d) > 1)
        raise ManifestError(f"duplicate dataset_id {dup!r}", code="duplicate dataset_id")

    known_models = set(model_ids)
    known_datasets = set(dataset_ids)

    refs = []
    seen_pairs: set[tuple[str, str]] = set()
    for entry in _require(doc, "features", "manifest"):
        ref = FeatureFileRef(
            model_id=str(_require(entry, "model", "feature entry")),
            dataset_id=str(_require(entry, "dataset", "feature entry")),
            path=str(_require(entry, "path", "feature entry")),
        )
        if ref.model_id not in known_models:
            raise ManifestError(
                f"unknown model_id {ref.model_id!r} in features", code="unknown model_id"
            )
        if ref.dataset_id not in known_datasets:
            raise ManifestError(
                f"unknown dataset_id {ref.dataset_id!r} in features",
                code="unknown dataset_id",
            )
        pair = (ref.model_id, ref.dataset_id)
        if pair in seen_pairs:
            raise ManifestError(f"duplicate pair {pair}", code="duplicate pair")
        seen_pairs.add(pair)
        if not (root / ref.path).exists():
            raise ManifestError(
                f"missing file {root / ref.path} for pair {pair}", code="missing file"
            )
        refs.append(ref)

    acc_entries: dict[tuple[str, str], float] = {}
    for entry in doc.get("accuracies", []):
        model = str(_require(entry, "model", "accuracy entry"))
        dataset = str(_require(entry, "dataset", "accuracy entry"))
        if model not in known_models:
            raise ManifestError(
                f"unknown model_id {model!r} in accuracies", code="unknown model_id"
            )
        if dataset not in known_datasets:
            raise ManifestError(
                f"unknown dataset_id {dataset!r} in accuracies", code="unknown dataset_id"
            )
        if (model, dataset) in acc_entries:
            raise ManifestError(
                f"duplicate pair {(model, dataset)} in accuracies", code="duplicate pair"
            )
        raw = _require(entry, "accuracy", "accuracy entry")
        try:
            value = float(raw)
        except (TypeError, ValueError):
            raise ManifestError(
                f"accuracy {raw!r} for ({model}, {dataset}) is not a number",
                code="bad accuracy",
            )
        acc_entries[(model, dataset)] = value

    try:
        accuracies = AccuracyTable(acc_entries)
    except ValidationError as exc:
        raise ManifestError(str(exc), code="bad accuracy")

    return BenchmarkManifest(
        version=int(version),
        models=tuple(models),
        datasets=tuple(datasets),
        feature_files=tuple(refs),
        accuracies=accuracies,
        root=root,
    )


@dataclass(frozen=True)
class FileIssue:
    """One validation failure found while deep-checking a feature file."""

    model_id: str
    dataset_id: str
    path: str
    code: str
    message: str


def validate_manifest_files(manifest: BenchmarkManifest) -> list[FileIssue]:
    """Read every registered feature file and collect conformance issues.

    Checks the SITB structure, value finiteness, and that labels cover the
    dataset's declared classes with at least two samples each (needed for
    class-conditional statistics).  Returns an empty list when clean.
    """
    issues: list[FileIssue] = []
    for ref in manifest.feature_files:
        resolved = manifest.resolve(ref)
        try:
            matrix, labels = read_features(
                resolved, model_id=ref.model_id, dataset_id=ref.dataset_id
            )
            labels.validate_classes(manifest.dataset(ref.dataset_id).num_classes)
        except (FormatError, ValidationError, OSError) as exc:
            code = getattr(exc, "code", None) or getattr(exc, "field", None) or "io error"
            issues.append(
                FileIssue(
                    model_id=ref.model_id,
                    dataset_id=ref.dataset_id,
                    path=str(resolved),
                    code=str(code),
                    message=str(exc),
                )
            )
    return issues
