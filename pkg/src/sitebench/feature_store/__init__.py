"""Persistent storage and validation of feature matrices, manifests and tables."""

from .manifest import (
    METRIC_IDS,
    SCORE_TABLE_IDS,
    AccuracyTable,
    BenchmarkManifest,
    DatasetRecord,
    FeatureFileRef,
    FileIssue,
    ModelRecord,
    ScoreTable,
    load_manifest,
    validate_manifest_files,
)
from .sitb import (
    HEADER_SIZE,
    FeatureMatrix,
    LabelVector,
    file_size,
    read_features,
    write_features,
)

__all__ = [
    "METRIC_IDS",
    "SCORE_TABLE_IDS",
    "AccuracyTable",
    "BenchmarkManifest",
    "DatasetRecord",
    "FeatureFileRef",
    "FileIssue",
    "ModelRecord",
    "ScoreTable",
    "load_manifest",
    "validate_manifest_files",
    "HEADER_SIZE",
    "FeatureMatrix",
    "LabelVector",
    "file_size",
    "read_features",
    "write_features",
]
