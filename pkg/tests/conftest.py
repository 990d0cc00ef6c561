import json

import numpy as np
import pytest

from sitebench.feature_store import FeatureMatrix, LabelVector, write_features

# The usual 11-model pool with family and size metadata (params in millions).
POOL = [
    ("ResNet-152", "resnet", 60.2),
    ("DenseNet-201", "densenet", 20.0),
    ("ResNet-101", "resnet", 44.5),
    ("DenseNet-169", "densenet", 14.1),
    ("ResNet-50", "resnet", 25.6),
    ("DenseNet-121", "densenet", 8.0),
    ("ResNet-34", "resnet", 21.8),
    ("GoogleNet", "googlenet", 6.6),
    ("Inceptionv3", "inception", 27.2),
    ("MobileNet", "mobilenet", 3.5),
    ("MNASNet", "mnasnet", 4.4),
]


def balanced_labels(n, num_classes):
    reps = n // num_classes
    assert reps * num_classes == n
    return np.repeat(np.arange(num_classes), reps)


def make_blobs(n_per_class, num_classes, d, spread=0.2, separation=8.0, seed=0):
    """Well-separated class blobs: centers on scaled coordinate axes."""
    rng = np.random.default_rng(seed)
    centers = np.zeros((num_classes, d))
    for c in range(num_classes):
        centers[c, c % d] = separation * (1 + c)
    rows = [rng.normal(centers[c], spread, size=(n_per_class, d)) for c in range(num_classes)]
    x = np.vstack(rows).astype(np.float32)
    y = np.repeat(np.arange(num_classes), n_per_class)
    return (
        FeatureMatrix("model", "dataset", x),
        LabelVector("dataset", y),
    )


def make_random_pair(n, d, num_classes, seed=0):
    rng = np.random.default_rng(seed)
    x = rng.normal(size=(n, d)).astype(np.float32)
    y = balanced_labels(n, num_classes)
    return FeatureMatrix("model", "dataset", x), LabelVector("dataset", y)


def write_manifest(
    tmp_path,
    models,
    datasets,
    accuracies,
    *,
    n_per_class=10,
    d=5,
    seed=0,
    feature_pairs=None,
):
    """Write SITB files plus a manifest JSON under tmp_path; returns the path.

    ``models`` is [(id, family, params)], ``datasets`` is [(id, num_classes,
    domain)], ``accuracies`` maps (model, dataset) to a value.  By default
    every (model, dataset) pair gets a random feature file.
    """
    features_dir = tmp_path / "features"
    features_dir.mkdir(parents=True, exist_ok=True)
    ds_classes = {ds: c for ds, c, _ in datasets}
    if feature_pairs is None:
        feature_pairs = [(m, ds) for m, _, _ in models for ds, _, _ in datasets]

    feature_entries = []
    rng = np.random.default_rng(seed)
    for model_id, dataset_id in feature_pairs:
        c = ds_classes[dataset_id]
        x = rng.normal(size=(n_per_class * c, d)).astype(np.float32)
        y = balanced_labels(n_per_class * c, c)
        rel = f"features/{model_id}_{dataset_id}.sitb".replace("/", "_", 0)
        write_features(
            FeatureMatrix(model_id, dataset_id, x),
            LabelVector(dataset_id, y),
            tmp_path / rel,
        )
        feature_entries.append({"model": model_id, "dataset": dataset_id, "path": rel})

    doc = {
        "version": 1,
        "models": [
            {"id": m, "family": fam, "params_millions": p} for m, fam, p in models
        ],
        "datasets": [
            {"id": ds, "num_classes": c, "domain": dom} for ds, c, dom in datasets
        ],
        "features": feature_entries,
        "accuracies": [
            {"model": m, "dataset": ds, "accuracy": str(v)}
            for (m, ds), v in sorted(accuracies.items())
        ],
    }
    path = tmp_path / "manifest.json"
    path.write_text(json.dumps(doc, indent=2))
    return path


@pytest.fixture
def pool_manifest(tmp_path):
    """Full 11-model pool over two small datasets, with synthetic accuracies."""
    datasets = [("cifarish", 3, "natural"), ("textureish", 2, "texture")]
    rng = np.random.default_rng(7)
    accuracies = {}
    for i, (m, _, params) in enumerate(POOL):
        for ds, _, _ in datasets:
            base = 0.5 + 0.4 * (params / 61.0)
            accuracies[(m, ds)] = round(min(0.99, base + rng.uniform(-0.05, 0.05)), 4)
    return write_manifest(tmp_path, POOL, datasets, accuracies, n_per_class=8, d=5)
