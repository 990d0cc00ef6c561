import json
import struct
import subprocess
import sys
from pathlib import Path

import pytest
from click.testing import CliRunner

from site_extractor import ExtractionJob, load_backbone, run
from site_extractor.cli import main

HEADER = struct.Struct("<4sBBHQQ")


def read_header(path: Path):
    return HEADER.unpack(path.read_bytes()[: HEADER.size])


def job_for(toy_dataset, out, model="resnet18", **kwargs):
    return ExtractionJob(
        model_name=model,
        dataset_path=toy_dataset,
        output_path=out,
        batch_size=kwargs.pop("batch_size", 4),
        pretrained=False,
        seed=kwargs.pop("seed", 0),
        **kwargs,
    )


def test_toy_dataset_header_consistent(toy_dataset, tmp_path):
    out = tmp_path / "toy.sitb"
    backbone = run(job_for(toy_dataset, out))
    magic, version, dtype, reserved, n, d = read_header(out)
    assert magic == b"SITB" and version == 1 and dtype == 1 and reserved == 0
    assert n == 16
    assert d == backbone.embedding_width
    assert out.stat().st_size == HEADER.size + n * d * 4 + 8 + n * 4


def test_embedding_width_matches_live_model(toy_dataset, tmp_path):
    # the header's d must equal the width read off the loaded backbone
    backbone = load_backbone("resnet18", pretrained=False, seed=0)
    assert backbone.embedding_width == 512
    out = tmp_path / "r18.sitb"
    run(job_for(toy_dataset, out))
    assert read_header(out)[5] == 512


def test_labels_follow_dataset_order(toy_dataset, tmp_path):
    out = tmp_path / "toy.sitb"
    run(job_for(toy_dataset, out))
    data = out.read_bytes()
    _, _, _, _, n, d = read_header(out)
    labels = struct.unpack(f"<{n}I", data[HEADER.size + n * d * 4 + 8:])
    # ImageFolder sorts class dirs, then files: 8x class_a then 8x class_b
    assert labels == (0,) * 8 + (1,) * 8


def test_deterministic_rerun_bit_identical(toy_dataset, tmp_path):
    a, b = tmp_path / "a.sitb", tmp_path / "b.sitb"
    run(job_for(toy_dataset, a))
    run(job_for(toy_dataset, b))
    assert a.read_bytes() == b.read_bytes()


def test_batch_size_does_not_change_output(toy_dataset, tmp_path):
    a, b = tmp_path / "a.sitb", tmp_path / "b.sitb"
    run(job_for(toy_dataset, a, batch_size=4))
    run(job_for(toy_dataset, b, batch_size=16))
    assert a.read_bytes() == b.read_bytes()


def test_bad_batch_size_rejected(toy_dataset, tmp_path):
    with pytest.raises(ValueError, match="batch size"):
        job_for(toy_dataset, tmp_path / "x.sitb", batch_size=0)


def test_unknown_model_is_usage_error(toy_dataset, tmp_path):
    runner = CliRunner()
    result = runner.invoke(
        main,
        ["--model", "not-a-model", "--dataset", str(toy_dataset),
         "--out", str(tmp_path / "x.sitb"), "--weights", "none"],
    )
    assert result.exit_code == 2
    assert "unknown model" in result.output


def test_cli_end_to_end_passes_primary_validate(toy_dataset, tmp_path):
    """Files from two backbones must pass the scoring toolkit's validator."""
    runner = CliRunner()
    widths = {}
    for model in ("resnet18", "mobilenet_v2"):
        out = tmp_path / f"{model}.sitb"
        result = runner.invoke(
            main,
            ["--model", model, "--dataset", str(toy_dataset), "--out", str(out),
             "--batch", "4", "--weights", "none"],
        )
        assert result.exit_code == 0, result.output
        widths[model] = read_header(out)[5]

    manifest = {
        "version": 1,
        "models": [
            {"id": "resnet18", "family": "resnet", "params_millions": 11.7},
            {"id": "mobilenet_v2", "family": "mobilenet", "params_millions": 3.5},
        ],
        "datasets": [{"id": "toy", "num_classes": 2, "domain": "synthetic"}],
        "features": [
            {"model": m, "dataset": "toy", "path": f"{m}.sitb"}
            for m in ("resnet18", "mobilenet_v2")
        ],
        "accuracies": [
            {"model": m, "dataset": "toy", "accuracy": "0.5"}
            for m in ("resnet18", "mobilenet_v2")
        ],
    }
    (tmp_path / "manifest.json").write_text(json.dumps(manifest))
    (tmp_path / "config.json").write_text(json.dumps({"manifest": "manifest.json"}))

    proc = subprocess.run(
        [sys.executable, "-m", "sitebench", "validate", "--config",
         str(tmp_path / "config.json")],
        capture_output=True,
        text=True,
    )
    assert proc.returncode == 0, proc.stdout + proc.stderr
    verdict = json.loads(proc.stdout)
    assert verdict["status"] == "ok"
    assert widths == {"resnet18": 512, "mobilenet_v2": 1280}
