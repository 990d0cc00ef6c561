"""The ``extract`` command: image-folder dataset -> SITB feature file."""

from __future__ import annotations

from dataclasses import dataclass
from pathlib import Path

import click
import numpy as np
import torch
from torch.utils.data import DataLoader
from torchvision import datasets, transforms

from .backbones import IMAGENET_MEAN, IMAGENET_STD, Backbone, load_backbone
from .sitb import write_sitb


@dataclass
class ExtractionJob:
    model_name: str
    dataset_path: Path
    output_path: Path
    batch_size: int = 32
    device: str = "cpu"
    pretrained: bool = True
    seed: int = 0

    def __post_init__(self) -> None:
        if self.batch_size < 1:
            raise ValueError("batch size must be >= 1")


def _transform(input_size: int) -> transforms.Compose:
    return transforms.Compose(
        [
            transforms.Resize(int(input_size * 256 / 224)),
            transforms.CenterCrop(input_size),
            transforms.ToTensor(),
            transforms.Normalize(IMAGENET_MEAN, IMAGENET_STD),
        ]
    )


@torch.no_grad()
def extract_features(job: ExtractionJob) -> tuple[np.ndarray, np.ndarray, Backbone]:
    """Run the dataset through the backbone; rows follow dataset order."""
    backbone = load_backbone(job.model_name, pretrained=job.pretrained, seed=job.seed)
    device = torch.device(job.device)
    model = backbone.model.to(device)

    dataset = datasets.ImageFolder(job.dataset_path, transform=_transform(backbone.input_size))
    loader = DataLoader(dataset, batch_size=job.batch_size, shuffle=False, num_workers=0)

    chunks = []
    labels = []
    for images, targets in loader:
        output = model(images.to(device))
        chunks.append(output.cpu().numpy().astype(np.float32))
        labels.append(targets.numpy())
    features = np.concatenate(chunks, axis=0)
    label_vec = np.concatenate(labels, axis=0)
    assert features.shape == (len(dataset), backbone.embedding_width)
    return features, label_vec, backbone


def run(job: ExtractionJob) -> Backbone:
    features, labels, backbone = extract_features(job)
    write_sitb(features, labels, job.output_path)
    return backbone


@click.command()
@click.option("--model", "model_name", required=True, help="backbone name, e.g. resnet18")
@click.option(
    "--dataset",
    "dataset_path",
    required=True,
    type=click.Path(exists=True, file_okay=False),
    help="image-folder dataset (one subdirectory per class)",
)
@click.option("--out", "output_path", required=True, type=click.Path(), help="SITB output file")
@click.option("--batch", "batch_size", default=32, show_default=True, help="batch size")
@click.option("--device", default="cpu", show_default=True, help="torch device")
@click.option(
    "--weights",
    type=click.Choice(["pretrained", "none"]),
    default="pretrained",
    show_default=True,
    help="'none' uses a seeded random initialization (no download needed)",
)
@click.option("--seed", default=0, show_default=True, help="seed for --weights none")
def main(model_name, dataset_path, output_path, batch_size, device, weights, seed):
    """Dump penultimate-layer features plus labels to a SITB file."""
    job = ExtractionJob(
        model_name=model_name,
        dataset_path=Path(dataset_path),
        output_path=Path(output_path),
        batch_size=batch_size,
        device=device,
        pretrained=weights == "pretrained",
        seed=seed,
    )
    try:
        backbone = run(job)
    except KeyError as exc:
        raise click.UsageError(str(exc.args[0]))
    click.echo(f"wrote {output_path} (d={backbone.embedding_width})")


if __name__ == "__main__":
    main()
