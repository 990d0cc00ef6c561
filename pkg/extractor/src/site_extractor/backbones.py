"""Vision backbone registry: build a model with its classifier head removed.

Every entry yields penultimate features (post global pooling, pre head) in
eval mode.  ``embedding_width`` is read off the replaced head so callers
can cross-check the emitted file header against the live model.
"""

from __future__ import annotations

from dataclasses import dataclass
from typing import Callable

import torch
from torch import nn
from torchvision import models

IMAGENET_MEAN = (0.485, 0.456, 0.406)
IMAGENET_STD = (0.229, 0.224, 0.225)


@dataclass
class Backbone:
    name: str
    model: nn.Module
    embedding_width: int
    input_size: int


def _strip_fc(model: nn.Module) -> int:
    width = model.fc.in_features
    model.fc = nn.Identity()
    return width


def _strip_classifier(model: nn.Module) -> int:
    head = model.classifier
    if isinstance(head, nn.Sequential):
        linear = [m for m in head if isinstance(m, nn.Linear)][-1]
        width = linear.in_features
    else:
        width = head.in_features
    model.classifier = nn.Identity()
    return width


@dataclass(frozen=True)
class _Spec:
    builder: Callable[..., nn.Module]
    weights: object
    strip: Callable[[nn.Module], int]
    input_size: int = 224


_REGISTRY: dict[str, _Spec] = {
    "resnet18": _Spec(models.resnet18, models.ResNet18_Weights.IMAGENET1K_V1, _strip_fc),
    "resnet34": _Spec(models.resnet34, models.ResNet34_Weights.IMAGENET1K_V1, _strip_fc),
    "resnet50": _Spec(models.resnet50, models.ResNet50_Weights.IMAGENET1K_V1, _strip_fc),
    "resnet101": _Spec(models.resnet101, models.ResNet101_Weights.IMAGENET1K_V1, _strip_fc),
    "resnet152": _Spec(models.resnet152, models.ResNet152_Weights.IMAGENET1K_V1, _strip_fc),
    "densenet121": _Spec(
        models.densenet121, models.DenseNet121_Weights.IMAGENET1K_V1, _strip_classifier
    ),
    "densenet169": _Spec(
        models.densenet169, models.DenseNet169_Weights.IMAGENET1K_V1, _strip_classifier
    ),
    "densenet201": _Spec(
        models.densenet201, models.DenseNet201_Weights.IMAGENET1K_V1, _strip_classifier
    ),
    "googlenet": _Spec(
        models.googlenet, models.GoogLeNet_Weights.IMAGENET1K_V1, _strip_fc
    ),
    "inception_v3": _Spec(
        models.inception_v3,
        models.Inception_V3_Weights.IMAGENET1K_V1,
        _strip_fc,
        input_size=299,
    ),
    "mobilenet_v2": _Spec(
        models.mobilenet_v2, models.MobileNet_V2_Weights.IMAGENET1K_V1, _strip_classifier
    ),
    "mnasnet1_0": _Spec(
        models.mnasnet1_0, models.MNASNet1_0_Weights.IMAGENET1K_V1, _strip_classifier
    ),
}


def available_models() -> list[str]:
    return sorted(_REGISTRY)


def load_backbone(name: str, pretrained: bool = True, seed: int = 0) -> Backbone:
    """Build the named backbone with its head replaced by identity.

    ``pretrained=False`` seeds torch before construction so the random
    initialization (and therefore every extracted feature) is reproducible.
    """
    if name not in _REGISTRY:
        raise KeyError(
            f"unknown model {name!r}; available: {', '.join(available_models())}"
        )
    spec = _REGISTRY[name]
    if not pretrained:
        torch.manual_seed(seed)
    kwargs = {"weights": spec.weights if pretrained else None}
    if spec.builder in (models.googlenet, models.inception_v3):
        kwargs["init_weights"] = not pretrained
    model = spec.builder(**kwargs)
    if hasattr(model, "aux_logits"):
        model.aux_logits = False
    width = spec.strip(model)
    model.eval()
    return Backbone(name=name, model=model, embedding_width=width, input_size=spec.input_size)
