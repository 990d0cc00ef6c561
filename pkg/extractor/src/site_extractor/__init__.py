"""Feature extraction from pretrained vision backbones into SITB files."""

from .backbones import Backbone, available_models, load_backbone
from .cli import ExtractionJob, extract_features, run
from .sitb import write_sitb

__all__ = [
    "Backbone",
    "ExtractionJob",
    "available_models",
    "extract_features",
    "load_backbone",
    "run",
    "write_sitb",
]
