import numpy as np
import pytest
from PIL import Image


@pytest.fixture(scope="session")
def toy_dataset(tmp_path_factory):
    """16 random 32x32 RGB images in two class folders."""
    root = tmp_path_factory.mktemp("toy_images")
    rng = np.random.default_rng(0)
    for cls in ("class_a", "class_b"):
        (root / cls).mkdir()
        for i in range(8):
            pixels = rng.integers(0, 256, size=(32, 32, 3), dtype=np.uint8)
            Image.fromarray(pixels).save(root / cls / f"img_{i:02d}.png")
    return root
