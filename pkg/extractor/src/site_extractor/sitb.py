"""Standalone SITB writer.

Implements the published byte layout directly so this package stays
decoupled from the scoring toolkit: 24-byte header (magic ``SITB``,
version 1, dtype 1 = float32 LE, 2 reserved zero bytes, n and d as u64),
row-major float32 payload, n echoed as u64, then n u32 labels.
"""

from __future__ import annotations

import os
import struct
import tempfile
from pathlib import Path

import numpy as np

_HEADER = struct.Struct("<4sBBHQQ")


def write_sitb(values: np.ndarray, labels: np.ndarray, path: str | Path) -> None:
    values = np.ascontiguousarray(values, dtype="<f4")
    labels = np.ascontiguousarray(labels, dtype="<u4")
    if values.ndim != 2:
        raise ValueError("values must be 2-D")
    n, d = values.shape
    if n < 2 or d < 1:
        raise ValueError(f"need n >= 2 and d >= 1, got {n} x {d}")
    if labels.shape != (n,):
        raise ValueError(f"labels must have shape ({n},), got {labels.shape}")
    if not np.all(np.isfinite(values)):
        raise ValueError("non-finite value in features")

    path = Path(path)
    path.parent.mkdir(parents=True, exist_ok=True)
    fd, tmp = tempfile.mkstemp(dir=path.parent, prefix=path.name, suffix=".tmp")
    try:
        with os.fdopen(fd, "wb") as fh:
            fh.write(_HEADER.pack(b"SITB", 1, 1, 0, n, d))
            fh.write(values.tobytes())
            fh.write(struct.pack("<Q", n))
            fh.write(labels.tobytes())
        os.replace(tmp, path)
    except BaseException:
        if os.path.exists(tmp):
            os.unlink(tmp)
        raise
