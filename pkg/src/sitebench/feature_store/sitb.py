"""SITB feature files: bit-exact storage of one (model, dataset) embedding matrix.

Byte layout (all integers little-endian):

    offset  size  content
    0       4     magic ``SITB``
    4       1     format version, must be 1
    5       1     dtype code, must be 1 (float32 little-endian)
    6       2     reserved, must be zero
    8       8     n, number of rows, as u64
    16      8     d, embedding dimension, as u64
    24      n*d*4 feature values, float32, row-major
    ...     8     n again as u64 (sanity echo)
    ...     n*4   labels, u32 each

Total size is therefore ``24 + n*d*4 + 8 + n*4`` bytes.  Values are stored
as float32 so a well-formed file round-trips bit-exactly.
"""

from __future__ import annotations

import os
import struct
import tempfile
from dataclasses import dataclass, field
from pathlib import Path

import numpy as np

from ..errors import FormatError, ValidationError

MAGIC = b"SITB"
VERSION = 1
DTYPE_F32 = 1
_HEADER = struct.Struct("<4sBBHQQ")

HEADER_SIZE = _HEADER.size  # 24


def file_size(n: int, d: int) -> int:
    """Exact size in bytes of a SITB file holding an n x d float32 matrix."""
    return HEADER_SIZE + n * d * 4 + 8 + n * 4


@dataclass(frozen=True, eq=False)
class FeatureMatrix:
    """An n x d float32 embedding matrix for one (model, dataset) pair.

    Row i aligns with entry i of the LabelVector stored in the same file.
    Construction validates: 2-D shape, n >= 2, d >= 1, all entries finite.
    """

    model_id: str
    dataset_id: str
    values: np.ndarray = field(repr=False)

    def __post_init__(self) -> None:
        arr = np.asarray(self.values)
        if arr.ndim != 2:
            raise ValidationError("feature values must be a 2-D matrix", field="values")
        if arr.dtype != np.float32:
            arr = arr.astype(np.float32)
        if arr.shape[0] < 2:
            raise ValidationError(
                f"need at least 2 samples, got {arr.shape[0]}", field="n"
            )
        if arr.shape[1] < 1:
            raise ValidationError("embedding dimension must be >= 1", field="d")
        if not np.all(np.isfinite(arr)):
            raise ValidationError("non-finite value in feature matrix", field="values")
        object.__setattr__(self, "values", arr)

    @property
    def n(self) -> int:
        return self.values.shape[0]

    @property
    def d(self) -> int:
        return self.values.shape[1]


@dataclass(frozen=True, eq=False)
class LabelVector:
    """Class indices aligned row-for-row with a FeatureMatrix.

    Construction validates that labels are non-negative integers.  Checks
    that need a class count C (labels < C, every class present often
    enough) live in :meth:`validate_classes`, because C comes from the
    dataset record, not the file.
    """

    dataset_id: str
    labels: np.ndarray = field(repr=False)

    def __post_init__(self) -> None:
        arr = np.asarray(self.labels)
        if arr.ndim != 1:
            raise ValidationError("labels must be a 1-D sequence", field="labels")
        if arr.size == 0:
            raise ValidationError("labels must be non-empty", field="labels")
        if not np.issubdtype(arr.dtype, np.integer):
            if not np.all(arr == np.floor(arr)):
                raise ValidationError("labels must be integers", field="labels")
            arr = arr.astype(np.int64)
        if arr.min() < 0:
            raise ValidationError("labels must be non-negative", field="labels")
        if arr.max() >= 2**32:
            raise ValidationError("labels must fit in u32", field="labels")
        object.__setattr__(self, "labels", arr.astype(np.uint32))

    def __len__(self) -> int:
        return int(self.labels.size)

    def num_classes(self) -> int:
        """Inferred class count, max label + 1."""
        return int(self.labels.max()) + 1

    def class_counts(self, num_classes: int | None = None) -> np.ndarray:
        c = self.num_classes() if num_classes is None else num_classes
        return np.bincount(self.labels.astype(np.int64), minlength=c)

    def validate_classes(self, num_classes: int | None = None, min_count: int = 2) -> None:
        """Check labels against a class count C.

        Raises ValidationError unless every label is in [0, C), C >= 2, and
        every class index in [0, C) occurs at least ``min_count`` times.
        When ``num_classes`` is None, C is inferred as max label + 1.
        """
        c = self.num_classes() if num_classes is None else int(num_classes)
        if c < 2:
            raise ValidationError("need at least 2 classes", field="labels")
        if int(self.labels.max()) >= c:
            raise ValidationError(
                f"label {int(self.labels.max())} out of range for {c} classes",
                field="labels",
            )
        counts = self.class_counts(c)
        thin = np.nonzero(counts < min_count)[0]
        if thin.size:
            raise ValidationError(
                f"class {int(thin[0])} occurs {int(counts[thin[0]])} time(s), "
                f"need at least {min_count}",
                field="labels",
            )


def write_features(matrix: FeatureMatrix, labels: LabelVector, path: str | Path) -> None:
    """Serialize a validated (matrix, labels) pair to ``path``.

    The write is atomic: a temp file in the target directory is renamed
    into place, so readers never observe a partial file.
    """
    if len(labels) != matrix.n:
        raise ValidationError(
            f"label count {len(labels)} != sample count {matrix.n}", field="labels"
        )
    if labels.dataset_id and matrix.dataset_id and labels.dataset_id != matrix.dataset_id:
        raise ValidationError(
            f"label dataset_id {labels.dataset_id!r} != matrix dataset_id "
            f"{matrix.dataset_id!r}",
            field="dataset_id",
        )
    path = Path(path)
    header = _HEADER.pack(MAGIC, VERSION, DTYPE_F32, 0, matrix.n, matrix.d)
    payload = np.ascontiguousarray(matrix.values, dtype="<f4").tobytes()
    echo = struct.pack("<Q", matrix.n)
    label_bytes = np.ascontiguousarray(labels.labels, dtype="<u4").tobytes()

    path.parent.mkdir(parents=True, exist_ok=True)
    fd, tmp = tempfile.mkstemp(dir=path.parent, prefix=path.name, suffix=".tmp")
    try:
        with os.fdopen(fd, "wb") as fh:
            fh.write(header)
            fh.write(payload)
            fh.write(echo)
            fh.write(label_bytes)
        os.replace(tmp, path)
    except BaseException:
        if os.path.exists(tmp):
            os.unlink(tmp)
        raise


def read_features(
    path: str | Path, *, model_id: str = "", dataset_id: str = ""
) -> tuple[FeatureMatrix, LabelVector]:
    """Parse and validate a SITB file; inverse of :func:`write_features`.

    Every structural defect raises FormatError with a distinct ``code``.
    """
    data = Path(path).read_bytes()
    if len(data) < HEADER_SIZE:
        raise FormatError(
            f"file is {len(data)} bytes, header needs {HEADER_SIZE}",
            code="truncated header",
        )
    magic, version, dtype, reserved, n, d = _HEADER.unpack_from(data, 0)
    if magic != MAGIC:
        raise FormatError(f"expected magic {MAGIC!r}, got {magic!r}", code="bad magic")
    if version != VERSION:
        raise FormatError(f"unsupported version {version}", code="bad version")
    if dtype != DTYPE_F32:
        raise FormatError(f"unsupported dtype code {dtype}", code="bad dtype")
    if reserved != 0:
        raise FormatError("reserved header bytes must be zero", code="reserved nonzero")
    if n < 2:
        raise FormatError(f"sample count {n} < 2", code="bad sample count")
    if d < 1:
        raise FormatError(f"dimension {d} < 1", code="bad dimension")

    values_end = HEADER_SIZE + n * d * 4
    if len(data) < values_end + 8:
        raise FormatError(
            f"file is {len(data)} bytes, matrix plus echo needs {values_end + 8}",
            code="truncated payload",
        )
    (echo,) = struct.unpack_from("<Q", data, values_end)
    if echo != n:
        raise FormatError(
            f"trailing sanity count {echo} != header n {n}", code="corrupt length"
        )
    labels_start = values_end + 8
    if len(data) - labels_start != n * 4:
        raise FormatError(
            f"label region is {len(data) - labels_start} bytes, expected {n * 4}",
            code="label-count mismatch",
        )

    values = np.frombuffer(data, dtype="<f4", count=n * d, offset=HEADER_SIZE)
    values = values.reshape(n, d).copy()
    if not np.all(np.isfinite(values)):
        raise FormatError("non-finite value in feature payload", code="non-finite value")
    labels = np.frombuffer(data, dtype="<u4", count=n, offset=labels_start).copy()

    matrix = FeatureMatrix(model_id=model_id, dataset_id=dataset_id, values=values)
    vector = LabelVector(dataset_id=dataset_id, labels=labels)
    return matrix, vector
