"""Binary dataset files: embeddings and labels.

Both formats are little-endian, a fixed header followed by a raw payload,
and are rejected unless they parse completely (no partial reads, no
trailing bytes).

Embeddings (magic ``MEMB``)::

    magic    4 bytes  b"MEMB"
    version  u32      1
    n        u64      row count, >= 1
    d        u32      embedding width, >= 1
    dtype    u8       0 = float32
    payload  n*d little-endian float32, row-major

Labels (magic ``MLBL``)::

    magic    4 bytes  b"MLBL"
    version  u32      1
    n        u64      label count, >= 1
    payload  n little-endian u32 class ids

Class ids must be dense: every id in [0, max_id] occurs at least once.
"""

from __future__ import annotations

import struct
from dataclasses import dataclass, field
from pathlib import Path

import numpy as np

from .errors import (
    BadMagic,
    InvalidHeader,
    IoError,
    LengthMismatch,
    NonDenseClassIds,
    NonFiniteValue,
    TruncatedFile,
    UnreadableInput,
    UnsupportedVersion,
)

__all__ = [
    "EmbeddingMatrix",
    "LabelVector",
    "DatasetHandle",
    "load_embeddings",
    "write_embeddings",
    "load_labels",
    "write_labels",
    "make_dataset",
]

EMBEDDING_MAGIC = b"MEMB"
LABEL_MAGIC = b"MLBL"
FORMAT_VERSION = 1
DTYPE_F32 = 0

_EMB_HEADER = struct.Struct("<4sIQIB")
_LBL_HEADER = struct.Struct("<4sIQ")


@dataclass
class EmbeddingMatrix:
    """Dense n x d float32 matrix of per-sample representation vectors."""

    values: np.ndarray

    def __post_init__(self) -> None:
        values = np.asarray(self.values, dtype=np.float32)
        if values.ndim != 2 or values.shape[0] < 1 or values.shape[1] < 1:
            raise InvalidHeader("<memory>", "shape", values.ndim)
        bad = ~np.isfinite(values)
        if bad.any():
            flat = int(np.argmax(bad))
            row, col = divmod(flat, values.shape[1])
            raise NonFiniteValue("<memory>", row, col, _EMB_HEADER.size + 4 * flat)
        self.values = values

    @property
    def n(self) -> int:
        return self.values.shape[0]

    @property
    def d(self) -> int:
        return self.values.shape[1]

    def __eq__(self, other: object) -> bool:
        if not isinstance(other, EmbeddingMatrix):
            return NotImplemented
        return np.array_equal(self.values, other.values)


@dataclass
class LabelVector:
    """Per-sample class ids, dense in [0, num_classes)."""

    labels: np.ndarray
    num_classes: int = field(init=False)

    def __post_init__(self) -> None:
        labels = np.asarray(self.labels, dtype=np.int64)
        if labels.ndim != 1 or labels.shape[0] < 1:
            raise InvalidHeader("<memory>", "n", labels.shape[0] if labels.ndim == 1 else -1)
        if labels.min() < 0:
            raise InvalidHeader("<memory>", "class id", int(labels.min()))
        num_classes = int(labels.max()) + 1
        uniq = np.unique(labels)
        if uniq.size != num_classes:
            gaps = uniq != np.arange(uniq.size)
            missing = int(np.argmax(gaps)) if gaps.any() else int(uniq.size)
            raise NonDenseClassIds(missing, num_classes)
        self.labels = labels
        self.num_classes = num_classes

    @property
    def n(self) -> int:
        return self.labels.shape[0]

    def __eq__(self, other: object) -> bool:
        if not isinstance(other, LabelVector):
            return NotImplemented
        return np.array_equal(self.labels, other.labels)


@dataclass
class DatasetHandle:
    """Embeddings and labels of equal length."""

    embeddings: EmbeddingMatrix
    labels: LabelVector

    def __post_init__(self) -> None:
        if self.embeddings.n != self.labels.n:
            raise LengthMismatch(self.embeddings.n, self.labels.n)

    @property
    def n(self) -> int:
        return self.embeddings.n


def make_dataset(embeddings: EmbeddingMatrix, labels: LabelVector) -> DatasetHandle:
    """Pair embeddings with labels, rejecting mismatched lengths."""
    return DatasetHandle(embeddings, labels)


def _read_bytes(path: str | Path) -> bytes:
    try:
        return Path(path).read_bytes()
    except OSError as exc:
        raise UnreadableInput(path, exc.strerror or str(exc)) from exc


def load_embeddings(path: str | Path) -> EmbeddingMatrix:
    """Parse an embedding file, validating the full payload."""
    data = _read_bytes(path)
    if len(data) < _EMB_HEADER.size:
        raise TruncatedFile(path, _EMB_HEADER.size, len(data))
    magic, version, n, d, dtype = _EMB_HEADER.unpack_from(data)
    if magic != EMBEDDING_MAGIC:
        raise BadMagic(path, EMBEDDING_MAGIC, magic)
    if version != FORMAT_VERSION:
        raise UnsupportedVersion(path, "version", version, 4)
    if dtype != DTYPE_F32:
        raise UnsupportedVersion(path, "dtype", dtype, 20)
    if n < 1:
        raise InvalidHeader(path, "n", n)
    if d < 1:
        raise InvalidHeader(path, "d", d)
    expected = _EMB_HEADER.size + 4 * n * d
    if len(data) != expected:
        raise TruncatedFile(path, expected, len(data))
    values = np.frombuffer(data, dtype="<f4", offset=_EMB_HEADER.size).reshape(n, d)
    bad = ~np.isfinite(values)
    if bad.any():
        flat = int(np.argmax(bad))
        row, col = divmod(flat, d)
        raise NonFiniteValue(path, row, col, _EMB_HEADER.size + 4 * flat)
    return EmbeddingMatrix(values.copy())


def write_embeddings(path: str | Path, embeddings: EmbeddingMatrix) -> None:
    """Serialize an embedding matrix in canonical byte layout."""
    header = _EMB_HEADER.pack(
        EMBEDDING_MAGIC, FORMAT_VERSION, embeddings.n, embeddings.d, DTYPE_F32
    )
    payload = np.ascontiguousarray(embeddings.values, dtype="<f4").tobytes()
    try:
        Path(path).write_bytes(header + payload)
    except OSError as exc:
        raise IoError(f"{path}: {exc.strerror or exc}") from exc


def load_labels(path: str | Path) -> LabelVector:
    """Parse a label file, validating dense class ids."""
    data = _read_bytes(path)
    if len(data) < _LBL_HEADER.size:
        raise TruncatedFile(path, _LBL_HEADER.size, len(data))
    magic, version, n = _LBL_HEADER.unpack_from(data)
    if magic != LABEL_MAGIC:
        raise BadMagic(path, LABEL_MAGIC, magic)
    if version != FORMAT_VERSION:
        raise UnsupportedVersion(path, "version", version, 4)
    if n < 1:
        raise InvalidHeader(path, "n", n)
    expected = _LBL_HEADER.size + 4 * n
    if len(data) != expected:
        raise TruncatedFile(path, expected, len(data))
    ids = np.frombuffer(data, dtype="<u4", offset=_LBL_HEADER.size)
    return LabelVector(ids.astype(np.int64))


def write_labels(path: str | Path, labels: LabelVector) -> None:
    """Serialize a label vector in canonical byte layout."""
    header = _LBL_HEADER.pack(LABEL_MAGIC, FORMAT_VERSION, labels.n)
    payload = np.ascontiguousarray(labels.labels, dtype="<u4").tobytes()
    try:
        Path(path).write_bytes(header + payload)
    except OSError as exc:
        raise IoError(f"{path}: {exc.strerror or exc}") from exc
