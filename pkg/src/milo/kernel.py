"""Per-class similarity kernels and class-wise budget partitioning.

Kernels are built one class at a time, so peak memory is max_c m_c^2
entries instead of n^2. Values are stored as float32; all intermediate
math runs in float64. Matrices are exactly symmetric (symmetrized after
the BLAS product) and non-negative for every metric.

Metrics over representation vectors r_i, r_j:

    cosine  0.5 + 0.5 * cos(r_i, r_j), so the range is [0, 1]
    dot     raw inner products min-max scaled into [0, 1]
    rbf     exp(-||r_i - r_j||^2 / (kw * mean_dist))

where mean_dist is the mean squared pairwise distance over off-diagonal
in-class pairs (the plain-distance mean can be selected instead). The
scaling constants each class used are kept for the metadata manifest.
"""

from __future__ import annotations

import math
from dataclasses import dataclass, field

import numpy as np

from .dataio import EmbeddingMatrix, LabelVector
from .errors import (
    BudgetExceedsDataset,
    EmptyIndexList,
    IndexOutOfRange,
    InvalidHeader,
    ZeroNormEmbedding,
)

__all__ = [
    "MetricConfig",
    "KernelScaling",
    "SimilarityKernel",
    "ClassPartition",
    "build_kernel",
    "partition_by_class",
]

METRICS = ("cosine", "dot", "rbf")


@dataclass(frozen=True)
class MetricConfig:
    """Similarity metric selection.

    kw is the RBF bandwidth multiplier; rbf_mean_squared picks whether
    mean_dist averages squared distances (default) or plain distances.
    """

    metric: str = "cosine"
    kw: float = 1.0
    rbf_mean_squared: bool = True

    def __post_init__(self) -> None:
        if self.metric not in METRICS:
            raise InvalidHeader("<config>", "metric", self.metric)
        if self.metric == "rbf" and not self.kw > 0:
            raise InvalidHeader("<config>", "kw", self.kw)


@dataclass(frozen=True)
class KernelScaling:
    """Constants the kernel build derived from the data, for provenance."""

    mean_dist: float | None = None
    dot_min: float | None = None
    dot_max: float | None = None


@dataclass
class SimilarityKernel:
    """Similarity matrix over one class.

    indices maps local row/column positions to global dataset indices;
    values is the m_c x m_c float32 matrix.
    """

    indices: np.ndarray
    values: np.ndarray
    scaling: KernelScaling = field(default_factory=KernelScaling)

    @property
    def size(self) -> int:
        return int(self.values.shape[0])


def _symmetrize(values: np.ndarray) -> np.ndarray:
    return (values + values.T) / 2.0


def build_kernel(
    embeddings: EmbeddingMatrix, indices: np.ndarray, config: MetricConfig
) -> SimilarityKernel:
    """Build the similarity kernel over the rows listed in indices."""
    idx = np.asarray(indices, dtype=np.int64)
    if idx.size == 0:
        raise EmptyIndexList()
    if idx.min() < 0 or idx.max() >= embeddings.n:
        bad = int(idx.min()) if idx.min() < 0 else int(idx.max())
        raise IndexOutOfRange(bad, embeddings.n)
    rows = embeddings.values[idx].astype(np.float64)
    m = rows.shape[0]

    if config.metric == "cosine":
        norms = np.linalg.norm(rows, axis=1)
        zero = norms == 0.0
        if zero.any():
            raise ZeroNormEmbedding(int(idx[int(np.argmax(zero))]))
        unit = rows / norms[:, None]
        cos = np.clip(_symmetrize(unit @ unit.T), -1.0, 1.0)
        values = 0.5 + 0.5 * cos
        scaling = KernelScaling()
    elif config.metric == "dot":
        gram = _symmetrize(rows @ rows.T)
        lo = float(gram.min())
        hi = float(gram.max())
        if hi == lo:
            values = np.ones((m, m))
        else:
            values = (gram - lo) / (hi - lo)
        scaling = KernelScaling(dot_min=lo, dot_max=hi)
    else:
        gram = rows @ rows.T
        sq = np.sum(rows * rows, axis=1)
        dist2 = np.maximum(_symmetrize(sq[:, None] + sq[None, :] - 2.0 * gram), 0.0)
        if m == 1:
            mean_dist = 0.0
        else:
            d = dist2 if config.rbf_mean_squared else np.sqrt(dist2)
            mean_dist = float((d.sum() - np.trace(d)) / (m * m - m))
        if mean_dist == 0.0:
            values = np.ones((m, m))
        else:
            values = np.exp(-dist2 / (config.kw * mean_dist))
        scaling = KernelScaling(mean_dist=mean_dist)

    values = np.clip(values, 0.0, 1.0)
    if config.metric != "dot":
        np.fill_diagonal(values, 1.0)
    return SimilarityKernel(idx, values.astype(np.float32), scaling)


@dataclass
class ClassPartition:
    """Per-class global index lists plus per-class subset budgets."""

    indices: list[np.ndarray]
    budgets: list[int]

    def __post_init__(self) -> None:
        self.indices = [np.asarray(ix, dtype=np.int64) for ix in self.indices]
        self.budgets = [int(b) for b in self.budgets]
        if len(self.indices) < 1 or len(self.indices) != len(self.budgets):
            raise InvalidHeader("<partition>", "classes", len(self.indices))
        merged = np.sort(np.concatenate(self.indices))
        if not np.array_equal(merged, np.arange(merged.size)):
            raise InvalidHeader("<partition>", "coverage", int(merged.size))
        for c, (ix, b) in enumerate(zip(self.indices, self.budgets)):
            if b < 0 or b > ix.size:
                raise BudgetExceedsDataset(b, int(ix.size))

    @property
    def num_classes(self) -> int:
        return len(self.indices)

    @property
    def sizes(self) -> list[int]:
        return [int(ix.size) for ix in self.indices]

    @property
    def n(self) -> int:
        return int(sum(self.sizes))

    @property
    def k(self) -> int:
        return int(sum(self.budgets))

    def __eq__(self, other: object) -> bool:
        if not isinstance(other, ClassPartition):
            return NotImplemented
        if len(self.indices) != len(other.indices) or self.budgets != other.budgets:
            return False
        return all(np.array_equal(a, b) for a, b in zip(self.indices, other.indices))


def partition_by_class(labels: LabelVector, k: int) -> ClassPartition:
    """Split the dataset by class and allocate the budget k across classes.

    Budgets follow largest-remainder allocation on k * m_c / n, so they
    sum to exactly k; remainder ties go to the smaller class id.
    """
    n = labels.n
    if k < 0 or k > n:
        raise BudgetExceedsDataset(k, n)
    indices = [np.flatnonzero(labels.labels == c) for c in range(labels.num_classes)]
    quotas = [k * ix.size / n for ix in indices]
    budgets = [math.floor(q) for q in quotas]
    leftover = k - sum(budgets)
    order = sorted(range(len(quotas)), key=lambda c: (-(quotas[c] - budgets[c]), c))
    for c in order[:leftover]:
        budgets[c] += 1
    return ClassPartition(indices, budgets)
