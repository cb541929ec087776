"""Shared fixtures: frozen kernels, random kernel factories, synthetic data."""

from __future__ import annotations

import numpy as np
import pytest

from milo import EmbeddingMatrix, LabelVector, MetricConfig, build_kernel, make_dataset

# Frozen 3-point kernel used by the worked examples.
THREE_POINT = np.array(
    [
        [1.0, 0.9, 0.2],
        [0.9, 1.0, 0.3],
        [0.2, 0.3, 1.0],
    ]
)

# Gram matrix whose cosine kernel is THREE_POINT: 2 * THREE_POINT - 1.
_GRAM = 2.0 * THREE_POINT - 1.0


@pytest.fixture
def three_point_kernel() -> np.ndarray:
    return THREE_POINT.copy()


def three_point_embeddings() -> EmbeddingMatrix:
    """Unit-norm rows whose pairwise cosine kernel is THREE_POINT.

    The Gram matrix is positive definite, so a Cholesky factor exists and
    its rows (unit norm, since the diagonal is 1) reproduce the kernel up
    to float32 rounding.
    """
    factor = np.linalg.cholesky(_GRAM)
    return EmbeddingMatrix(factor.astype(np.float32))


def random_embeddings(seed: int, m: int = 12, d: int = 6) -> EmbeddingMatrix:
    rng = np.random.default_rng(seed)
    return EmbeddingMatrix(rng.normal(size=(m, d)).astype(np.float32))


def random_cosine_kernel(seed: int, m: int = 12, d: int = 6) -> np.ndarray:
    emb = random_embeddings(seed, m, d)
    kernel = build_kernel(emb, np.arange(m), MetricConfig("cosine"))
    return kernel.values.astype(np.float64)


def blob_dataset(n: int, c: int, d: int = 8, seed: int = 0):
    """Labeled Gaussian blobs, classes contiguous and balanced-ish."""
    rng = np.random.default_rng(seed)
    sizes = [n // c + (1 if i < n % c else 0) for i in range(c)]
    rows = []
    labels = []
    for cls, size in enumerate(sizes):
        center = rng.normal(scale=3.0, size=d)
        rows.append(center + rng.normal(size=(size, d)))
        labels.extend([cls] * size)
    order = rng.permutation(n)
    emb = EmbeddingMatrix(np.concatenate(rows)[order].astype(np.float32))
    lbl = LabelVector(np.asarray(labels, dtype=np.int64)[order])
    return make_dataset(emb, lbl)
