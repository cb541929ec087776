"""Subset exploration: SGE families and weighted re-exploration draws.

sge_family materializes n whole-dataset subsets, each assembled from one
stochastic-greedy run per class on its own stream, so any single subset
is reproducible without regenerating the family.

build_sampling_distribution converts per-element greedy importance gains
into sampling probabilities with a second-order Taylor softmax

    p_i = (1 + g_i + g_i^2 / 2) / sum_j (1 + g_j + g_j^2 / 2)

whose numerator is bounded below by 1/2, so every element keeps nonzero
mass and ordering is preserved for gains in [-1, inf). Draws without
replacement use exponential-key order statistics: key_i = -ln(u_i) / p_i
with u_i uniform, keeping the k smallest keys.
"""

from __future__ import annotations

from dataclasses import dataclass, field

import numpy as np

from .errors import BudgetTooLarge, EmptyInput, NonFiniteGain
from .kernel import ClassPartition, SimilarityKernel
from .maximizer import greedy_sample_importance, stochastic_greedy
from .rng import STREAM_SGE, STREAM_WRE, RngStream, derive_stream
from .setfuncs import DISPARITY_MIN, SetFunctionKind, graph_cut

__all__ = [
    "SubsetFamily",
    "SamplingDistribution",
    "taylor_softmax",
    "weighted_sample_without_replacement",
    "sge_family",
    "build_sampling_distribution",
    "wre_draw",
]


@dataclass
class SubsetFamily:
    """Pre-generated whole-dataset subsets plus the generator settings."""

    subsets: list[np.ndarray]
    epsilon: float
    seed: int

    def __post_init__(self) -> None:
        self.subsets = [np.asarray(s, dtype=np.int64) for s in self.subsets]

    def __len__(self) -> int:
        return len(self.subsets)

    def __eq__(self, other: object) -> bool:
        if not isinstance(other, SubsetFamily):
            return NotImplemented
        if self.epsilon != other.epsilon or self.seed != other.seed:
            return False
        if len(self.subsets) != len(other.subsets):
            return False
        return all(np.array_equal(a, b) for a, b in zip(self.subsets, other.subsets))


@dataclass
class SamplingDistribution:
    """Per-class sampling probabilities aligned with global indices.

    gains keeps the raw greedy importance values for audit.
    """

    indices: list[np.ndarray]
    probs: list[np.ndarray]
    gains: list[np.ndarray]

    def __post_init__(self) -> None:
        self.indices = [np.asarray(ix, dtype=np.int64) for ix in self.indices]
        self.probs = [np.asarray(p, dtype=np.float64) for p in self.probs]
        self.gains = [np.asarray(g, dtype=np.float64) for g in self.gains]

    @property
    def num_classes(self) -> int:
        return len(self.indices)

    def __eq__(self, other: object) -> bool:
        if not isinstance(other, SamplingDistribution):
            return NotImplemented
        for mine, theirs in (
            (self.indices, other.indices),
            (self.probs, other.probs),
            (self.gains, other.gains),
        ):
            if len(mine) != len(theirs):
                return False
            if not all(np.array_equal(a, b) for a, b in zip(mine, theirs)):
                return False
        return True


def taylor_softmax(gains: np.ndarray) -> np.ndarray:
    """Normalize gains into a strictly positive distribution."""
    g = np.asarray(gains, dtype=np.float64).ravel()
    if g.size == 0:
        raise EmptyInput("gain vector")
    finite = np.isfinite(g)
    if not finite.all():
        raise NonFiniteGain(int(np.argmin(finite)))
    h = 1.0 + g + 0.5 * g * g
    return h / h.sum()


def weighted_sample_without_replacement(
    probs: np.ndarray, k: int, rng: RngStream
) -> np.ndarray:
    """Draw k distinct positions with inclusion biased by probs.

    Equivalent to sequential weighted draws without replacement; returns
    the chosen positions in ascending order.
    """
    p = np.asarray(probs, dtype=np.float64).ravel()
    if p.size == 0:
        raise EmptyInput("probability vector")
    if k < 0 or k > p.size:
        raise BudgetTooLarge(k, p.size)
    if k == 0:
        return np.zeros(0, dtype=np.int64)
    gen = rng.generator()
    with np.errstate(divide="ignore"):
        keys = gen.standard_exponential(p.size) / p
    chosen = np.argsort(keys, kind="stable")[:k]
    return np.sort(chosen).astype(np.int64)


def sge_family(
    partition: ClassPartition,
    kernels: list[SimilarityKernel],
    k: int,
    n: int,
    epsilon: float,
    seed: int,
    kind: SetFunctionKind = graph_cut(),
) -> SubsetFamily:
    """Generate n subsets of exactly k global indices each.

    Subset i, class c runs stochastic greedy on stream (seed, SGE, i, c)
    with the class budget; per-class picks are mapped to global indices,
    concatenated, and sorted.
    """
    if partition.k != k:
        raise BudgetTooLarge(k, partition.k)
    subsets = []
    for i in range(n):
        parts = []
        for c, kernel in enumerate(kernels):
            budget = partition.budgets[c]
            stream = RngStream(seed, derive_stream(STREAM_SGE, i, c))
            result = stochastic_greedy(kind, kernel, budget, epsilon, stream)
            parts.append(kernel.indices[result.selected])
        subsets.append(np.sort(np.concatenate(parts)) if parts else np.zeros(0, np.int64))
    return SubsetFamily(subsets, epsilon, seed)


def build_sampling_distribution(
    partition: ClassPartition,
    kernels: list[SimilarityKernel],
    kind: SetFunctionKind = DISPARITY_MIN,
) -> SamplingDistribution:
    """Taylor-softmax the per-class greedy importance gains."""
    gains = [greedy_sample_importance(kind, kernel) for kernel in kernels]
    probs = [taylor_softmax(g) for g in gains]
    return SamplingDistribution([np.asarray(ix) for ix in partition.indices], probs, gains)


def wre_draw(
    distribution: SamplingDistribution,
    budgets: list[int],
    seed: int,
    phase: int,
) -> np.ndarray:
    """One whole-dataset weighted draw for a refresh phase.

    Class c draws budget[c] positions on stream (seed, WRE, phase, c);
    the union of the mapped global indices is returned sorted.
    """
    parts = []
    for c in range(distribution.num_classes):
        stream = RngStream(seed, derive_stream(STREAM_WRE, phase, c))
        picks = weighted_sample_without_replacement(distribution.probs[c], budgets[c], stream)
        parts.append(distribution.indices[c][picks])
    return np.sort(np.concatenate(parts)) if parts else np.zeros(0, np.int64)
