"""Easy-to-hard curriculum over pre-generated subsets.

The first floor(kappa * T) epochs replay stochastic-greedy graph-cut
subsets (easy, representative); the rest of the run draws fresh
disparity-min-weighted subsets (hard, diverse) every R epochs. With
sge = floor(kappa * T):

    epoch t <  sge   ->  SGE subset floor(t / R)
    epoch t >= sge   ->  weighted draw for phase floor((t - sge) / R)

so consecutive epochs inside one R-window share a subset and a fresh
draw lands exactly when (t - sge) is a multiple of R. Draws are pure
functions of (distribution, seed, phase): nothing after preprocessing
mutates the plan.
"""

from __future__ import annotations

import math
import os
from concurrent.futures import ThreadPoolExecutor
from dataclasses import dataclass, field

import numpy as np

from .dataio import DatasetHandle
from .errors import BudgetExceedsDataset, EpochOutOfRange, InvalidEpsilon, InvalidHeader
from .exploration import (
    SamplingDistribution,
    SubsetFamily,
    build_sampling_distribution,
    sge_family,
    wre_draw,
)
from .kernel import ClassPartition, KernelScaling, MetricConfig, build_kernel, partition_by_class
from .setfuncs import DEFAULT_LAMBDA, graph_cut

__all__ = [
    "DEFAULT_KAPPA",
    "CurriculumConfig",
    "Provenance",
    "CurriculumPlan",
    "resolve_threads",
    "build_plan",
    "subset_for_epoch",
    "full_schedule",
]

DEFAULT_KAPPA = 1.0 / 6.0
THREADS_ENV = "MILO_THREADS"


@dataclass(frozen=True)
class CurriculumConfig:
    """Hyperparameters of one preprocessing run."""

    k: int
    T: int
    R: int = 1
    kappa: float = DEFAULT_KAPPA
    lam: float = DEFAULT_LAMBDA
    epsilon: float = 0.01
    seed: int = 0
    metric: MetricConfig = MetricConfig("cosine")

    def __post_init__(self) -> None:
        if self.T < 1:
            raise InvalidHeader("<config>", "T", self.T)
        if not 1 <= self.R <= self.T:
            raise InvalidHeader("<config>", "R", self.R)
        if not 0.0 <= self.kappa <= 1.0:
            raise InvalidHeader("<config>", "kappa", self.kappa)
        if self.lam < 0:
            raise InvalidHeader("<config>", "lambda", self.lam)
        if not 0.0 < self.epsilon < 1.0:
            raise InvalidEpsilon(self.epsilon)
        if self.k < 0:
            raise BudgetExceedsDataset(self.k, 0)

    @property
    def sge_epochs(self) -> int:
        return math.floor(self.kappa * self.T)

    @property
    def n_sge(self) -> int:
        return math.ceil(self.sge_epochs / self.R)


@dataclass
class Provenance:
    """Facts needed to audit or reproduce a stored plan."""

    format_version: int = 1
    scaling: list[KernelScaling] = field(default_factory=list)
    peak_kernel_entries: int = 0


@dataclass
class CurriculumPlan:
    """Everything subset_for_epoch needs, independent of the raw data."""

    config: CurriculumConfig
    n: int
    partition: ClassPartition
    family: SubsetFamily
    distribution: SamplingDistribution
    provenance: Provenance

    def __eq__(self, other: object) -> bool:
        if not isinstance(other, CurriculumPlan):
            return NotImplemented
        return (
            self.config == other.config
            and self.n == other.n
            and self.partition == other.partition
            and self.family == other.family
            and self.distribution == other.distribution
            and self.provenance == other.provenance
        )


def resolve_threads(threads: int | None = None) -> int:
    """Worker count: explicit argument, else cpu count capped by MILO_THREADS."""
    if threads is None:
        threads = os.cpu_count() or 1
        cap = os.environ.get(THREADS_ENV)
        if cap is not None:
            try:
                threads = min(threads, max(1, int(cap)))
            except ValueError:
                raise InvalidHeader("<env>", THREADS_ENV, cap) from None
    return max(1, threads)


def build_plan(
    dataset: DatasetHandle, config: CurriculumConfig, threads: int | None = None
) -> CurriculumPlan:
    """Run the full preprocessing pipeline.

    Kernels are built per class (possibly on a thread pool; results are
    identical either way), the SGE family covers the first sge_epochs
    epochs, and the weighted-draw distribution covers the rest.
    """
    if config.k > dataset.n:
        raise BudgetExceedsDataset(config.k, dataset.n)
    partition = partition_by_class(dataset.labels, config.k)
    workers = min(resolve_threads(threads), partition.num_classes)

    def kernel_for(c: int):
        return build_kernel(dataset.embeddings, partition.indices[c], config.metric)

    if workers > 1:
        with ThreadPoolExecutor(max_workers=workers) as pool:
            kernels = list(pool.map(kernel_for, range(partition.num_classes)))
    else:
        kernels = [kernel_for(c) for c in range(partition.num_classes)]

    family = sge_family(
        partition,
        kernels,
        config.k,
        config.n_sge,
        config.epsilon,
        config.seed,
        kind=graph_cut(config.lam),
    )
    distribution = build_sampling_distribution(partition, kernels)
    provenance = Provenance(
        scaling=[kernel.scaling for kernel in kernels],
        peak_kernel_entries=max(size * size for size in partition.sizes),
    )
    return CurriculumPlan(config, dataset.n, partition, family, distribution, provenance)


def subset_for_epoch(plan: CurriculumPlan, epoch: int) -> np.ndarray:
    """Global indices of the subset trained on at the given epoch."""
    cfg = plan.config
    if epoch < 0 or epoch >= cfg.T:
        raise EpochOutOfRange(epoch, cfg.T)
    if epoch < cfg.sge_epochs:
        return plan.family.subsets[epoch // cfg.R].copy()
    phase = (epoch - cfg.sge_epochs) // cfg.R
    return wre_draw(plan.distribution, plan.partition.budgets, cfg.seed, phase)


def full_schedule(plan: CurriculumPlan) -> list[tuple[int, np.ndarray]]:
    """All (epoch, subset) pairs for t = 0 .. T-1."""
    return [(t, subset_for_epoch(plan, t)) for t in range(plan.config.T)]
