"""Model-agnostic curriculum subset selection over per-class similarity kernels.

Pipeline: embeddings -> per-class kernels -> pre-generated easy subsets
(stochastic greedy on graph cut) plus a diversity-weighted sampling
distribution (greedy disparity-min importance through a Taylor softmax)
-> an easy-to-hard epoch schedule persisted in a metadata directory.
"""

from .curriculum import (
    DEFAULT_KAPPA,
    CurriculumConfig,
    CurriculumPlan,
    Provenance,
    build_plan,
    full_schedule,
    subset_for_epoch,
)
from .dataio import (
    DatasetHandle,
    EmbeddingMatrix,
    LabelVector,
    load_embeddings,
    load_labels,
    make_dataset,
    write_embeddings,
    write_labels,
)
from .errors import MiloError
from .exploration import (
    SamplingDistribution,
    SubsetFamily,
    build_sampling_distribution,
    sge_family,
    taylor_softmax,
    weighted_sample_without_replacement,
    wre_draw,
)
from .kernel import (
    ClassPartition,
    KernelScaling,
    MetricConfig,
    SimilarityKernel,
    build_kernel,
    partition_by_class,
)
from .maximizer import (
    GreedyResult,
    brute_force_opt,
    greedy_sample_importance,
    naive_greedy,
    stochastic_greedy,
    stochastic_pool_size,
)
from .rng import RngStream, derive_stream
from .setfuncs import (
    DEFAULT_LAMBDA,
    DISPARITY_MIN,
    DISPARITY_SUM,
    FACILITY_LOCATION,
    GainState,
    SetFunctionKind,
    evaluate,
    graph_cut,
)
from .store import fnv1a64, is_preprocessed, load_metadata, store_metadata

__version__ = "0.1.0"

__all__ = [
    "DEFAULT_KAPPA",
    "DEFAULT_LAMBDA",
    "DISPARITY_MIN",
    "DISPARITY_SUM",
    "FACILITY_LOCATION",
    "ClassPartition",
    "CurriculumConfig",
    "CurriculumPlan",
    "DatasetHandle",
    "EmbeddingMatrix",
    "GainState",
    "GreedyResult",
    "KernelScaling",
    "LabelVector",
    "MetricConfig",
    "MiloError",
    "Provenance",
    "RngStream",
    "SamplingDistribution",
    "SetFunctionKind",
    "SimilarityKernel",
    "SubsetFamily",
    "brute_force_opt",
    "build_kernel",
    "build_plan",
    "build_sampling_distribution",
    "derive_stream",
    "evaluate",
    "fnv1a64",
    "full_schedule",
    "graph_cut",
    "greedy_sample_importance",
    "is_preprocessed",
    "load_embeddings",
    "load_labels",
    "load_metadata",
    "make_dataset",
    "naive_greedy",
    "partition_by_class",
    "sge_family",
    "stochastic_greedy",
    "stochastic_pool_size",
    "store_metadata",
    "subset_for_epoch",
    "taylor_softmax",
    "weighted_sample_without_replacement",
    "wre_draw",
    "write_embeddings",
    "write_labels",
]
