"""In-process bindings for host training loops.

``preprocess`` turns in-memory arrays plus a flat config mapping into a
persisted metadata directory (skipping recomputation when the directory
already holds a matching plan), and ``MiloSchedule`` serves that
directory as an epoch-indexed sequence of index lists. No selection
logic lives here; the package marshals arrays and paths only.
"""

from __future__ import annotations

import math
import tempfile
from collections.abc import Mapping
from pathlib import Path
from typing import Iterator

import numpy as np

from milo import (
    CurriculumConfig,
    MetricConfig,
    build_plan,
    is_preprocessed,
    load_metadata,
    load_embeddings,
    load_labels,
    make_dataset,
    store_metadata,
    write_embeddings,
    write_labels,
)
from milo import subset_for_epoch as _core_subset_for_epoch
from milo.dataio import EmbeddingMatrix, LabelVector
from milo.errors import InvalidHeader

__all__ = ["MiloSchedule", "preprocess", "subset_for_epoch"]
__version__ = "0.1.0"

_OPTIONAL_KEYS = {
    "r": "R",
    "kappa": "kappa",
    "lambda": "lam",
    "epsilon": "epsilon",
    "seed": "seed",
}


def _config_from_mapping(mapping: dict, n: int) -> CurriculumConfig:
    if ("fraction" in mapping) == ("size" in mapping):
        raise InvalidHeader("<config>", "fraction|size", "exactly one required")
    if "fraction" in mapping:
        fraction = float(mapping.pop("fraction"))
        if not 0.0 < fraction <= 1.0:
            raise InvalidHeader("<config>", "fraction", fraction)
        k = math.floor(fraction * n)
    else:
        k = int(mapping.pop("size"))
    if "epochs" not in mapping:
        raise InvalidHeader("<config>", "epochs", "missing")
    kwargs = {"k": k, "T": int(mapping.pop("epochs"))}
    for key, field in _OPTIONAL_KEYS.items():
        if key in mapping:
            value = mapping.pop(key)
            kwargs[field] = int(value) if field in ("R", "seed") else float(value)
    metric = str(mapping.pop("metric", "cosine"))
    kw = float(mapping.pop("kw", 1.0))
    if mapping:
        raise InvalidHeader("<config>", "unknown keys", ", ".join(sorted(mapping)))
    return CurriculumConfig(metric=MetricConfig(metric, kw), **kwargs)


def preprocess(embeddings: np.ndarray, labels: np.ndarray, config: Mapping) -> Path:
    """Persist a plan for the given arrays; reuse a matching directory.

    ``config`` mirrors the CLI flags: ``out`` (required), exactly one of
    ``fraction``/``size``, ``epochs`` (required), and optionally ``r``,
    ``kappa``, ``lambda``, ``epsilon``, ``seed``, ``metric``, ``kw``,
    ``force``. Returns the metadata directory path. If the directory
    already holds a plan built from the same configuration and dataset
    size, it is returned as-is without recomputation.
    """
    mapping = dict(config)
    if "out" not in mapping:
        raise InvalidHeader("<config>", "out", "missing")
    out = Path(mapping.pop("out"))
    force = bool(mapping.pop("force", False))

    # Round-trip the arrays through the on-disk input formats so the
    # resulting plan is bit-for-bit what the command line would build.
    with tempfile.TemporaryDirectory(prefix="milo-inputs-") as tmp:
        emb_path = Path(tmp) / "embeddings.memb"
        lbl_path = Path(tmp) / "labels.mlbl"
        write_embeddings(emb_path, EmbeddingMatrix(np.asarray(embeddings)))
        write_labels(lbl_path, LabelVector(np.asarray(labels)))
        dataset = make_dataset(load_embeddings(emb_path), load_labels(lbl_path))

    wanted = _config_from_mapping(mapping, dataset.n)
    if is_preprocessed(out):
        existing = load_metadata(out)
        if existing.config == wanted and existing.n == dataset.n:
            return out
        force = True  # stale plan for other settings: rebuild in place

    plan = build_plan(dataset, wanted)
    store_metadata(out, plan, force=force)
    return out


class MiloSchedule:
    """Epoch-indexed view of a metadata directory.

    ``schedule[t]`` is the index list for epoch ``t`` (a range error for
    ``t`` outside ``0..T-1``), ``len`` is the total epoch count, and
    ``next_epoch()`` walks the schedule with an internal counter. The
    directory is read once at construction; instances are safe to use
    concurrently from separate objects but each one belongs to a single
    thread.
    """

    def __init__(self, path: str | Path):
        self.path = Path(path)
        self._plan = load_metadata(self.path)
        self.epoch = 0

    def __len__(self) -> int:
        return self._plan.config.T

    def __getitem__(self, t: int) -> list[int]:
        return [int(i) for i in _core_subset_for_epoch(self._plan, t)]

    def __iter__(self) -> Iterator[list[int]]:
        for t in range(len(self)):
            yield self[t]

    def next_epoch(self) -> list[int]:
        subset = self[self.epoch]
        self.epoch += 1
        return subset


def subset_for_epoch(sampler: MiloSchedule, t: int) -> list[int]:
    """Index list for epoch ``t`` of a bound schedule."""
    return sampler[t]
