"""On-disk metadata directory: manifest plus binary payload files.

Layout under one directory::

    manifest                  UTF-8 "key = value" lines, [class <id>] sections
    subset_<i>.msub           SGE subset i: magic MSUB, u32 version, u64 count,
                              count ascending u32 LE global indices
    class_<c>.midx            class index list: magic MIDX, same header shape
    class_<c>.mprb            sampling probabilities: magic MPRB, u64 count,
                              count f64 LE values
    class_<c>_gains.mprb      greedy importance gains, same container

The manifest records every hyperparameter, the kernel scaling constants,
and an FNV-1a 64 checksum for each payload file. Writes go through a
temp file and an atomic rename with the manifest renamed last, so a
reader either sees the previous complete store or a detectable error,
never a half-written state. Serialization is canonical: storing the same
plan twice yields byte-identical directories.
"""

from __future__ import annotations

import struct
from pathlib import Path

import numpy as np

from .curriculum import CurriculumConfig, CurriculumPlan, Provenance
from .errors import (
    BadMagic,
    ChecksumMismatch,
    DirectoryNotEmptyWithoutForceFlag,
    InvalidHeader,
    IoError,
    MiloError,
    NotPreprocessed,
    TruncatedFile,
    UnreadableInput,
    UnsupportedVersion,
    VersionUnsupported,
)
from .exploration import SamplingDistribution, SubsetFamily
from .kernel import ClassPartition, KernelScaling, MetricConfig

__all__ = [
    "MANIFEST_NAME",
    "fnv1a64",
    "store_metadata",
    "load_metadata",
    "is_preprocessed",
    "read_subset_file",
    "write_subset_file",
    "encode_subset_record",
]

MANIFEST_NAME = "manifest"
MANIFEST_VERSION = 1
PAYLOAD_VERSION = 1

SUBSET_MAGIC = b"MSUB"
PROBS_MAGIC = b"MPRB"
INDEX_MAGIC = b"MIDX"

_PAYLOAD_HEADER = struct.Struct("<4sIQ")

_FNV_OFFSET = 0xCBF29CE484222325
_FNV_PRIME = 0x100000001B3
_MASK64 = (1 << 64) - 1


def fnv1a64(data: bytes) -> int:
    """FNV-1a 64-bit hash of a byte string."""
    h = _FNV_OFFSET
    for b in data:
        h = ((h ^ b) * _FNV_PRIME) & _MASK64
    return h


def _checksum(data: bytes) -> str:
    return f"fnv1a64:{fnv1a64(data):016x}"


# --- payload containers --------------------------------------------------


def _encode_payload(magic: bytes, values: np.ndarray, dtype: str) -> bytes:
    header = _PAYLOAD_HEADER.pack(magic, PAYLOAD_VERSION, values.size)
    return header + np.ascontiguousarray(values, dtype=dtype).tobytes()


def _decode_payload(path: object, data: bytes, magic: bytes, dtype: str) -> np.ndarray:
    if len(data) < _PAYLOAD_HEADER.size:
        raise TruncatedFile(path, _PAYLOAD_HEADER.size, len(data))
    found, version, count = _PAYLOAD_HEADER.unpack_from(data)
    if found != magic:
        raise BadMagic(path, magic, found)
    if version != PAYLOAD_VERSION:
        raise UnsupportedVersion(path, "version", version, 4)
    width = np.dtype(dtype).itemsize
    expected = _PAYLOAD_HEADER.size + width * count
    if len(data) != expected:
        raise TruncatedFile(path, expected, len(data))
    return np.frombuffer(data, dtype=dtype, offset=_PAYLOAD_HEADER.size).copy()


def encode_subset_record(subset: np.ndarray) -> bytes:
    """Serialize one ascending global-index subset as an MSUB record."""
    s = np.asarray(subset, dtype=np.int64)
    if s.size and (s.min() < 0 or s.max() >= 1 << 32):
        raise InvalidHeader("<subset>", "index", int(s.max()))
    if s.size > 1 and not (np.diff(s) > 0).all():
        raise InvalidHeader("<subset>", "ascending", int(s.size))
    return _encode_payload(SUBSET_MAGIC, s, "<u4")


def _decode_subset_record(path: object, data: bytes) -> np.ndarray:
    values = _decode_payload(path, data, SUBSET_MAGIC, "<u4").astype(np.int64)
    if values.size > 1 and not (np.diff(values) > 0).all():
        raise InvalidHeader(path, "ascending", int(values.size))
    return values


def write_subset_file(path: str | Path, subset: np.ndarray) -> None:
    """Write one subset as a standalone MSUB file."""
    try:
        Path(path).write_bytes(encode_subset_record(subset))
    except OSError as exc:
        raise IoError(f"{path}: {exc.strerror or exc}") from exc


def read_subset_file(path: str | Path) -> np.ndarray:
    """Read a standalone MSUB file."""
    try:
        data = Path(path).read_bytes()
    except OSError as exc:
        raise UnreadableInput(path, exc.strerror or str(exc)) from exc
    return _decode_subset_record(path, data)


# --- manifest -------------------------------------------------------------


def _fmt(value: object) -> str:
    return repr(value) if isinstance(value, float) else str(value)


def _subset_name(i: int) -> str:
    return f"subset_{i:05d}.msub"


def _class_names(c: int) -> tuple[str, str, str]:
    return (
        f"class_{c:05d}.midx",
        f"class_{c:05d}.mprb",
        f"class_{c:05d}_gains.mprb",
    )


def _render_manifest(plan: CurriculumPlan, payloads: dict[str, bytes]) -> str:
    cfg = plan.config
    metric = cfg.metric
    lines = [
        f"format_version = {MANIFEST_VERSION}",
        f"n = {plan.n}",
        f"c = {plan.partition.num_classes}",
        f"k = {cfg.k}",
        f"T = {cfg.T}",
        f"R = {cfg.R}",
        f"kappa = {_fmt(cfg.kappa)}",
        f"lambda = {_fmt(cfg.lam)}",
        f"epsilon = {_fmt(cfg.epsilon)}",
        f"seed = {cfg.seed}",
        f"metric = {metric.metric}",
        f"kw = {_fmt(metric.kw)}",
        f"rbf_mean = {'squared' if metric.rbf_mean_squared else 'euclidean'}",
        f"n_sge = {len(plan.family.subsets)}",
    ]
    for i in range(len(plan.family.subsets)):
        name = _subset_name(i)
        lines.append(f"subset_{i}_file = {name}")
        lines.append(f"subset_{i}_checksum = {_checksum(payloads[name])}")
    for c in range(plan.partition.num_classes):
        index_name, probs_name, gains_name = _class_names(c)
        lines.append(f"[class {c}]")
        lines.append(f"size = {plan.partition.sizes[c]}")
        lines.append(f"budget = {plan.partition.budgets[c]}")
        lines.append(f"index_file = {index_name}")
        lines.append(f"index_checksum = {_checksum(payloads[index_name])}")
        lines.append(f"probs_file = {probs_name}")
        lines.append(f"probs_checksum = {_checksum(payloads[probs_name])}")
        lines.append(f"gains_file = {gains_name}")
        lines.append(f"gains_checksum = {_checksum(payloads[gains_name])}")
        scaling = plan.provenance.scaling[c]
        if scaling.mean_dist is not None:
            lines.append(f"mean_dist = {_fmt(scaling.mean_dist)}")
        if scaling.dot_min is not None:
            lines.append(f"dot_min = {_fmt(scaling.dot_min)}")
            lines.append(f"dot_max = {_fmt(scaling.dot_max)}")
    return "\n".join(lines) + "\n"


def _parse_manifest(path: object, text: str) -> tuple[dict[str, str], dict[int, dict[str, str]]]:
    top: dict[str, str] = {}
    classes: dict[int, dict[str, str]] = {}
    current = top
    for raw in text.splitlines():
        line = raw.strip()
        if not line:
            continue
        if line.startswith("[") and line.endswith("]"):
            fields = line[1:-1].split()
            if len(fields) != 2 or fields[0] != "class" or not fields[1].isdigit():
                raise NotPreprocessed(path, f"bad section header {line!r}")
            current = classes.setdefault(int(fields[1]), {})
            continue
        key, sep, value = line.partition("=")
        if not sep:
            raise NotPreprocessed(path, f"bad manifest line {line!r}")
        current[key.strip()] = value.strip()
    return top, classes


def _take(path: object, table: dict[str, str], key: str, convert):
    if key not in table:
        raise NotPreprocessed(path, f"manifest missing key {key!r}")
    try:
        return convert(table[key])
    except ValueError:
        raise NotPreprocessed(path, f"manifest key {key!r} holds {table[key]!r}") from None


# --- store / load ---------------------------------------------------------


def _plan_payloads(plan: CurriculumPlan) -> dict[str, bytes]:
    payloads: dict[str, bytes] = {}
    for i, subset in enumerate(plan.family.subsets):
        payloads[_subset_name(i)] = encode_subset_record(subset)
    for c in range(plan.partition.num_classes):
        index_name, probs_name, gains_name = _class_names(c)
        class_indices = plan.partition.indices[c]
        if class_indices.size and (class_indices.min() < 0 or class_indices.max() >= 1 << 32):
            raise InvalidHeader("<partition>", "index", int(class_indices.max()))
        payloads[index_name] = _encode_payload(INDEX_MAGIC, class_indices, "<u4")
        payloads[probs_name] = _encode_payload(PROBS_MAGIC, plan.distribution.probs[c], "<f8")
        payloads[gains_name] = _encode_payload(PROBS_MAGIC, plan.distribution.gains[c], "<f8")
    return payloads


def _atomic_write(target: Path, data: bytes) -> None:
    tmp = target.with_name(target.name + ".tmp")
    tmp.write_bytes(data)
    tmp.replace(target)


def store_metadata(directory: str | Path, plan: CurriculumPlan, force: bool = False) -> Path:
    """Persist a plan; the manifest rename is the commit point."""
    dirp = Path(directory)
    if dirp.exists() and any(dirp.iterdir()) and not force:
        raise DirectoryNotEmptyWithoutForceFlag(dirp)
    payloads = _plan_payloads(plan)
    manifest = _render_manifest(plan, payloads).encode("utf-8")
    keep = set(payloads) | {MANIFEST_NAME}
    try:
        dirp.mkdir(parents=True, exist_ok=True)
        for name, data in payloads.items():
            _atomic_write(dirp / name, data)
        _atomic_write(dirp / MANIFEST_NAME, manifest)
        for child in dirp.iterdir():
            if child.name not in keep:
                child.unlink()
    except OSError as exc:
        raise IoError(f"{dirp}: {exc.strerror or exc}") from exc
    return dirp


def _verify_directory(directory: str | Path) -> tuple[
    Path, dict[str, str], dict[int, dict[str, str]], dict[str, bytes]
]:
    """Parse the manifest and return checksum-verified payload bytes."""
    dirp = Path(directory)
    manifest_path = dirp / MANIFEST_NAME
    if not manifest_path.is_file():
        raise NotPreprocessed(dirp, "missing manifest")
    try:
        text = manifest_path.read_text("utf-8")
    except (OSError, UnicodeDecodeError) as exc:
        raise NotPreprocessed(dirp, f"unreadable manifest: {exc}") from exc
    top, classes = _parse_manifest(dirp, text)
    version = _take(dirp, top, "format_version", int)
    if version != MANIFEST_VERSION:
        raise VersionUnsupported(dirp, version)

    n_sge = _take(dirp, top, "n_sge", int)
    c = _take(dirp, top, "c", int)
    refs: list[tuple[str, str]] = []
    for i in range(n_sge):
        refs.append(
            (_take(dirp, top, f"subset_{i}_file", str), _take(dirp, top, f"subset_{i}_checksum", str))
        )
    for cid in range(c):
        if cid not in classes:
            raise NotPreprocessed(dirp, f"manifest missing [class {cid}]")
        section = classes[cid]
        for file_key, sum_key in (
            ("index_file", "index_checksum"),
            ("probs_file", "probs_checksum"),
            ("gains_file", "gains_checksum"),
        ):
            refs.append((_take(dirp, section, file_key, str), _take(dirp, section, sum_key, str)))

    blobs: dict[str, bytes] = {}
    for name, expected in refs:
        payload_path = dirp / name
        if not payload_path.is_file():
            raise NotPreprocessed(dirp, f"missing payload {name}")
        try:
            data = payload_path.read_bytes()
        except OSError as exc:
            raise NotPreprocessed(dirp, f"unreadable payload {name}: {exc}") from exc
        actual = _checksum(data)
        if actual != expected:
            raise ChecksumMismatch(payload_path, expected, actual)
        blobs[name] = data
    return dirp, top, classes, blobs


def is_preprocessed(directory: str | Path) -> bool:
    """True iff the manifest exists, parses, and all checksums validate."""
    try:
        _verify_directory(directory)
    except MiloError:
        return False
    return True


def load_metadata(directory: str | Path) -> CurriculumPlan:
    """Reconstruct the plan persisted in a metadata directory."""
    dirp, top, classes, blobs = _verify_directory(directory)

    metric_name = _take(dirp, top, "metric", str)
    rbf_mean = _take(dirp, top, "rbf_mean", str)
    if rbf_mean not in ("squared", "euclidean"):
        raise NotPreprocessed(dirp, f"bad rbf_mean {rbf_mean!r}")
    try:
        metric = MetricConfig(
            metric=metric_name,
            kw=_take(dirp, top, "kw", float),
            rbf_mean_squared=rbf_mean == "squared",
        )
        config = CurriculumConfig(
            k=_take(dirp, top, "k", int),
            T=_take(dirp, top, "T", int),
            R=_take(dirp, top, "R", int),
            kappa=_take(dirp, top, "kappa", float),
            lam=_take(dirp, top, "lambda", float),
            epsilon=_take(dirp, top, "epsilon", float),
            seed=_take(dirp, top, "seed", int),
            metric=metric,
        )
    except MiloError as exc:
        if isinstance(exc, NotPreprocessed):
            raise
        raise NotPreprocessed(dirp, f"invalid configuration: {exc}") from exc

    n = _take(dirp, top, "n", int)
    c = _take(dirp, top, "c", int)
    n_sge = _take(dirp, top, "n_sge", int)
    if n_sge != config.n_sge:
        raise NotPreprocessed(dirp, f"n_sge {n_sge} inconsistent with config {config.n_sge}")

    def parse(name: str, magic: bytes, dtype: str) -> np.ndarray:
        try:
            return _decode_payload(dirp / name, blobs[name], magic, dtype)
        except UnsupportedVersion as exc:
            raise VersionUnsupported(dirp / name, exc.found) from exc
        except MiloError as exc:
            raise NotPreprocessed(dirp, f"bad payload {name}: {exc}") from exc

    indices: list[np.ndarray] = []
    budgets: list[int] = []
    probs: list[np.ndarray] = []
    gains: list[np.ndarray] = []
    scaling: list[KernelScaling] = []
    for cid in range(c):
        section = classes[cid]
        size = _take(dirp, section, "size", int)
        budgets.append(_take(dirp, section, "budget", int))
        class_indices = parse(section["index_file"], INDEX_MAGIC, "<u4").astype(np.int64)
        class_probs = parse(section["probs_file"], PROBS_MAGIC, "<f8")
        class_gains = parse(section["gains_file"], PROBS_MAGIC, "<f8")
        if not (size == class_indices.size == class_probs.size == class_gains.size):
            raise NotPreprocessed(dirp, f"class {cid} sizes disagree")
        if class_probs.size and (
            class_probs.min() <= 0.0 or abs(class_probs.sum() - 1.0) > 1e-9
        ):
            raise NotPreprocessed(dirp, f"class {cid} probabilities are not a distribution")
        indices.append(class_indices)
        probs.append(class_probs)
        gains.append(class_gains)
        if "mean_dist" in section:
            scaling.append(KernelScaling(mean_dist=_take(dirp, section, "mean_dist", float)))
        elif "dot_min" in section:
            scaling.append(
                KernelScaling(
                    dot_min=_take(dirp, section, "dot_min", float),
                    dot_max=_take(dirp, section, "dot_max", float),
                )
            )
        else:
            scaling.append(KernelScaling())

    try:
        partition = ClassPartition(indices, budgets)
    except MiloError as exc:
        raise NotPreprocessed(dirp, f"invalid partition: {exc}") from exc
    if partition.n != n or partition.k != config.k:
        raise NotPreprocessed(dirp, "partition totals disagree with manifest")

    class_of = np.empty(n, dtype=np.int64)
    for cid, ix in enumerate(indices):
        class_of[ix] = cid
    subsets: list[np.ndarray] = []
    for i in range(n_sge):
        name = _take(dirp, top, f"subset_{i}_file", str)
        try:
            subset = _decode_subset_record(dirp / name, blobs[name])
        except UnsupportedVersion as exc:
            raise VersionUnsupported(dirp / name, exc.found) from exc
        except MiloError as exc:
            raise NotPreprocessed(dirp, f"bad payload {name}: {exc}") from exc
        if subset.size != config.k or (subset.size and subset.max() >= n):
            raise NotPreprocessed(dirp, f"subset {i} does not match budget k")
        composition = np.bincount(class_of[subset], minlength=c)
        if composition.tolist() != budgets:
            raise NotPreprocessed(dirp, f"subset {i} does not match class budgets")
        subsets.append(subset)

    family = SubsetFamily(subsets, config.epsilon, config.seed)
    distribution = SamplingDistribution([ix.copy() for ix in indices], probs, gains)
    provenance = Provenance(
        format_version=MANIFEST_VERSION,
        scaling=scaling,
        peak_kernel_entries=max(size * size for size in partition.sizes),
    )
    return CurriculumPlan(config, n, partition, family, distribution, provenance)
