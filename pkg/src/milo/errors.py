"""Exception types shared across the package.

Every error carries the fields needed to pinpoint the failure (paths,
offsets, ids) plus the process exit code the command-line front end maps
it to: 2 for validation problems, 3 for I/O problems, 4 for an oracle
instance over the enumeration cap.
"""

from __future__ import annotations

__all__ = [
    "MiloError",
    "BadMagic",
    "UnsupportedVersion",
    "InvalidHeader",
    "UnreadableInput",
    "TruncatedFile",
    "NonFiniteValue",
    "NonDenseClassIds",
    "LengthMismatch",
    "ZeroNormEmbedding",
    "EmptyIndexList",
    "BudgetExceedsDataset",
    "IndexOutOfRange",
    "AlreadySelected",
    "BudgetTooLarge",
    "InvalidEpsilon",
    "InstanceTooLarge",
    "EmptyInput",
    "NonFiniteGain",
    "EpochOutOfRange",
    "NotPreprocessed",
    "ChecksumMismatch",
    "VersionUnsupported",
    "DirectoryNotEmptyWithoutForceFlag",
    "IoError",
]


class MiloError(Exception):
    """Base class for every error raised by this package."""

    exit_code = 2


class BadMagic(MiloError):
    """File does not start with the expected magic bytes."""

    def __init__(self, path: object, expected: bytes, found: bytes, offset: int = 0):
        super().__init__(
            f"{path}: expected magic {expected!r} at offset {offset}, found {found!r}"
        )
        self.path = path
        self.expected = expected
        self.found = found
        self.offset = offset


class UnsupportedVersion(MiloError):
    """File header declares a version or dtype this build cannot read."""

    def __init__(self, path: object, field: str, found: int, offset: int):
        super().__init__(f"{path}: unsupported {field} {found} at offset {offset}")
        self.path = path
        self.field = field
        self.found = found
        self.offset = offset


class InvalidHeader(MiloError):
    """Header field holds a value outside its documented range."""

    def __init__(self, path: object, field: str, found: int):
        super().__init__(f"{path}: invalid header field {field} = {found}")
        self.path = path
        self.field = field
        self.found = found


class UnreadableInput(MiloError):
    """An input file is missing or cannot be read."""

    def __init__(self, path: object, reason: str):
        super().__init__(f"{path}: {reason}")
        self.path = path
        self.reason = reason


class TruncatedFile(MiloError):
    """File length does not match the length implied by its header."""

    def __init__(self, path: object, expected: int, actual: int):
        super().__init__(f"{path}: expected {expected} bytes, file holds {actual}")
        self.path = path
        self.expected = expected
        self.actual = actual


class NonFiniteValue(MiloError):
    """Payload holds a NaN or infinity."""

    def __init__(self, path: object, row: int, col: int, offset: int):
        super().__init__(
            f"{path}: non-finite value at row {row}, column {col} (byte offset {offset})"
        )
        self.path = path
        self.row = row
        self.col = col
        self.offset = offset


class NonDenseClassIds(MiloError):
    """Class ids skip a value in [0, max_id]."""

    def __init__(self, missing: int, num_classes: int):
        super().__init__(f"class id {missing} has no samples (ids must cover 0..{num_classes - 1})")
        self.missing = missing
        self.num_classes = num_classes


class LengthMismatch(MiloError):
    """Embedding row count and label count disagree."""

    def __init__(self, n_embeddings: int, n_labels: int):
        super().__init__(f"{n_embeddings} embedding rows but {n_labels} labels")
        self.n_embeddings = n_embeddings
        self.n_labels = n_labels


class ZeroNormEmbedding(MiloError):
    """Cosine similarity is undefined for an all-zero row."""

    def __init__(self, row: int):
        super().__init__(f"embedding row {row} has zero norm")
        self.row = row


class EmptyIndexList(MiloError):
    """A kernel cannot be built over zero rows."""

    def __init__(self) -> None:
        super().__init__("index list is empty")


class BudgetExceedsDataset(MiloError):
    """Requested subset size is negative or larger than the dataset."""

    def __init__(self, k: int, n: int):
        super().__init__(f"budget k={k} outside [0, n={n}]")
        self.k = k
        self.n = n


class IndexOutOfRange(MiloError):
    """Local index falls outside [0, m_c)."""

    def __init__(self, index: int, size: int):
        super().__init__(f"index {index} outside [0, {size})")
        self.index = index
        self.size = size


class AlreadySelected(MiloError):
    """Element was committed to the selection earlier."""

    def __init__(self, index: int):
        super().__init__(f"element {index} already selected")
        self.index = index


class BudgetTooLarge(MiloError):
    """Greedy budget exceeds the class size."""

    def __init__(self, k: int, size: int):
        super().__init__(f"budget k={k} exceeds ground set size {size}")
        self.k = k
        self.size = size


class InvalidEpsilon(MiloError):
    """Stochastic greedy requires 0 < epsilon < 1."""

    def __init__(self, epsilon: float):
        super().__init__(f"epsilon {epsilon} outside (0, 1)")
        self.epsilon = epsilon


class InstanceTooLarge(MiloError):
    """Exhaustive enumeration would exceed the subset cap."""

    exit_code = 4

    def __init__(self, combinations: int, cap: int):
        super().__init__(f"C(m, k) = {combinations} exceeds enumeration cap {cap}")
        self.combinations = combinations
        self.cap = cap


class EmptyInput(MiloError):
    """Operation requires at least one element."""

    def __init__(self, what: str = "input"):
        super().__init__(f"{what} is empty")
        self.what = what


class NonFiniteGain(MiloError):
    """Gain vector holds a NaN or infinity."""

    def __init__(self, position: int):
        super().__init__(f"non-finite gain at position {position}")
        self.position = position


class EpochOutOfRange(MiloError, IndexError):
    """Epoch index falls outside [0, T)."""

    def __init__(self, epoch: int, total: int):
        super().__init__(f"epoch {epoch} outside [0, {total})")
        self.epoch = epoch
        self.total = total


class NotPreprocessed(MiloError):
    """Directory does not hold a complete metadata store."""

    def __init__(self, path: object, reason: str):
        super().__init__(f"{path}: not a preprocessed metadata directory ({reason})")
        self.path = path
        self.reason = reason


class ChecksumMismatch(MiloError):
    """Stored checksum does not match the file content."""

    def __init__(self, path: object, expected: str, actual: str):
        super().__init__(f"{path}: checksum {actual} does not match manifest {expected}")
        self.path = path
        self.expected = expected
        self.actual = actual


class VersionUnsupported(MiloError):
    """Metadata directory was written by an unknown format version."""

    def __init__(self, path: object, found: object):
        super().__init__(f"{path}: unsupported metadata format {found!r}")
        self.path = path
        self.found = found


class DirectoryNotEmptyWithoutForceFlag(MiloError):
    """Refusing to overwrite an existing non-empty directory."""

    exit_code = 3

    def __init__(self, path: object):
        super().__init__(f"{path}: directory not empty (pass force to overwrite)")
        self.path = path


class IoError(MiloError):
    """Operating system error while reading or writing."""

    exit_code = 3
