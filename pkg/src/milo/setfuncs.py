"""Submodular and diversity set functions over a similarity kernel.

With D the class ground set, S the selected subset and s the kernel:

    facility_location  f(S) = sum_{i in D} max_{j in S} s_ij
    graph_cut          f(S) = sum_{i in D} sum_{j in S} s_ij
                              - lam * sum_{i in S} sum_{j in S} s_ij
    disparity_sum      f(S) = sum_{i in S} sum_{j in S} (1 - s_ij)
    disparity_min      f(S) = min_{i,j in S, i != j} (1 - s_ij)

Conventions: f(empty) = 0 everywhere, and disparity_min of a singleton
is 0. Facility location and graph cut (lam <= 0.5 on a non-negative
kernel) are monotone submodular; the disparity functions are diversity
objectives, not submodular ones.

GainState carries the memoized quantities that make one marginal-gain
query O(m_c): the per-element row maxima for facility location, kernel
column sums plus selected-column sums for graph cut and disparity sum,
and per-element minimum selected distance for disparity min. Kernel
values stay float32; every accumulation runs in float64.
"""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np

from .errors import AlreadySelected, IndexOutOfRange, InvalidHeader
from .kernel import SimilarityKernel

__all__ = [
    "SetFunctionKind",
    "FACILITY_LOCATION",
    "DISPARITY_SUM",
    "DISPARITY_MIN",
    "DEFAULT_LAMBDA",
    "graph_cut",
    "evaluate",
    "GainState",
]

DEFAULT_LAMBDA = 0.4

_KINDS = ("facility_location", "graph_cut", "disparity_sum", "disparity_min")


@dataclass(frozen=True)
class SetFunctionKind:
    """Set function selector; lam only applies to graph_cut."""

    name: str
    lam: float = DEFAULT_LAMBDA

    def __post_init__(self) -> None:
        if self.name not in _KINDS:
            raise InvalidHeader("<config>", "set function", self.name)
        if self.lam < 0:
            raise InvalidHeader("<config>", "lambda", self.lam)


FACILITY_LOCATION = SetFunctionKind("facility_location")
DISPARITY_SUM = SetFunctionKind("disparity_sum")
DISPARITY_MIN = SetFunctionKind("disparity_min")


def graph_cut(lam: float = DEFAULT_LAMBDA) -> SetFunctionKind:
    """Graph-cut objective with redundancy penalty lam."""
    return SetFunctionKind("graph_cut", lam)


def _matrix(kernel: SimilarityKernel | np.ndarray) -> np.ndarray:
    values = kernel.values if isinstance(kernel, SimilarityKernel) else np.asarray(kernel)
    return values.astype(np.float64, copy=False)


def _check_subset(subset: np.ndarray, m: int) -> np.ndarray:
    s = np.asarray(subset, dtype=np.int64).ravel()
    if s.size and (s.min() < 0 or s.max() >= m):
        bad = int(s.min()) if s.min() < 0 else int(s.max())
        raise IndexOutOfRange(bad, m)
    if np.unique(s).size != s.size:
        raise ValueError("subset holds duplicate indices")
    return s


def evaluate(
    kind: SetFunctionKind, kernel: SimilarityKernel | np.ndarray, subset: np.ndarray
) -> float:
    """Evaluate f(S) from scratch."""
    K = _matrix(kernel)
    s = _check_subset(subset, K.shape[0])
    if s.size == 0:
        return 0.0
    if kind.name == "facility_location":
        return float(K[:, s].max(axis=1).sum())
    if kind.name == "graph_cut":
        return float(K[:, s].sum() - kind.lam * K[np.ix_(s, s)].sum())
    if kind.name == "disparity_sum":
        return float((1.0 - K[np.ix_(s, s)]).sum())
    if s.size < 2:
        return 0.0
    block = 1.0 - K[np.ix_(s, s)]
    np.fill_diagonal(block, np.inf)
    return float(block.min())


class GainState:
    """Incremental marginal-gain evaluator for one kernel and kind.

    marginal_gain(e) returns f(S + e) - f(S); commit(e) adds e to S and
    updates the memoized state. Both are O(m_c) or better per call.
    """

    def __init__(self, kind: SetFunctionKind, kernel: SimilarityKernel | np.ndarray):
        self.kind = kind
        self._K = _matrix(kernel)
        m = self._K.shape[0]
        if self._K.ndim != 2 or self._K.shape[1] != m:
            raise InvalidHeader("<kernel>", "shape", self._K.shape[-1])
        self.size = m
        self.selected: list[int] = []
        self._in_set = np.zeros(m, dtype=bool)
        self.value = 0.0
        name = kind.name
        if name == "facility_location":
            self._curmax = np.zeros(m)
        elif name in ("graph_cut", "disparity_sum"):
            self._colsum = self._K.sum(axis=0)
            self._selsum = np.zeros(m)
            self._diag = np.diagonal(self._K).copy()
        else:
            self._mindist = np.full(m, np.inf)
            self._pairmin = np.inf

    def _check(self, elements: np.ndarray) -> np.ndarray:
        e = np.asarray(elements, dtype=np.int64).ravel()
        if e.size and (e.min() < 0 or e.max() >= self.size):
            bad = int(e.min()) if e.min() < 0 else int(e.max())
            raise IndexOutOfRange(bad, self.size)
        taken = self._in_set[e]
        if taken.any():
            raise AlreadySelected(int(e[np.argmax(taken)]))
        return e

    def gains(self, candidates: np.ndarray) -> np.ndarray:
        """Marginal gains for a batch of unselected candidates."""
        cand = self._check(candidates)
        if cand.size == 0:
            return np.zeros(0)
        name = self.kind.name
        count = len(self.selected)
        if name == "facility_location":
            return np.maximum(self._K[:, cand] - self._curmax[:, None], 0.0).sum(axis=0)
        if name == "graph_cut":
            return self._colsum[cand] - self.kind.lam * (
                2.0 * self._selsum[cand] + self._diag[cand]
            )
        if name == "disparity_sum":
            return 2.0 * (count - self._selsum[cand]) + (1.0 - self._diag[cand])
        if count == 0:
            return np.zeros(cand.size)
        if count == 1:
            return self._mindist[cand].copy()
        return np.minimum(self._pairmin, self._mindist[cand]) - self._pairmin

    def marginal_gain(self, element: int) -> float:
        """Marginal gain of one unselected element."""
        return float(self.gains(np.asarray([element]))[0])

    def commit(self, element: int) -> "GainState":
        """Add element to S and fold it into the memoized state."""
        e = int(self._check(np.asarray([element]))[0])
        gain = self.marginal_gain(e)
        name = self.kind.name
        if name == "facility_location":
            np.maximum(self._curmax, self._K[:, e], out=self._curmax)
        elif name in ("graph_cut", "disparity_sum"):
            self._selsum += self._K[:, e]
        else:
            if len(self.selected) >= 1:
                self._pairmin = min(self._pairmin, float(self._mindist[e]))
            np.minimum(self._mindist, 1.0 - self._K[:, e], out=self._mindist)
        self.selected.append(e)
        self._in_set[e] = True
        self.value += gain
        return self
