"""Greedy maximizers and the exhaustive oracle.

naive_greedy scans every unselected element each step; stochastic_greedy
scans a uniformly drawn candidate pool of

    s = min(remaining, max(1, ceil((m_c / k) * ln(1 / eps))))

elements per step, which preserves a 1 - 1/e - eps guarantee in
expectation for monotone submodular objectives. greedy_sample_importance
runs naive greedy to exhaustion and reports each element's marginal gain
at its inclusion step. brute_force_opt enumerates all C(m_c, k) subsets.

Ties always break toward the smaller local index. For disparity_min the
first element is the one with maximum total distance to the rest of the
class (all-zero first-step gains would otherwise always pick index 0);
stochastic greedy applies the same rule within its candidate pool.
"""

from __future__ import annotations

import itertools
import math
from dataclasses import dataclass

import numpy as np

from .errors import BudgetTooLarge, InstanceTooLarge, InvalidEpsilon
from .kernel import SimilarityKernel
from .rng import RngStream
from .setfuncs import GainState, SetFunctionKind, evaluate, _matrix

__all__ = [
    "GreedyResult",
    "ORACLE_CAP",
    "naive_greedy",
    "stochastic_greedy",
    "greedy_sample_importance",
    "brute_force_opt",
    "stochastic_pool_size",
]

ORACLE_CAP = 10**6


@dataclass
class GreedyResult:
    """Selected local indices in inclusion order, their gains, and f(S)."""

    selected: np.ndarray
    gains: np.ndarray
    final_value: float


def stochastic_pool_size(m: int, k: int, epsilon: float) -> int:
    """Per-step candidate pool size before clamping to the remainder."""
    if not 0.0 < epsilon < 1.0:
        raise InvalidEpsilon(epsilon)
    return max(1, math.ceil((m / k) * math.log(1.0 / epsilon)))


def _pick(state: GainState, pool: np.ndarray, dmin_scores: np.ndarray | None) -> tuple[int, float]:
    """Choose the next element from an ascending candidate pool.

    np.argmax keeps the first maximum, so ties land on the smallest
    local index."""
    if state.kind.name == "disparity_min" and not state.selected:
        # Seed rule: maximum total distance to the whole class.
        assert dmin_scores is not None
        return int(pool[np.argmax(dmin_scores[pool])]), 0.0
    gains = state.gains(pool)
    at = int(np.argmax(gains))
    return int(pool[at]), float(gains[at])


def _dmin_seed_scores(state: GainState, kind: SetFunctionKind) -> np.ndarray | None:
    if kind.name != "disparity_min":
        return None
    return (1.0 - state._K).sum(axis=0)


def _run_greedy(
    kind: SetFunctionKind,
    kernel: SimilarityKernel | np.ndarray,
    k: int,
    pool_for_step,
) -> GreedyResult:
    state = GainState(kind, kernel)
    scores = _dmin_seed_scores(state, kind)
    selected = np.empty(k, dtype=np.int64)
    gains = np.empty(k)
    remaining = np.arange(state.size, dtype=np.int64)
    for step in range(k):
        pool = pool_for_step(step, remaining)
        element, gain = _pick(state, pool, scores)
        state.commit(element)
        selected[step] = element
        gains[step] = gain
        remaining = remaining[remaining != element]
    final = evaluate(kind, kernel, selected)
    return GreedyResult(selected, gains, final)


def naive_greedy(
    kind: SetFunctionKind, kernel: SimilarityKernel | np.ndarray, k: int
) -> GreedyResult:
    """Exact greedy: commit the best-gain element among all unselected."""
    m = _matrix(kernel).shape[0]
    if k < 0 or k > m:
        raise BudgetTooLarge(k, m)
    return _run_greedy(kind, kernel, k, lambda step, remaining: remaining)


def stochastic_greedy(
    kind: SetFunctionKind,
    kernel: SimilarityKernel | np.ndarray,
    k: int,
    epsilon: float,
    rng: RngStream,
) -> GreedyResult:
    """Greedy over a random candidate pool per step.

    The pool is drawn uniformly without replacement from the unselected
    elements by a partial Fisher-Yates pass, then sorted so ties break
    toward the smaller index.
    """
    m = _matrix(kernel).shape[0]
    if k < 0 or k > m:
        raise BudgetTooLarge(k, m)
    if not 0.0 < epsilon < 1.0:
        raise InvalidEpsilon(epsilon)
    if k == 0:
        return _run_greedy(kind, kernel, 0, lambda step, remaining: remaining)
    base = stochastic_pool_size(m, k, epsilon)
    gen = rng.generator()

    def pool_for_step(step: int, remaining: np.ndarray) -> np.ndarray:
        size = min(base, remaining.size)
        work = remaining.copy()
        for i in range(size):
            j = int(gen.integers(i, work.size))
            work[i], work[j] = work[j], work[i]
        return np.sort(work[:size])

    return _run_greedy(kind, kernel, k, pool_for_step)


def greedy_sample_importance(
    kind: SetFunctionKind, kernel: SimilarityKernel | np.ndarray
) -> np.ndarray:
    """Marginal gain of every element at its naive-greedy inclusion step.

    Runs greedy to exhaustion; g[e] is indexed by element, not by step.
    """
    m = _matrix(kernel).shape[0]
    result = naive_greedy(kind, kernel, m)
    g = np.empty(m)
    g[result.selected] = result.gains
    return g


def _combo_values(
    kind: SetFunctionKind, K: np.ndarray, combos: np.ndarray
) -> np.ndarray:
    k = combos.shape[1]
    if kind.name == "facility_location":
        return K[:, combos].max(axis=2).sum(axis=0)
    block = K[combos[:, :, None], combos[:, None, :]]
    if kind.name == "graph_cut":
        cover = K.sum(axis=0)[combos].sum(axis=1)
        return cover - kind.lam * block.sum(axis=(1, 2))
    if kind.name == "disparity_sum":
        return (1.0 - block).sum(axis=(1, 2))
    if k < 2:
        return np.zeros(combos.shape[0])
    dist = 1.0 - block
    eye = np.arange(k)
    dist[:, eye, eye] = np.inf
    return dist.min(axis=(1, 2))


def brute_force_opt(
    kind: SetFunctionKind, kernel: SimilarityKernel | np.ndarray, k: int
) -> tuple[tuple[int, ...], float]:
    """Exact optimum over all size-k subsets.

    Ties resolve to the lexicographically smallest subset. Instances with
    C(m, k) beyond ORACLE_CAP are refused.
    """
    K = _matrix(kernel)
    m = K.shape[0]
    if k < 0 or k > m:
        raise BudgetTooLarge(k, m)
    total = math.comb(m, k)
    if total > ORACLE_CAP:
        raise InstanceTooLarge(total, ORACLE_CAP)
    if k == 0:
        return (), 0.0
    best_value = -np.inf
    best: tuple[int, ...] = ()
    # Bound the vectorized workspace to a few million float64 entries.
    chunk = max(1, min(65536, 8_000_000 // max(1, m * k)))
    combo_iter = itertools.combinations(range(m), k)
    while True:
        block = list(itertools.islice(combo_iter, chunk))
        if not block:
            break
        combos = np.asarray(block, dtype=np.int64)
        values = _combo_values(kind, K, combos)
        at = int(np.argmax(values))
        if values[at] > best_value:
            best_value = float(values[at])
            best = tuple(int(x) for x in combos[at])
    return best, float(best_value)
