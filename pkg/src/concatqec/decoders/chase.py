"""Test-pattern machinery shared by the list decoders."""
from __future__ import annotations

import math
from dataclasses import dataclass
from typing import Sequence

import numpy as np

from ..codes import LogicalClass, StabilizerCode, logical_class, recovery, syndrome
from ..pauli import PauliOperator
from .softlist import TIE_DECIMALS, SoftList


def select_blocks(gammas: Sequence[float], m: int) -> list[int]:
    """0-based indices of the ``m`` least reliable blocks, ties by smaller index."""
    if m > len(gammas):
        raise ValueError(f"cannot select {m} of {len(gammas)} blocks")
    if m < 0:
        raise ValueError("M must be non-negative")
    ranked = sorted(range(len(gammas)), key=lambda i: (gammas[i], i))
    return ranked[:m]


SCORE_UNIT = 10.0**-TIE_DECIMALS


def tp_count(sizes: Sequence[int], selected: Sequence[int], d: int) -> int:
    """Test patterns over plain top-``d`` lists (no tie widening, no cap)."""
    return math.prod(min(d, sizes[i]) for i in selected)


def generate_test_patterns(
    lists: Sequence[SoftList],
    selected: Sequence[int],
    d: int,
    tp_cap: int | None = None,
    *,
    ties: bool = False,
) -> np.ndarray:
    """Test patterns as an ``(count, blocks)`` array of list positions (0 = most likely).

    Unselected blocks always take position 0.  Each selected block offers its
    top ``min(d, len)`` entries, widened with ``ties`` to the whole tied group
    at the cut.  The pattern budget is the product of the plain top-``d``
    sizes, lowered to ``tp_cap`` if given.  When the offered product fits the
    budget every combination is produced, all-top first.  Otherwise the
    budget's worth of most likely patterns is kept, most likely first.
    """
    selected = list(selected)
    pos = pattern_positions(lists, selected, d, tp_cap, ties=ties)
    out = np.zeros((pos.shape[0], len(lists)), dtype=np.int32)
    out[:, selected] = pos
    return out


def pattern_positions(
    lists: Sequence[SoftList], selected: Sequence[int], d: int, tp_cap: int | None = None, *, ties: bool = False
) -> np.ndarray:
    """Like :func:`generate_test_patterns` but only the selected blocks' columns."""
    if d < 1:
        raise ValueError("D must be >= 1")
    if tp_cap is not None and tp_cap < 1:
        raise ValueError("tp_cap must be >= 1")
    budget = math.prod(min(d, len(lists[b])) for b in selected)
    if tp_cap is not None:
        budget = min(budget, tp_cap)
    dims = [lists[b].head_size(d, ties) for b in selected]
    if math.prod(dims) <= budget:
        if not dims:
            return np.zeros((1, 0), dtype=np.int32)
        return np.indices(dims, dtype=np.int32).reshape(len(dims), -1).T
    return _best_patterns([lists[b].logp[:dim] for b, dim in zip(selected, dims)], budget)


def _best_patterns(logps: Sequence[np.ndarray], budget: int) -> np.ndarray:
    # Exact top-``budget`` of the product, grown one block at a time.  Patterns
    # are ordered by score, then by the gain level of the newest choice, then
    # by prefix rank, then by list position.  For a fixed newest choice this is
    # monotone in the prefix rank, so truncating every prefix product to the
    # budget loses nothing: a pattern whose prefix is outranked ``budget``
    # times is itself outranked ``budget`` times by the same extensions.
    score = np.zeros(1, dtype=np.int64)
    parents, choices = [], []
    for lp in logps:
        g = np.round((lp - lp[0]) / SCORE_UNIT).astype(np.int64)
        starts = np.flatnonzero(np.r_[True, g[1:] != g[:-1]])
        ends = np.r_[starts[1:], len(g)]
        neg = -score  # ascending
        if len(score) * len(g) <= budget:
            cut, need = int(score[-1] + g[-1]) - 1, 0
        else:
            cut = _cut(neg, g[starts], ends - starts, budget)
            need = budget - _count(neg, g[starts], ends - starts, cut + 1)
        par, cho, tie_par, tie_cho = [], [], [], []
        for lo, hi in zip(starts, ends):
            a = int(np.searchsorted(neg, g[lo] - cut, side="left"))
            e = int(np.searchsorted(neg, g[lo] - cut, side="right"))
            par.append(np.repeat(np.arange(a), hi - lo))
            cho.append(np.tile(np.arange(lo, hi), a))
            if e > a and need > 0:
                tie_par.append(np.repeat(np.arange(a, e), hi - lo))
                tie_cho.append(np.tile(np.arange(lo, hi), e - a))
        if need > 0:
            par.append(np.concatenate(tie_par)[:need])
            cho.append(np.concatenate(tie_cho)[:need])
        parent, choice = np.concatenate(par), np.concatenate(cho)
        new = score[parent] + g[choice]
        rank = np.argsort(-new, kind="stable")
        parents.append(parent[rank])
        choices.append(choice[rank])
        score = new[rank]
    out = np.empty((len(score), len(logps)), dtype=np.int32)
    idx = np.arange(len(score))
    for j in range(len(logps) - 1, -1, -1):
        out[:, j] = choices[j][idx]
        idx = parents[j][idx]
    return out


def _count(neg: np.ndarray, levels: np.ndarray, sizes: np.ndarray, t: int) -> int:
    """Pairs with ``score + level >= t`` (``neg`` is the ascending negated score)."""
    return int((np.searchsorted(neg, levels - t, side="right") * sizes).sum())


def _cut(neg: np.ndarray, levels: np.ndarray, sizes: np.ndarray, budget: int) -> int:
    """Largest ``t`` with at least ``budget`` pairs scoring ``>= t``."""
    lo = int(-neg[-1] + levels.min())  # every pair qualifies
    hi = int(-neg[0] + levels.max())
    while lo < hi:
        mid = (lo + hi + 1) // 2
        if _count(neg, levels, sizes, mid) >= budget:
            lo = mid
        else:
            hi = mid - 1
    return lo


def outer_correct(code: StabilizerCode, s_out: int, tp_contribution: PauliOperator) -> PauliOperator:
    """Table correction for the outer syndrome left over after the TP hypothesis."""
    return recovery(code, s_out ^ syndrome(code, tp_contribution))


@dataclass(frozen=True)
class CandidateError:
    """One assembled candidate: a logical class (and optional representative) per inner block."""

    classes: tuple[LogicalClass, ...]
    representatives: tuple[PauliOperator | None, ...]
    logp: float


def column(classes: Sequence[LogicalClass], j: int) -> PauliOperator:
    """Outer-block ``j`` error: logical qubit ``j`` of every inner-block class."""
    x = sum(((c.x >> j) & 1) << i for i, c in enumerate(classes))
    z = sum(((c.z >> j) & 1) << i for i, c in enumerate(classes))
    return PauliOperator(len(classes), x, z)


def assemble_candidate(
    tp: Sequence[LogicalClass],
    outer_corrections: Sequence[PauliOperator],
    block_lists: Sequence[SoftList],
    block_candidates: Sequence[Sequence[tuple[PauliOperator, float]]] | None = None,
    code: StabilizerCode | None = None,
) -> CandidateError | None:
    """Apply the outer corrections to the TP and look each block's class up.

    Returns ``None`` (the null symbol) when some block's required class is not
    in its list.  ``block_candidates`` with ``code`` supply physical
    representatives: the most likely member of the required class.
    """
    required = []
    for i, c in enumerate(tp):
        x, z = c.x, c.z
        for j, corr in enumerate(outer_corrections):
            x ^= ((corr.x >> i) & 1) << j
            z ^= ((corr.z >> i) & 1) << j
        required.append(LogicalClass(c.k, x, z))
    total = 0.0
    for cls, lst in zip(required, block_lists):
        lp = lst.logp_of(cls)
        if lp is None:
            return None
        total += lp
    reps: list[PauliOperator | None] = [None] * len(required)
    if block_candidates is not None:
        if code is None:
            raise ValueError("representatives need the inner code")
        for i, (cls, cands) in enumerate(zip(required, block_candidates)):
            members = [(op, lp) for op, lp in cands if logical_class(code, op) == cls]
            if members:
                reps[i] = max(members, key=lambda m: (m[1], -m[0].x, -m[0].z))[0]
    return CandidateError(tuple(required), tuple(reps), total)
