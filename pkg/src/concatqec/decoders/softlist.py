"""Ordered (logical class, log-probability) lists passed between levels."""
from __future__ import annotations

import math
from dataclasses import dataclass
from functools import cached_property
from typing import Iterator, Sequence

import numpy as np

from ..codes import LogicalClass, StabilizerCode, logical_class
from ..pauli import PauliOperator

# Probabilities equal to this many decimals in log space count as tied.
TIE_DECIMALS = 9


def logsumexp(values) -> float:
    a = np.asarray(values, dtype=np.float64)
    if a.size == 0:
        return -math.inf
    m = a.max()
    if not np.isfinite(m):
        return float(m)
    return float(m + np.log(np.exp(a - m).sum()))


def group_logsumexp(groups: np.ndarray, logp: np.ndarray, count: int) -> np.ndarray:
    """Per-group log-sum-exp; ``np.add.at`` reduces in index order, so results are reproducible."""
    top = np.full(count, -np.inf)
    np.maximum.at(top, groups, logp)
    acc = np.zeros(count)
    np.add.at(acc, groups, np.exp(logp - top[groups]))
    return top + np.log(acc)


def tie_extent(logp: np.ndarray, size: int) -> int:
    """``size`` widened to include every later entry tied with entry ``size - 1``."""
    size = min(size, len(logp))
    if size == 0:
        return 0
    key = np.round(np.asarray(logp, dtype=np.float64), TIE_DECIMALS)
    end = size
    while end < len(key) and key[end] == key[size - 1]:
        end += 1
    return end


def order(codes: Sequence[int], logp: np.ndarray) -> list[int]:
    """Indices sorted by descending probability, ties by ascending class code."""
    key = np.round(np.asarray(logp, dtype=np.float64), TIE_DECIMALS)
    return sorted(range(len(codes)), key=lambda i: (-key[i], codes[i]))


@dataclass(frozen=True, eq=False)
class SoftList:
    """Distinct logical classes of one block, most likely first.

    ``codes`` hold packed classes (``LogicalClass.code``) over ``k`` logical qubits.
    """

    k: int
    codes: tuple[int, ...]
    logp: np.ndarray

    def __post_init__(self):
        if not self.codes:
            raise ValueError("a soft list needs at least one entry")
        if len(self.codes) != len(self.logp):
            raise ValueError("codes and logp lengths differ")
        if len(set(self.codes)) != len(self.codes):
            raise ValueError("soft list classes must be distinct")
        if np.any(np.diff(self.logp) > 10.0**-TIE_DECIMALS):
            raise ValueError("soft list entries must be sorted by descending probability")

    @classmethod
    def from_unsorted(cls, k: int, codes: Sequence[int], logp, *, normalize: bool = True) -> "SoftList":
        logp = np.asarray(logp, dtype=np.float64)
        if normalize:
            logp = logp - logsumexp(logp)
        idx = order(codes, logp)
        return cls(k, tuple(int(codes[i]) for i in idx), logp[idx])

    @classmethod
    def singleton(cls, c: LogicalClass) -> "SoftList":
        return cls(c.k, (c.code,), np.zeros(1))

    def __len__(self) -> int:
        return len(self.codes)

    def __iter__(self) -> Iterator[tuple[LogicalClass, float]]:
        for code, lp in zip(self.codes, self.logp):
            yield LogicalClass.from_code(self.k, code), float(lp)

    def __getitem__(self, i: int) -> tuple[LogicalClass, float]:
        return LogicalClass.from_code(self.k, self.codes[i]), float(self.logp[i])

    @property
    def top(self) -> LogicalClass:
        return LogicalClass.from_code(self.k, self.codes[0])

    def head_size(self, size: int, ties: bool = True) -> int:
        """Entries kept by a size-``size`` list; with ``ties`` a tied group is never split."""
        return tie_extent(self.logp, size) if ties else min(size, len(self))

    def truncate(self, size: int, *, normalize: bool = True) -> "SoftList":
        logp = self.logp[:size]
        if normalize:
            logp = logp - logsumexp(logp)
        return SoftList(self.k, self.codes[:size], logp)

    def logp_of(self, c: LogicalClass) -> float | None:
        try:
            return float(self.logp[self.codes.index(c.code)])
        except ValueError:
            return None

    def probabilities(self) -> dict[LogicalClass, float]:
        return {c: math.exp(lp) for c, lp in self}

    # lookup tables for the vectorised combiner (X-only classes, k <= 64)

    @cached_property
    def keys(self) -> np.ndarray:
        return np.array(self.codes, dtype=np.uint64)

    @cached_property
    def _sorted(self) -> tuple[np.ndarray, np.ndarray]:
        idx = np.argsort(self.keys, kind="stable")
        return self.keys[idx], self.logp[idx]

    def lookup(self, keys: np.ndarray) -> tuple[np.ndarray, np.ndarray]:
        """Vectorised membership: (found mask, logp with -inf where absent)."""
        skeys, slogp = self._sorted
        pos = np.searchsorted(skeys, keys)
        pos = np.minimum(pos, len(skeys) - 1)
        found = skeys[pos] == keys
        return found, np.where(found, slogp[pos], -np.inf)


def class_list(code: StabilizerCode, candidates: Sequence[tuple[PauliOperator, float]]) -> SoftList:
    """Group candidate errors by logical class, summing their probabilities."""
    if not candidates:
        raise ValueError("class_list needs at least one candidate")
    seen = set()
    for op, _ in candidates:
        key = (op.x, op.z)
        if key in seen:
            raise ValueError(f"duplicate candidate {op}")
        seen.add(key)
    codes = [logical_class(code, op).code for op, _ in candidates]
    uniq = sorted(set(codes))
    index = {c: i for i, c in enumerate(uniq)}
    grouped = group_logsumexp(
        np.array([index[c] for c in codes]), np.array([lp for _, lp in candidates], dtype=np.float64), len(uniq)
    )
    return SoftList.from_unsorted(code.k, uniq, grouped)


def class_list_x(xcode, masks: np.ndarray, logp: np.ndarray, s: int) -> SoftList:
    """:func:`class_list` for packed X-error candidates sharing syndrome ``s``."""
    classes = xcode.classes(masks, np.full(masks.shape, s, dtype=np.int64))
    uniq, inverse = np.unique(classes, return_inverse=True)
    grouped = group_logsumexp(inverse.ravel(), logp, len(uniq))
    return SoftList.from_unsorted(xcode.k, [int(c) for c in uniq], grouped)


def reliability(lst: SoftList) -> float:
    """Log-ratio of the two most likely classes; infinite for a singleton list."""
    if len(lst) < 2:
        return math.inf
    return max(0.0, float(lst.logp[0] - lst.logp[1]))
