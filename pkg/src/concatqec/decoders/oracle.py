"""Exact degenerate maximum-likelihood decoding by enumerating every X pattern."""
from __future__ import annotations

from functools import lru_cache

import numpy as np

from ..bits import pack_bits, unpack_bits
from ..codes import LogicalClass, StabilizerCode
from ..concatenation import ConcatenatedCode, SyndromeTree, build_concatenated, extract_batch
from .softlist import SoftList, group_logsumexp

DEFAULT_LIMIT = 1 << 20


class OracleLimitError(ValueError):
    """The code is too large to enumerate."""


def _as_concatenated(target) -> ConcatenatedCode:
    if isinstance(target, ConcatenatedCode):
        return target
    if isinstance(target, StabilizerCode):
        return build_concatenated(target, 1)
    raise TypeError(f"expected a StabilizerCode or ConcatenatedCode, got {type(target).__name__}")


def _tree_key(levels: list[np.ndarray], r: int) -> np.ndarray:
    width = sum(lvl.shape[-1] for lvl in levels) * r
    if width > 63:
        raise OracleLimitError(f"syndrome tree of {width} bits is too wide to index")
    key = np.zeros(levels[0].shape[:-1], dtype=np.int64)
    shift = 0
    for lvl in levels:
        for col in range(lvl.shape[-1]):
            key |= lvl[..., col].astype(np.int64) << shift
            shift += r
    return key


@lru_cache(maxsize=8)
def _table(base: StabilizerCode, levels: int) -> tuple[np.ndarray, np.ndarray, np.ndarray]:
    ccode = build_concatenated(base, levels)
    n = ccode.n_total
    keys, classes = [], []
    step = 1 << 14
    for start in range(0, 1 << n, step):
        masks = np.arange(start, min(start + step, 1 << n), dtype=np.uint64)
        levels, cls_bits = extract_batch(ccode, unpack_bits(masks, n))
        keys.append(_tree_key(levels, ccode.base.r))
        classes.append(pack_bits(cls_bits).astype(np.int64))
    keys = np.concatenate(keys)
    classes = np.concatenate(classes)
    masks = np.arange(1 << n, dtype=np.uint64)
    order = np.argsort(keys, kind="stable")
    return keys[order], classes[order], masks[order]


def brute_force_dqmld(target, syn, prior, *, limit: int = DEFAULT_LIMIT) -> tuple[LogicalClass, SoftList]:
    """Most likely class and the full class distribution given the syndromes.

    ``target`` is a single code (``syn`` an int) or a concatenated code (``syn``
    a :class:`SyndromeTree`); ``prior`` is a bit-flip probability, scalar or per qubit.
    """
    ccode = _as_concatenated(target)
    n = ccode.n_total
    if (1 << n) > limit:
        raise OracleLimitError(f"2^{n} patterns exceed the oracle limit of {limit}")
    if ccode.k_total > 63:
        raise OracleLimitError("too many logical qubits for the packed oracle table")
    if isinstance(syn, SyndromeTree):
        syn.check_shape(ccode)
        levels = [lvl[None, :] for lvl in syn.levels]
    else:
        levels = [np.array([[int(syn)]], dtype=np.int64)]
    key = int(_tree_key(levels, ccode.base.r)[0])
    keys, classes, masks = _table(ccode.base, ccode.levels)
    lo, hi = np.searchsorted(keys, [key, key + 1])
    if lo == hi:
        raise ValueError("no X error produces this syndrome")
    p = np.broadcast_to(np.asarray(prior, dtype=np.float64), (n,))
    if not np.all((p > 0) & (p < 1)):
        raise ValueError("prior probabilities must lie strictly between 0 and 1")
    bits = unpack_bits(masks[lo:hi], n).astype(np.float64)
    logp = bits @ (np.log(p) - np.log1p(-p)) + np.log1p(-p).sum()
    uniq, inverse = np.unique(classes[lo:hi], return_inverse=True)
    dist = SoftList.from_unsorted(ccode.k_total, [int(c) for c in uniq], group_logsumexp(inverse.ravel(), logp, len(uniq)))
    return dist.top, dist
