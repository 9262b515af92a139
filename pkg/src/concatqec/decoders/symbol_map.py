"""Symbol-by-symbol MAP decoding.

Every block turns its candidate set into per-logical-qubit flip marginals.
Those marginals are the priors of the positions they feed one level up, and
the top level takes each symbol's more likely value on its own.
"""
from __future__ import annotations

from functools import lru_cache

import numpy as np

from ..bits import unpack_bits
from ..codes import LogicalClass, XCode
from ..concatenation import ConcatenatedCode, SyndromeTree
from .candidates import LOG_FLOOR, _resolve, candidate_masks, log_prior, uniform_block
from .config import DecoderConfig
from .softlist import group_logsumexp


def log_marginals(xcode: XCode, masks: np.ndarray, logp: np.ndarray, s: int) -> tuple[np.ndarray, np.ndarray]:
    """(log P(bit=1), log P(bit=0)) for each of the block's ``k`` logical bits."""
    classes = xcode.classes(masks, np.full(masks.shape, s, dtype=np.int64))
    bits = unpack_bits(classes.astype(np.uint64), xcode.k).astype(np.int64)
    one, zero = np.empty(xcode.k), np.empty(xcode.k)
    for a in range(xcode.k):
        lse = group_logsumexp(bits[:, a], logp, 2)
        zero[a], one[a] = lse
    return np.maximum(one, LOG_FLOOR), np.maximum(zero, LOG_FLOOR)


@lru_cache(maxsize=4096)
def _uniform_marginals(xcode: XCode, s: int, p: float, w_max: int, exhaustive: bool):
    _, masks, logp = uniform_block(xcode, s, p, w_max, exhaustive)
    return log_marginals(xcode, masks, logp, s)


def symbol_marginals(ccode: ConcatenatedCode, tree: SyndromeTree, cfg: DecoderConfig, prior) -> tuple[np.ndarray, np.ndarray]:
    """Top-level (log P(1), log P(0)) per logical qubit, in logical index order."""
    tree.check_shape(ccode)
    base, n, k = ccode.base, ccode.base.n, ccode.base.k
    xc = base.xcode
    w, exhaustive = _resolve(base, cfg.w_max, cfg.exhaustive_threshold)
    syn1 = tree.level(1)
    if np.ndim(prior) == 0:
        pairs = [_uniform_marginals(xc, int(s), float(prior), w, exhaustive) for s in syn1]
    else:
        rows = np.asarray(prior, dtype=np.float64).reshape(len(syn1), n)
        pairs = []
        for s, row in zip(syn1, rows):
            lp1, lp0 = log_prior(row, n)
            masks, logp = candidate_masks(xc, int(s), lp1, lp0, w_max=w, exhaustive=exhaustive)
            pairs.append(log_marginals(xc, masks, logp, int(s)))
    one = np.concatenate([p[0] for p in pairs])
    zero = np.concatenate([p[1] for p in pairs])
    for t in range(2, ccode.levels + 1):
        gather = ccode.gather(t)
        pairs = []
        for s, idx in zip(tree.level(t), gather):
            masks, logp = candidate_masks(
                xc,
                int(s),
                one[idx],
                zero[idx],
                w_max=w,
                exhaustive=exhaustive,
                flips=cfg.flips,
                list_size=cfg.list_size,
            )
            pairs.append(log_marginals(xc, masks, logp, int(s)))
        one = np.concatenate([p[0] for p in pairs])
        zero = np.concatenate([p[1] for p in pairs])
    return one, zero


def symbol_map_decode(
    ccode: ConcatenatedCode, tree: SyndromeTree, cfg: DecoderConfig, prior
) -> tuple[LogicalClass, np.ndarray]:
    """Per-symbol estimate and the flip marginal ``P(bit = 1)`` of every logical qubit."""
    one, zero = symbol_marginals(ccode, tree, cfg, prior)
    x = 0
    for i, flip in enumerate(one > zero):
        if flip:
            x |= 1 << i
    marg = np.exp(one) / (np.exp(one) + np.exp(zero))
    return LogicalClass(ccode.k_total, x), marg
