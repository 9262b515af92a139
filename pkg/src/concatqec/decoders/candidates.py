"""Per-block candidate errors for the bit-flip channel.

A block's candidate set is every X pattern consistent with its syndrome within
Hamming distance ``w_max`` of the hard decision (or all of them in exhaustive
mode), plus the table leader ``T(s)``.  When the per-qubit priors differ, the
Chase test patterns over the ``flips`` least reliable qubits are added too,
each completed by the table decoder.
"""
from __future__ import annotations

import itertools
import math
from functools import lru_cache

import numpy as np

from ..bits import unpack_bits
from ..codes import StabilizerCode, XCode
from ..pauli import PauliOperator
from .softlist import SoftList, class_list_x, logsumexp

# Log-probabilities are floored here so certain events never produce -inf.
LOG_FLOOR = -700.0
MAX_EXHAUSTIVE_QUBITS = 22


@lru_cache(maxsize=None)
def _patterns_by_syndrome(xcode: XCode, w: int) -> tuple[np.ndarray, np.ndarray]:
    n = xcode.n
    if w >= n:
        if n > MAX_EXHAUSTIVE_QUBITS:
            raise ValueError(f"exhaustive enumeration over {n} qubits is too large")
        masks = np.arange(1 << n, dtype=np.uint64)
    else:
        found = [0]
        for size in range(1, w + 1):
            for support in itertools.combinations(range(n), size):
                found.append(sum(1 << q for q in support))
        masks = np.array(found, dtype=np.uint64)
    syn = xcode.syndromes(masks)
    idx = np.lexsort((masks, syn))
    return masks[idx], syn[idx]


def _coset_patterns(xcode: XCode, w: int, s: int) -> np.ndarray:
    masks, syn = _patterns_by_syndrome(xcode, w)
    lo, hi = np.searchsorted(syn, [s, s + 1])
    return masks[lo:hi]


def log_prior(prior, n: int) -> tuple[np.ndarray, np.ndarray]:
    """(log P(flip), log P(no flip)) per qubit from a scalar or per-qubit probability."""
    p = np.broadcast_to(np.asarray(prior, dtype=np.float64), (n,))
    if not np.all((p > 0) & (p < 1)):
        raise ValueError("prior probabilities must lie strictly between 0 and 1")
    return np.log(p), np.log1p(-p)


def candidate_masks(
    xcode: XCode,
    s: int,
    log_p1: np.ndarray,
    log_p0: np.ndarray,
    *,
    w_max: int,
    exhaustive: bool = False,
    flips: int = 0,
    list_size: int = 2,
) -> tuple[np.ndarray, np.ndarray]:
    """Packed candidate X errors for syndrome ``s`` and their normalised log-probabilities."""
    if not xcode.valid[s]:
        raise ValueError(f"syndrome {s} has no X-type coset leader")
    n = xcode.n
    log_p1 = np.maximum(log_p1, LOG_FLOOR)
    log_p0 = np.maximum(log_p0, LOG_FLOOR)
    llr = log_p0 - log_p1
    weights = np.left_shift(np.uint64(1), np.arange(n, dtype=np.uint64))
    y = np.uint64((weights * (llr < 0)).sum())
    syn_y = int(xcode.syndromes(y))

    parts = [y ^ _coset_patterns(xcode, n if exhaustive else w_max, s ^ syn_y)]
    parts.append(np.array([xcode.leader[s], y ^ xcode.leader[s ^ syn_y]], dtype=np.uint64))
    if flips > 0 and list_size >= 2 and np.ptp(llr) > 0:
        positions = np.argsort(np.abs(llr), kind="stable")[:flips]
        subsets = unpack_bits(np.arange(1 << len(positions), dtype=np.uint64), len(positions))
        f = (subsets.astype(np.uint64) * weights[positions]).sum(axis=1) ^ y
        parts.append(f ^ xcode.leader[s ^ xcode.syndromes(f)])
    masks = np.unique(np.concatenate(parts))

    bits = unpack_bits(masks, n).astype(np.float64)
    logp = bits @ (log_p1 - log_p0) + log_p0.sum()
    return masks, logp - logsumexp(logp)


def _resolve(code: StabilizerCode, w_max: int | None, exhaustive_threshold: int) -> tuple[int, bool]:
    if w_max is None:
        w_max = code.distance_hint if code.distance_hint is not None else 3
    return w_max, code.n <= exhaustive_threshold


def base_candidates(
    code: StabilizerCode,
    s: int,
    prior,
    *,
    w_max: int | None = None,
    exhaustive_threshold: int = 0,
    flips: int = 0,
    list_size: int = 2,
) -> list[tuple[PauliOperator, float]]:
    """Candidate X errors for syndrome ``s``, most likely first (ties by mask)."""
    w, exhaustive = _resolve(code, w_max, exhaustive_threshold)
    if len(code.recovery_table) <= s or s < 0:
        raise ValueError(f"syndrome {s} out of range")
    log_p1, log_p0 = log_prior(prior, code.n)
    masks, logp = candidate_masks(
        code.xcode, s, log_p1, log_p0, w_max=w, exhaustive=exhaustive, flips=flips, list_size=list_size
    )
    idx = np.lexsort((masks, -logp))
    return [(PauliOperator(code.n, int(masks[i])), float(logp[i])) for i in idx]


@lru_cache(maxsize=4096)
def uniform_block(xcode: XCode, s: int, p: float, w_max: int, exhaustive: bool) -> tuple[SoftList, np.ndarray, np.ndarray]:
    """Cached level-1 soft list (and candidates) for a uniform bit-flip prior."""
    n = xcode.n
    log_p1 = np.full(n, math.log(p))
    log_p0 = np.full(n, math.log1p(-p))
    masks, logp = candidate_masks(xcode, s, log_p1, log_p0, w_max=w_max, exhaustive=exhaustive)
    return class_list_x(xcode, masks, logp, s), masks, logp


def level1_lists(code: StabilizerCode, syndromes, prior, cfg) -> list[SoftList]:
    """Soft lists of every level-1 block; ``prior`` is a scalar p or a per-qubit array."""
    w, exhaustive = _resolve(code, cfg.w_max, cfg.exhaustive_threshold)
    xc = code.xcode
    if np.ndim(prior) == 0:
        p = float(prior)
        if not 0 < p < 1:
            raise ValueError("prior probabilities must lie strictly between 0 and 1")
        return [uniform_block(xc, int(s), p, w, exhaustive)[0] for s in syndromes]
    prior = np.asarray(prior, dtype=np.float64).reshape(len(syndromes), code.n)
    out = []
    for s, row in zip(syndromes, prior):
        log_p1, log_p0 = log_prior(row, code.n)
        masks, logp = candidate_masks(xc, int(s), log_p1, log_p0, w_max=w, exhaustive=exhaustive)
        out.append(class_list_x(xc, masks, logp, int(s)))
    return out
