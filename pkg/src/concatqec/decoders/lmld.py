"""Level-by-level maximum-likelihood decoding with Chase test patterns (LMLD-CA).

Each level combines the soft lists of its ``n`` inner blocks: the least
reliable blocks are perturbed over their top ``D`` classes, the outer table
decoder completes every test pattern, candidates whose required inner class is
missing from a list are dropped, and the survivors are summed per logical class.
"""
from __future__ import annotations

from dataclasses import dataclass
from functools import lru_cache

import numpy as np

from ..bits import unpack_bits
from ..codes import LogicalClass, XCode
from ..concatenation import ConcatenatedCode, SyndromeTree, join_classes
from .candidates import level1_lists
from .chase import pattern_positions, select_blocks
from .config import DecoderConfig
from .hdd import hdd_block_classes
from .softlist import TIE_DECIMALS, SoftList, group_logsumexp, logsumexp, reliability, tie_extent

CHUNK = 1 << 16
_HASH_MULT = np.random.default_rng(0x5EED).integers(1, 1 << 63, size=64, dtype=np.uint64) | np.uint64(1)


def unique_rows(rows: np.ndarray) -> tuple[np.ndarray, np.ndarray]:
    """Exact ``(first index, inverse)`` of the distinct rows of a 2-D uint64 array.

    Rows are hashed to one word, and the hash grouping is checked against the
    rows themselves; a collision falls back to a full row sort.
    """
    rows = np.ascontiguousarray(rows, dtype=np.uint64)
    if rows.shape[1] == 1:
        _, first, inv = np.unique(rows[:, 0], return_index=True, return_inverse=True)
        return first, inv.ravel()
    mult = _HASH_MULT[np.arange(rows.shape[1]) % len(_HASH_MULT)]
    h = rows[:, 0].copy()
    for b in range(1, rows.shape[1]):
        h = (h * mult[b]) ^ rows[:, b] ^ (h >> np.uint64(29))
    _, first, inv = np.unique(h, return_index=True, return_inverse=True)
    inv = inv.ravel()
    if np.array_equal(rows, rows[first[inv]]):
        return first, inv
    _, first, inv = np.unique(rows, axis=0, return_index=True, return_inverse=True)
    return first, inv.ravel()


@dataclass(frozen=True)
class _Tables:
    """Outer-code tables used by :func:`combine_level`."""

    qubit_syn: np.ndarray  # (n,) syndrome of an X on each qubit
    qubit_cls: np.ndarray  # (n,) class of an X on each qubit
    leader_pos: np.ndarray  # (2^r, w) support of each coset leader, padded with n
    leader_cls: np.ndarray  # (2^r,) class of each coset leader


@lru_cache(maxsize=None)
def _tables(xcode: XCode) -> _Tables:
    n = xcode.n
    singles = np.left_shift(np.uint64(1), np.arange(n, dtype=np.uint64))
    bits = unpack_bits(xcode.leader, n)
    width = max(1, int(bits.sum(axis=1).max()))
    pos = np.full((len(bits), width), n, dtype=np.int64)
    for s, row in enumerate(bits):
        support = np.flatnonzero(row)
        pos[s, : len(support)] = support
    return _Tables(
        qubit_syn=xcode.syndromes(singles),
        qubit_cls=xcode.classes_of_residual(singles),
        leader_pos=pos,
        leader_cls=xcode.classes_of_residual(xcode.leader),
    )


class _Packer:
    """Packs ``K`` small fields of ``stride`` bits into as few uint64 words as needed."""

    def __init__(self, kk: int, stride: int):
        self.kk, self.stride = kk, max(stride, 1)
        self.per = 64 // self.stride
        self.words = -(-kk // self.per)
        self.mask = np.uint64((1 << self.stride) - 1)

    def where(self, m: int) -> tuple[int, np.uint64]:
        return m // self.per, np.uint64((m % self.per) * self.stride)

    def spread(self, keys: np.ndarray, value: int) -> np.ndarray:
        """Word form of ``value`` placed at every field whose bit is set in ``keys``."""
        bits = unpack_bits(keys, self.kk).astype(np.uint64) * np.uint64(value)
        out = np.zeros((len(keys), self.words), dtype=np.uint64)
        for m in range(self.kk):
            w, sh = self.where(m)
            out[:, w] |= bits[:, m] << sh
        return out

    def pack(self, fields: np.ndarray) -> np.ndarray:
        out = np.zeros(self.words, dtype=np.uint64)
        for m, v in enumerate(np.asarray(fields, dtype=np.uint64)):
            w, sh = self.where(m)
            out[w] |= v << sh
        return out

    def field(self, words: np.ndarray, m: int) -> np.ndarray:
        w, sh = self.where(m)
        return ((words[..., w] >> sh) & self.mask).astype(np.int64)

    def unpack(self, words: np.ndarray) -> np.ndarray:
        return np.stack([self.field(words, m) for m in range(self.kk)], axis=-1)


def combine_level(
    xcode: XCode, children: list[SoftList], s_out: np.ndarray, cfg: DecoderConfig
) -> tuple[np.ndarray, np.ndarray] | None:
    """Soft combination of ``n`` inner-block lists under ``K`` outer syndromes.

    Returns ``(rows, logp)``: one row of ``K`` per-outer-block classes for each
    surviving logical class, most likely first, normalised.  ``None`` means every
    candidate hit the null symbol.

    Outer syndromes and classes are XOR-linear in the chosen inner classes, so
    each (block, list entry) contributes one precomputed packed term.
    """
    n, kk = len(children), len(s_out)
    if n != xcode.n:
        raise ValueError(f"expected {xcode.n} inner blocks, got {n}")
    if kk > 64:
        raise ValueError(f"inner blocks with {kk} logical qubits are beyond the packed-word limit")
    tab = _tables(xcode)
    syn_pack, cls_pack = _Packer(kk, xcode.r), _Packer(kk, xcode.k)
    s_out = np.asarray(s_out, dtype=np.int64)
    selected = select_blocks([reliability(c) for c in children], min(cfg.flips, n))
    tps = pattern_positions(children, selected, cfg.list_size, cfg.tp_cap, ties=cfg.ties)

    syn_base = syn_pack.pack(s_out)
    cls_base = cls_pack.pack(tab.leader_cls[s_out])
    for b, c in enumerate(children):
        syn_base ^= syn_pack.spread(c.keys[:1], tab.qubit_syn[b])[0]
        cls_base ^= cls_pack.spread(c.keys[:1], tab.qubit_cls[b])[0]
    syn_delta, cls_delta = [], []
    for b in selected:
        keys = children[b].keys
        syn_t = syn_pack.spread(keys, tab.qubit_syn[b])
        cls_t = cls_pack.spread(keys, tab.qubit_cls[b])
        syn_delta.append(syn_t ^ syn_t[0])
        cls_delta.append(cls_t ^ cls_t[0])
    key_base = np.array([c.keys[0] for c in children], dtype=np.uint64)

    req_parts, cls_parts, lp_parts = [], [], []
    for start in range(0, len(tps), CHUNK):
        pos = tps[start : start + CHUNK]
        size = len(pos)
        sigma = np.tile(syn_base, (size, 1))
        for j in range(len(selected)):
            sigma ^= syn_delta[j][pos[:, j]]
        sig = [syn_pack.field(sigma, m) for m in range(kk)]
        # required class of block b: chosen class with bit m flipped where the
        # outer leader of block m covers position b (row n absorbs padding)
        req = np.tile(key_base[:, None], (1, size))
        req = np.concatenate([req, np.zeros((1, size), dtype=np.uint64)])
        for j, b in enumerate(selected):
            req[b] = children[b].keys[pos[:, j]]
        cols = np.arange(size)
        for m in range(kk):
            bit = np.uint64(1) << np.uint64(m)
            for q in tab.leader_pos[sig[m]].T:
                req[q, cols] ^= bit
        alive = cols
        total = np.zeros(size)
        for b in range(n):
            found, lp = children[b].lookup(req[b, alive])
            alive, total = alive[found], total[found] + lp[found]
            if not len(alive):
                break
        if not len(alive):
            continue
        cls = np.tile(cls_base, (len(alive), 1))
        for j in range(len(selected)):
            cls ^= cls_delta[j][pos[alive, j]]
        for m in range(kk):
            w, sh = cls_pack.where(m)
            cls[:, w] ^= tab.leader_cls[sig[m][alive]].astype(np.uint64) << sh
        req_parts.append(req[:n, alive].T)
        cls_parts.append(cls)
        lp_parts.append(total)
    if not req_parts:
        return None

    first, _ = unique_rows(np.concatenate(req_parts))
    first.sort()
    cls = np.concatenate(cls_parts)[first]
    lp = np.concatenate(lp_parts)[first]

    gfirst, inverse = unique_rows(cls)
    groups = cls[gfirst]
    glp = group_logsumexp(inverse, lp, len(groups))
    glp -= logsumexp(glp)
    # ties broken by packed class code, outer block K-1 most significant
    order = np.lexsort(tuple(groups[:, w] for w in range(cls_pack.words)) + (-np.round(glp, TIE_DECIMALS),))
    return cls_pack.unpack(groups[order]), glp[order]


def _kept(logp: np.ndarray, cfg: DecoderConfig) -> int:
    return tie_extent(logp, cfg.list_size) if cfg.ties else min(cfg.list_size, len(logp))


def rows_to_codes(rows: np.ndarray, k: int) -> list[int]:
    out = []
    for row in rows:
        code = 0
        for m, c in enumerate(row.tolist()):
            code |= c << (m * k)
        out.append(code)
    return out


def lmld_ca_decode(
    ccode: ConcatenatedCode, tree: SyndromeTree, cfg: DecoderConfig, prior, *, full_output: bool = False
) -> tuple[LogicalClass, SoftList]:
    """Estimate and soft output (top ``D`` classes, widened over ties, unless ``full_output``).

    If every candidate of some sub-code is dropped, that sub-code reports its
    hard-decision class as a singleton list.
    """
    tree.check_shape(ccode)
    cfg.validate_for(ccode.base)
    base, n, k = ccode.base, ccode.base.n, ccode.base.k
    xc = base.xcode
    lists = level1_lists(base, tree.level(1), prior, cfg)
    hdd = None
    for t in range(2, ccode.levels + 1):
        kk = ccode.outer_blocks_per_copy(t)
        syn = tree.level(t)
        top = t == ccode.levels
        merged = []
        for q in range(ccode.copies(t)):
            res = combine_level(xc, lists[q * n : (q + 1) * n], syn[q * kk : (q + 1) * kk], cfg)
            if res is None:
                if hdd is None:
                    hdd = hdd_block_classes(ccode, tree)
                fallback = join_classes(hdd[t - 1][q * kk : (q + 1) * kk], k)
                merged.append(SoftList.singleton(fallback))
                continue
            rows, glp = res
            keep = len(rows) if (top and full_output) else _kept(glp, cfg)
            glp = glp[:keep] - logsumexp(glp[:keep])
            merged.append(SoftList(kk * k, tuple(rows_to_codes(rows[:keep], k)), glp))
        lists = merged
    (final,) = lists
    if ccode.levels == 1 and not full_output:
        final = final.truncate(final.head_size(cfg.list_size, cfg.ties))
    return final.top, final

