"""High-rate concatenation of a base code with itself.

Layout, for an r-level code ``C_r``: ``C_t`` is ``n`` consecutive copies of
``C_{t-1}`` (copy-major on the physical qubits) whose logical qubit ``m`` is
gathered across the copies into outer block ``m``.  Logical qubit ``a`` of outer
block ``m`` is logical ``m*k + a`` of ``C_t``.

At level ``t`` there are ``n**(r-t) * k**(t-1)`` base-code blocks.  Viewing the
logical outputs of level ``t-1`` as an array of shape ``(Q, n, K)`` with
``K = k**(t-1)`` outer blocks per copy, the level-``t`` blocks are its
transpose ``(Q, K, n)``.
"""
from __future__ import annotations

from dataclasses import dataclass
from functools import cached_property

import numpy as np

from .bits import flatten_rows, pack_bits, unpack_bits
from .codes import LogicalClass, StabilizerCode, class_representative, logical_class, syndrome
from .pauli import PauliOperator


class ConcatenatedCode:
    def __init__(self, base: StabilizerCode, levels: int):
        if levels < 1:
            raise ValueError(f"levels must be >= 1, got {levels}")
        if base.k < 1:
            raise ValueError("the base code must encode at least one logical qubit")
        self.base = base
        self.levels = levels
        n, k = base.n, base.k
        self.n_total = n**levels
        self.k_total = k**levels
        self.blocks_per_level = tuple(n ** (levels - t) * k ** (t - 1) for t in range(1, levels + 1))

    def __repr__(self) -> str:
        return f"<ConcatenatedCode {self.base.name or 'base'}^{self.levels} [[{self.n_total},{self.k_total}]]>"

    def outer_blocks_per_copy(self, t: int) -> int:
        """Level-``t`` blocks inside one copy of ``C_t`` (= logical qubits of ``C_{t-1}``)."""
        return self.base.k ** (t - 1)

    def copies(self, t: int) -> int:
        """Number of ``C_t`` sub-codes inside the full code."""
        return self.base.n ** (self.levels - t)

    @cached_property
    def _gathers(self) -> dict[int, np.ndarray]:
        n = self.base.n
        out = {}
        for t in range(2, self.levels + 1):
            q_count, kk = self.copies(t), self.outer_blocks_per_copy(t)
            q, m, b = np.meshgrid(np.arange(q_count), np.arange(kk), np.arange(n), indexing="ij")
            out[t] = (q * n * kk + b * kk + m).reshape(q_count * kk, n)
        return out

    def gather(self, t: int) -> np.ndarray:
        """``(blocks, n)`` array: level-``t-1`` logical output (0-based) feeding each position."""
        if not 2 <= t <= self.levels:
            raise ValueError(f"gather is defined for levels 2..{self.levels}")
        return self._gathers[t]

    # 1-based maps between level-t position indices and (block, position)
    # pairs.  Level-1 positions are physical qubits; level-t positions are
    # logical outputs of level t-1.

    def block_position(self, t: int, flat: int) -> tuple[int, int]:
        n = self.base.n
        if t == 1:
            if not 1 <= flat <= self.n_total:
                raise ValueError(f"qubit {flat} outside [1, {self.n_total}]")
            return (flat - 1) // n + 1, (flat - 1) % n + 1
        g = self.gather(t)
        hit = np.argwhere(g == flat - 1)
        if hit.size == 0:
            raise ValueError(f"position {flat} outside level {t}")
        block, pos = hit[0]
        return int(block) + 1, int(pos) + 1

    def flat_index(self, t: int, block: int, pos: int) -> int:
        n = self.base.n
        if not (1 <= block <= self.blocks_per_level[t - 1] and 1 <= pos <= n):
            raise ValueError(f"(block {block}, position {pos}) outside level {t}")
        if t == 1:
            return (block - 1) * n + pos
        return int(self.gather(t)[block - 1, pos - 1]) + 1

    def block_qubits(self, block: int) -> list[int]:
        """1-based physical qubits of level-1 ``block``."""
        n = self.base.n
        return list(range((block - 1) * n + 1, block * n + 1))

    def describe(self) -> str:
        n, k = self.base.n, self.base.k
        lines = [f"{self.base.name or 'base'} [[{n},{k}]] x{self.levels}: n_total={self.n_total}, k_total={self.k_total}"]
        for t, count in enumerate(self.blocks_per_level, start=1):
            lines.append(f"  level {t}: {count} blocks")
        return "\n".join(lines)


def build_concatenated(base: StabilizerCode, r: int) -> ConcatenatedCode:
    return ConcatenatedCode(base, r)


@dataclass(frozen=True)
class SyndromeTree:
    """Packed syndromes, one int64 array per level (level 1 first)."""

    levels: tuple[np.ndarray, ...]

    def level(self, t: int) -> np.ndarray:
        return self.levels[t - 1]

    def is_zero(self) -> bool:
        return all(not lvl.any() for lvl in self.levels)

    def __eq__(self, other) -> bool:
        if not isinstance(other, SyndromeTree) or len(self.levels) != len(other.levels):
            return NotImplemented
        return all(np.array_equal(a, b) for a, b in zip(self.levels, other.levels))

    def __hash__(self):
        return hash(tuple(tuple(lvl.tolist()) for lvl in self.levels))

    def xor(self, other: "SyndromeTree") -> "SyndromeTree":
        return SyndromeTree(tuple(a ^ b for a, b in zip(self.levels, other.levels)))

    def check_shape(self, ccode: ConcatenatedCode) -> None:
        shape = tuple(len(lvl) for lvl in self.levels)
        if shape != ccode.blocks_per_level:
            raise ValueError(f"syndrome tree shape {shape} does not match {ccode.blocks_per_level}")


def _reduce(ccode: ConcatenatedCode, e: PauliOperator) -> tuple[list[np.ndarray], list[LogicalClass]]:
    if e.n != ccode.n_total:
        raise ValueError(f"error acts on {e.n} qubits, code has {ccode.n_total}")
    base, n, k = ccode.base, ccode.base.n, ccode.base.k
    mask = (1 << n) - 1
    blocks = [PauliOperator(n, (e.x >> (b * n)) & mask, (e.z >> (b * n)) & mask) for b in range(ccode.blocks_per_level[0])]
    levels = []
    for t in range(1, ccode.levels + 1):
        if t > 1:
            xs = [(c.x >> a) & 1 for c in classes for a in range(k)]
            zs = [(c.z >> a) & 1 for c in classes for a in range(k)]
            g = ccode.gather(t)
            blocks = [
                PauliOperator(n, sum(xs[src] << b for b, src in enumerate(row)), sum(zs[src] << b for b, src in enumerate(row)))
                for row in g
            ]
        levels.append(np.array([syndrome(base, blk) for blk in blocks], dtype=np.int64))
        classes = [logical_class(base, blk) for blk in blocks]
    return levels, classes


def extract_syndromes(ccode: ConcatenatedCode, e: PauliOperator) -> SyndromeTree:
    levels, _ = _reduce(ccode, e)
    return SyndromeTree(tuple(levels))


def join_classes(classes, k: int) -> LogicalClass:
    """Concatenate per-block classes; block ``m`` supplies logical ``m*k .. m*k+k-1``."""
    x = z = 0
    for m, c in enumerate(classes):
        x |= c.x << (m * k)
        z |= c.z << (m * k)
    return LogicalClass(k * len(classes), x, z)


def true_logical_class(ccode: ConcatenatedCode, e: PauliOperator) -> LogicalClass:
    _, classes = _reduce(ccode, e)
    return join_classes(classes, ccode.base.k)


def embed_logical(ccode: ConcatenatedCode, block: int, c: LogicalClass) -> PauliOperator:
    """Level-1 representative of class ``c`` placed on 1-based level-1 ``block``."""
    rep = class_representative(ccode.base, c, 0)
    shift = (block - 1) * ccode.base.n
    return PauliOperator(ccode.n_total, rep.x << shift, rep.z << shift)


# -- batched bit-flip path ---------------------------------------------------------


def extract_batch(ccode: ConcatenatedCode, errors: np.ndarray) -> tuple[list[np.ndarray], np.ndarray]:
    """Syndromes and true top-level classes for a batch of X errors.

    ``errors`` is ``(B, n_total)`` uint8.  Returns per-level ``(B, N_t)`` int64
    syndromes and ``(B, k_total)`` uint8 class bits (logical index order).
    """
    errors = np.asarray(errors, dtype=np.uint8)
    if errors.ndim != 2 or errors.shape[1] != ccode.n_total:
        raise ValueError(f"expected (B, {ccode.n_total}) error bits, got {errors.shape}")
    xc = ccode.base.xcode
    n, k = ccode.base.n, ccode.base.k
    batch = errors.shape[0]
    block_bits = errors.reshape(batch, ccode.n_total // n, n)
    levels = []
    for t in range(1, ccode.levels + 1):
        if t > 1:
            block_bits = flatten_rows(out_bits)[:, ccode.gather(t)]
        words = pack_bits(block_bits)
        syn = xc.syndromes(words)
        levels.append(syn)
        cls = xc.classes(words, syn)
        out_bits = unpack_bits(cls.astype(np.uint64), k)
    return levels, flatten_rows(out_bits)


def tree_from_batch(levels: list[np.ndarray], i: int) -> SyndromeTree:
    return SyndromeTree(tuple(np.ascontiguousarray(lvl[i]) for lvl in levels))
