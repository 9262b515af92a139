"""Packing between uint8 bit arrays and uint64 masks (bit i <-> element i)."""
from __future__ import annotations

import numpy as np


def pack_bits(bits: np.ndarray) -> np.ndarray:
    """Pack the last axis (length <= 64) into uint64 masks."""
    bits = np.asarray(bits, dtype=np.uint8)
    width = bits.shape[-1]
    if width > 64:
        raise ValueError(f"cannot pack {width} bits into one word")
    packed = np.packbits(bits, axis=-1, bitorder="little")
    pad = 8 - packed.shape[-1]
    if pad:
        packed = np.concatenate([packed, np.zeros(packed.shape[:-1] + (pad,), dtype=np.uint8)], axis=-1)
    return np.ascontiguousarray(packed).view("<u8")[..., 0].astype(np.uint64)


def unpack_bits(words: np.ndarray, width: int) -> np.ndarray:
    """Inverse of :func:`pack_bits`: ``(...,)`` uint64 -> ``(..., width)`` uint8."""
    words = np.ascontiguousarray(np.asarray(words, dtype=np.uint64))
    as_bytes = words[..., None].view(np.uint8)
    return np.unpackbits(as_bytes, axis=-1, count=width, bitorder="little")


def int_to_bits(value: int, width: int) -> np.ndarray:
    return np.array([(value >> i) & 1 for i in range(width)], dtype=np.uint8)


def bits_to_int(bits) -> int:
    out = 0
    for i, b in enumerate(np.asarray(bits).ravel()):
        if b:
            out |= 1 << i
    return out


def flatten_rows(a: np.ndarray) -> np.ndarray:
    """Merge all axes after the first; unlike ``reshape(len(a), -1)`` this works for empty batches."""
    return a.reshape(a.shape[0], int(np.prod(a.shape[1:])))
