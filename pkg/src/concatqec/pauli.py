"""Pauli operators in binary symplectic form.

An operator on ``n`` qubits is stored as two packed bit masks: ``x`` and ``z``.
Qubit ``q`` (1-based in the public interface) lives at bit ``q - 1``.
Phases are not tracked; two operators that differ only by a phase are equal.
"""
from __future__ import annotations

from dataclasses import dataclass
from typing import Iterable, Sequence

_CHARS = {(0, 0): "I", (1, 0): "X", (0, 1): "Z", (1, 1): "Y"}
_BITS = {v: k for k, v in _CHARS.items()}


@dataclass(frozen=True, slots=True)
class PauliOperator:
    n: int
    x: int = 0
    z: int = 0

    def __post_init__(self):
        if self.n < 0:
            raise ValueError(f"qubit count must be non-negative, got {self.n}")
        limit = 1 << self.n
        if not (0 <= self.x < limit and 0 <= self.z < limit):
            raise ValueError(f"bit masks do not fit in {self.n} qubits")

    # -- constructors -------------------------------------------------------

    @classmethod
    def identity(cls, n: int) -> "PauliOperator":
        return cls(n)

    @classmethod
    def single(cls, n: int, qubit: int, kind: str) -> "PauliOperator":
        """Single-qubit ``kind`` in {"X", "Y", "Z"} on 1-based ``qubit``."""
        _check_index(qubit, n)
        bx, bz = _BITS[kind.upper()]
        bit = 1 << (qubit - 1)
        return cls(n, bit if bx else 0, bit if bz else 0)

    @classmethod
    def from_bits(cls, x_bits: Sequence[int], z_bits: Sequence[int] | None = None) -> "PauliOperator":
        n = len(x_bits)
        if z_bits is None:
            z_bits = [0] * n
        if len(z_bits) != n:
            raise ValueError("x and z parts must have the same length")
        return cls(n, _pack(x_bits), _pack(z_bits))

    @classmethod
    def from_string(cls, text: str) -> "PauliOperator":
        """Parse a string over {I, X, Y, Z}; ``'_'`` and ``'.'`` also mean I."""
        text = text.strip()
        x = z = 0
        for i, ch in enumerate(text.upper()):
            ch = "I" if ch in "_." else ch
            if ch not in _BITS:
                raise ValueError(f"invalid Pauli character {ch!r} at position {i + 1}")
            bx, bz = _BITS[ch]
            x |= bx << i
            z |= bz << i
        return cls(len(text), x, z)

    # -- views --------------------------------------------------------------

    @property
    def x_bits(self) -> list[int]:
        return [(self.x >> i) & 1 for i in range(self.n)]

    @property
    def z_bits(self) -> list[int]:
        return [(self.z >> i) & 1 for i in range(self.n)]

    def is_identity(self) -> bool:
        return self.x == 0 and self.z == 0

    def __str__(self) -> str:
        return "".join(_CHARS[(self.x >> i) & 1, (self.z >> i) & 1] for i in range(self.n))

    def __mul__(self, other: "PauliOperator") -> "PauliOperator":
        return multiply(self, other)


def _pack(bits: Iterable[int]) -> int:
    out = 0
    for i, b in enumerate(bits):
        if b not in (0, 1, True, False):
            raise ValueError(f"bit vector entries must be 0/1, got {b!r}")
        out |= int(b) << i
    return out


def _check_index(q: int, n: int) -> None:
    if not 1 <= q <= n:
        raise ValueError(f"qubit index {q} outside [1, {n}]")


def _check_same(a: PauliOperator, b: PauliOperator) -> None:
    if a.n != b.n:
        raise ValueError(f"length mismatch: {a.n} vs {b.n} qubits")


def multiply(a: PauliOperator, b: PauliOperator) -> PauliOperator:
    _check_same(a, b)
    return PauliOperator(a.n, a.x ^ b.x, a.z ^ b.z)


def commutes(a: PauliOperator, b: PauliOperator) -> bool:
    """True iff the symplectic inner product of ``a`` and ``b`` vanishes."""
    _check_same(a, b)
    return ((a.x & b.z).bit_count() + (a.z & b.x).bit_count()) % 2 == 0


def weight(a: PauliOperator) -> int:
    return (a.x | a.z).bit_count()


def restrict(a: PauliOperator, indices: Sequence[int]) -> PauliOperator:
    """Slice ``a`` onto the 1-based qubit positions ``indices`` (in the given order)."""
    if len(set(indices)) != len(indices):
        raise ValueError("restrict indices must be distinct")
    x = z = 0
    for out, q in enumerate(indices):
        _check_index(q, a.n)
        x |= ((a.x >> (q - 1)) & 1) << out
        z |= ((a.z >> (q - 1)) & 1) << out
    return PauliOperator(len(indices), x, z)


def embed(a: PauliOperator, indices: Sequence[int], n: int) -> PauliOperator:
    """Inverse of :func:`restrict`: place ``a`` on positions ``indices`` of an ``n``-qubit register."""
    if len(indices) != a.n:
        raise ValueError(f"need {a.n} indices, got {len(indices)}")
    if len(set(indices)) != len(indices):
        raise ValueError("embed indices must be distinct")
    x = z = 0
    for src, q in enumerate(indices):
        _check_index(q, n)
        x |= ((a.x >> src) & 1) << (q - 1)
        z |= ((a.z >> src) & 1) << (q - 1)
    return PauliOperator(n, x, z)
