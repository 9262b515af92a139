"""Single-level stabilizer codes: syndrome map, recovery map and logical classes.

Syndromes are packed into Python ints: bit ``g`` is set iff the error
anticommutes with ``generators[g]``.  The recovery table stores the
minimum-weight coset leader for every syndrome; ties are broken by the
smallest ``(x, z)`` mask pair, so X on qubit 1 beats X on qubit 2.
"""
from __future__ import annotations

import itertools
from dataclasses import dataclass
from functools import cached_property, lru_cache
from pathlib import Path
from typing import Sequence

import numpy as np

from . import gf2
from .pauli import PauliOperator, commutes, multiply, weight

MAX_QUBITS = 63
MAX_SYNDROME_BITS = 24


class CodeConstructionError(ValueError):
    """A code definition violates a stabilizer-code invariant."""


@dataclass(frozen=True, slots=True)
class LogicalClass:
    """Logical coset of an error relative to the code's recovery frame.

    ``x`` bit ``a`` is set when the class contains logical X number ``a``;
    ``z`` likewise for logical Z.  The packed form ``code`` is ``x | z << k``.
    """

    k: int
    x: int = 0
    z: int = 0

    @classmethod
    def trivial(cls, k: int) -> "LogicalClass":
        return cls(k)

    @classmethod
    def from_code(cls, k: int, code: int) -> "LogicalClass":
        mask = (1 << k) - 1
        return cls(k, code & mask, code >> k)

    @property
    def code(self) -> int:
        return self.x | (self.z << self.k)

    @property
    def bits(self) -> tuple[int, ...]:
        return tuple((self.x >> a) & 1 for a in range(self.k)) + tuple(
            (self.z >> a) & 1 for a in range(self.k)
        )

    def is_trivial(self) -> bool:
        return self.x == 0 and self.z == 0

    def as_pauli(self) -> PauliOperator:
        """The class as a Pauli on the ``k`` logical qubits."""
        return PauliOperator(self.k, self.x, self.z)

    def __str__(self) -> str:
        return str(self.as_pauli())


class StabilizerCode:
    """An ``[[n, k]]`` stabilizer code with a fixed logical frame and recovery table."""

    def __init__(
        self,
        generators: Sequence[PauliOperator],
        logical_x: Sequence[PauliOperator],
        logical_z: Sequence[PauliOperator],
        *,
        distance_hint: int | None = None,
        name: str = "",
    ):
        if not generators and not logical_x:
            raise CodeConstructionError("a code needs generators or logical operators")
        n = (generators or logical_x)[0].n
        if n > MAX_QUBITS:
            raise CodeConstructionError(f"codes are limited to {MAX_QUBITS} qubits, got {n}")
        if len(logical_x) != len(logical_z):
            raise CodeConstructionError("logical_x and logical_z must have equal length")
        for op in (*generators, *logical_x, *logical_z):
            if op.n != n:
                raise CodeConstructionError("all operators must act on the same number of qubits")
        k = len(logical_x)
        if len(generators) != n - k:
            raise CodeConstructionError(f"expected {n - k} generators for k={k}, got {len(generators)}")
        if n - k > MAX_SYNDROME_BITS:
            raise CodeConstructionError(f"{n - k} syndrome bits exceed the table limit {MAX_SYNDROME_BITS}")

        self.n = n
        self.k = k
        self.generators = tuple(generators)
        self.logical_x = tuple(logical_x)
        self.logical_z = tuple(logical_z)
        self.distance_hint = distance_hint
        self.name = name
        self._check_invariants()
        self.recovery_table = _coset_leaders(self)

    def __repr__(self) -> str:
        label = f" {self.name}" if self.name else ""
        return f"<StabilizerCode{label} [[{self.n},{self.k}]]>"

    @property
    def r(self) -> int:
        return self.n - self.k

    @property
    def is_css(self) -> bool:
        pure = lambda op: op.x == 0 or op.z == 0  # noqa: E731
        return (
            all(pure(g) for g in self.generators)
            and all(op.z == 0 for op in self.logical_x)
            and all(op.x == 0 for op in self.logical_z)
        )

    def _check_invariants(self) -> None:
        gens = self.generators
        for a, b in itertools.combinations(range(len(gens)), 2):
            if not commutes(gens[a], gens[b]):
                raise CodeConstructionError(f"generators {a + 1} and {b + 1} anticommute")
        symp = np.array(
            [[(g.x >> i) & 1 for i in range(self.n)] + [(g.z >> i) & 1 for i in range(self.n)] for g in gens],
            dtype=np.uint8,
        ).reshape(len(gens), 2 * self.n)
        if gf2.rank(symp) != len(gens):
            raise CodeConstructionError("stabilizer generators are not independent")
        for which, ops in (("logical_x", self.logical_x), ("logical_z", self.logical_z)):
            for a, op in enumerate(ops):
                for g, gen in enumerate(gens):
                    if not commutes(op, gen):
                        raise CodeConstructionError(f"{which}[{a}] anticommutes with generator {g + 1}")
        for a, lx in enumerate(self.logical_x):
            for b, lz in enumerate(self.logical_z):
                if commutes(lx, lz) == (a == b):
                    raise CodeConstructionError(f"logical pair ({a}, {b}) breaks symplectic pairing")
        for a, b in itertools.combinations(range(self.k), 2):
            if not commutes(self.logical_x[a], self.logical_x[b]) or not commutes(
                self.logical_z[a], self.logical_z[b]
            ):
                raise CodeConstructionError(f"logical operators {a} and {b} of the same type anticommute")

    @cached_property
    def xcode(self) -> "XCode":
        return XCode(self)


def syndrome(code: StabilizerCode, e: PauliOperator) -> int:
    if e.n != code.n:
        raise ValueError(f"error acts on {e.n} qubits, code has {code.n}")
    s = 0
    for g, gen in enumerate(code.generators):
        if ((e.x & gen.z).bit_count() + (e.z & gen.x).bit_count()) & 1:
            s |= 1 << g
    return s


def syndrome_bits(code: StabilizerCode, s: int) -> tuple[int, ...]:
    return tuple((s >> g) & 1 for g in range(code.r))


def recovery(code: StabilizerCode, s: int) -> PauliOperator:
    if not 0 <= s < 1 << code.r:
        raise ValueError(f"syndrome {s} out of range for {code.r} bits")
    return code.recovery_table[s]


def logical_class(code: StabilizerCode, e: PauliOperator) -> LogicalClass:
    residual = multiply(e, recovery(code, syndrome(code, e)))
    x = z = 0
    for a in range(code.k):
        if not commutes(residual, code.logical_z[a]):
            x |= 1 << a
        if not commutes(residual, code.logical_x[a]):
            z |= 1 << a
    return LogicalClass(code.k, x, z)


def class_representative(code: StabilizerCode, c: LogicalClass, s: int) -> PauliOperator:
    if c.k != code.k:
        raise ValueError(f"class has k={c.k}, code has k={code.k}")
    op = recovery(code, s)
    for a in range(code.k):
        if (c.x >> a) & 1:
            op = multiply(op, code.logical_x[a])
        if (c.z >> a) & 1:
            op = multiply(op, code.logical_z[a])
    return op


def _coset_leaders(code: StabilizerCode) -> tuple[PauliOperator, ...]:
    n, total = code.n, 1 << code.r
    table: list[PauliOperator | None] = [None] * total
    table[0] = PauliOperator.identity(n)
    found = 1
    for w in range(1, n + 1):
        if found == total:
            break
        best: dict[int, tuple[int, int]] = {}
        for support in itertools.combinations(range(n), w):
            for kinds in itertools.product((1, 2, 3), repeat=w):
                x = z = 0
                for q, kind in zip(support, kinds):
                    if kind & 1:
                        x |= 1 << q
                    if kind & 2:
                        z |= 1 << q
                s = syndrome(code, PauliOperator(n, x, z))
                if table[s] is None and (s not in best or (x, z) < best[s]):
                    best[s] = (x, z)
        for s, (x, z) in best.items():
            table[s] = PauliOperator(n, x, z)
        found += len(best)
    if found != total:
        raise CodeConstructionError("recovery table does not cover every syndrome")
    return tuple(table)  # type: ignore[arg-type]


def build_css(hx, hz, *, distance_hint: int | None = None, name: str = "") -> StabilizerCode:
    """CSS code with X-type checks from ``hx`` rows and Z-type checks from ``hz`` rows.

    Generators are ordered X-type first.  The logical frame comes from
    GF(2) elimination with first-free-column pivoting, so it is reproducible.
    """
    hx_arr, hz_arr = np.asarray(hx), np.asarray(hz)
    n = hx_arr.shape[-1] if hx_arr.size else hz_arr.shape[-1]
    hx_b = gf2.as_binary(hx_arr, n)
    hz_b = gf2.as_binary(hz_arr, n)
    if hx_b.shape[1] != hz_b.shape[1]:
        raise CodeConstructionError("hx and hz must have the same number of columns")
    overlap = (hx_b.astype(np.int64) @ hz_b.T.astype(np.int64)) % 2
    bad = np.argwhere(overlap)
    if bad.size:
        i, j = bad[0]
        raise CodeConstructionError(f"hx row {i + 1} and hz row {j + 1} are not orthogonal")
    if gf2.rank(hx_b) != len(hx_b):
        raise CodeConstructionError("hx rows are not independent")
    if gf2.rank(hz_b) != len(hz_b):
        raise CodeConstructionError("hz rows are not independent")

    lx = gf2.complement_basis(hx_b, gf2.nullspace(hz_b, n))
    lz = gf2.complement_basis(hz_b, gf2.nullspace(hx_b, n))
    if len(lx) != len(lz):
        raise CodeConstructionError("could not find paired logical operators")
    if len(lx):
        pairing = (lx.astype(np.int64) @ lz.T.astype(np.int64)) % 2
        lz = (gf2.inverse(pairing).T.astype(np.int64) @ lz.astype(np.int64)) % 2

    def x_op(row) -> PauliOperator:
        return PauliOperator.from_bits(list(row))

    def z_op(row) -> PauliOperator:
        return PauliOperator.from_bits([0] * n, list(row))

    gens = [x_op(r) for r in hx_b] + [z_op(r) for r in hz_b]
    return StabilizerCode(
        gens,
        [x_op(r) for r in lx],
        [z_op(r) for r in lz],
        distance_hint=distance_hint,
        name=name,
    )


def hamming_parity_check(m: int = 4) -> np.ndarray:
    """Parity checks of the ``[2^m - 1, 2^m - 1 - m, 3]`` Hamming code; column q is q in binary."""
    n = (1 << m) - 1
    return np.array([[(q >> row) & 1 for q in range(1, n + 1)] for row in range(m)], dtype=np.uint8)


def quantum_hamming_15_7_3() -> StabilizerCode:
    h = hamming_parity_check(4)
    return build_css(h, h, distance_hint=3, name="hamming15")


def code_422() -> StabilizerCode:
    row = [[1, 1, 1, 1]]
    return build_css(row, row, distance_hint=2, name="code422")


def steane_7_1_3() -> StabilizerCode:
    h = hamming_parity_check(3)
    return build_css(h, h, distance_hint=3, name="steane7")


def repetition_3() -> StabilizerCode:
    """Three-qubit bit-flip code: Z checks only, one logical qubit."""
    return build_css(np.zeros((0, 3)), [[1, 1, 0], [0, 1, 1]], distance_hint=1, name="rep3")


SHIPPED_CODES = {
    "hamming15": quantum_hamming_15_7_3,
    "code422": code_422,
    "steane7": steane_7_1_3,
    "rep3": repetition_3,
}


@lru_cache(maxsize=None)
def _shipped(name: str) -> StabilizerCode:
    return SHIPPED_CODES[name]()


def get_code(spec: str) -> StabilizerCode:
    """Look up a shipped code by name (one shared instance), or load a code-definition file."""
    if spec in SHIPPED_CODES:
        return _shipped(spec)
    path = Path(spec)
    if path.is_file():
        return load_code(path)
    raise ValueError(f"unknown code {spec!r}; shipped codes: {', '.join(SHIPPED_CODES)}")


# -- code-definition files ------------------------------------------------------


def parse_code(text: str, name: str = "") -> StabilizerCode:
    """Parse the line format: ``n k``, then n-k generators, k logical X, k logical Z.

    Blank lines and ``#`` comments are ignored.
    """
    lines = [ln.split("#", 1)[0].strip() for ln in text.splitlines()]
    lines = [ln for ln in lines if ln]
    if not lines:
        raise CodeConstructionError("empty code definition")
    try:
        n, k = (int(tok) for tok in lines[0].split())
    except ValueError as exc:
        raise CodeConstructionError(f"bad header {lines[0]!r}; expected 'n k'") from exc
    body = lines[1:]
    if len(body) != n + k:
        raise CodeConstructionError(f"expected {n + k} operator lines after the header, got {len(body)}")
    ops = [PauliOperator.from_string(ln) for ln in body]
    for i, op in enumerate(ops):
        if op.n != n:
            raise CodeConstructionError(f"operator line {i + 2} has length {op.n}, expected {n}")
    gens, rest = ops[: n - k], ops[n - k :]
    return StabilizerCode(gens, rest[:k], rest[k:], name=name)


def load_code(path: str | Path) -> StabilizerCode:
    path = Path(path)
    return parse_code(path.read_text(), name=path.stem)


def dump_code(code: StabilizerCode) -> str:
    out = [f"{code.n} {code.k}"]
    out += ["# stabilizer generators"] + [str(g) for g in code.generators]
    out += ["# logical X"] + [str(op) for op in code.logical_x]
    out += ["# logical Z"] + [str(op) for op in code.logical_z]
    return "\n".join(out) + "\n"


# -- bit-flip specialisation -----------------------------------------------------


def parity(a: np.ndarray) -> np.ndarray:
    return np.bitwise_count(a) & 1


class XCode:
    """Vectorised syndrome/class maps for X-only errors on a CSS code.

    Errors are packed ``uint64`` masks (qubit q at bit q-1).  Classes are
    returned as their X part only, which is all an X error can carry here.
    """

    def __init__(self, code: StabilizerCode):
        if not code.is_css:
            raise ValueError("bit-flip tables require a CSS code")
        self.code = code
        self.n, self.k, self.r = code.n, code.k, code.r
        self.gen_z = np.array([g.z for g in code.generators], dtype=np.uint64)
        self.logical_z = np.array([op.z for op in code.logical_z], dtype=np.uint64)
        self.leader = np.zeros(1 << code.r, dtype=np.uint64)
        self.valid = np.zeros(1 << code.r, dtype=bool)
        for s, op in enumerate(code.recovery_table):
            if op.z == 0:
                self.leader[s] = op.x
                self.valid[s] = True
        self._gen_weights = np.left_shift(np.uint64(1), np.arange(code.r, dtype=np.uint64))
        self._cls_weights = np.left_shift(np.uint64(1), np.arange(code.k, dtype=np.uint64))

    def syndromes(self, x: np.ndarray) -> np.ndarray:
        x = np.asarray(x, dtype=np.uint64)
        if self.r == 0:
            return np.zeros(x.shape, dtype=np.int64)
        bits = parity(x[..., None] & self.gen_z)
        return (bits.astype(np.uint64) * self._gen_weights).sum(axis=-1).astype(np.int64)

    def recover(self, s: np.ndarray) -> np.ndarray:
        return self.leader[np.asarray(s, dtype=np.int64)]

    def classes_of_residual(self, residual: np.ndarray) -> np.ndarray:
        residual = np.asarray(residual, dtype=np.uint64)
        if self.k == 0:
            return np.zeros(residual.shape, dtype=np.int64)
        bits = parity(residual[..., None] & self.logical_z)
        return (bits.astype(np.uint64) * self._cls_weights).sum(axis=-1).astype(np.int64)

    def classes(self, x: np.ndarray, s: np.ndarray | None = None) -> np.ndarray:
        x = np.asarray(x, dtype=np.uint64)
        if s is None:
            s = self.syndromes(x)
        return self.classes_of_residual(x ^ self.recover(s))
