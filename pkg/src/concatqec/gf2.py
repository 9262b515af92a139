"""Small dense linear-algebra helpers over GF(2) on uint8 matrices."""
from __future__ import annotations

import numpy as np


def as_binary(mat, ncols: int | None = None) -> np.ndarray:
    arr = np.asarray(mat)
    if arr.size == 0:
        width = ncols if ncols is not None else (arr.shape[1] if arr.ndim == 2 else 0)
        return np.zeros((0, width), dtype=np.uint8)
    arr = np.atleast_2d(arr)
    if not np.isin(arr, (0, 1)).all():
        raise ValueError("matrix entries must be 0 or 1")
    return arr.astype(np.uint8)


def rref(mat: np.ndarray) -> tuple[np.ndarray, list[int]]:
    """Reduced row echelon form and pivot columns (first nonzero column wins)."""
    m = as_binary(mat).copy()
    rows, cols = m.shape
    pivots: list[int] = []
    r = 0
    for c in range(cols):
        if r == rows:
            break
        hit = np.nonzero(m[r:, c])[0]
        if hit.size == 0:
            continue
        p = r + hit[0]
        if p != r:
            m[[r, p]] = m[[p, r]]
        others = np.nonzero(m[:, c])[0]
        others = others[others != r]
        m[others] ^= m[r]
        pivots.append(c)
        r += 1
    return m[:r], pivots


def rank(mat: np.ndarray) -> int:
    return len(rref(mat)[1])


def nullspace(mat: np.ndarray, ncols: int | None = None) -> np.ndarray:
    """Basis (as rows) of ``{v : mat @ v = 0}``, one vector per free column in order."""
    m = as_binary(mat, ncols)
    n = m.shape[1]
    red, pivots = rref(m)
    free = [c for c in range(n) if c not in pivots]
    basis = np.zeros((len(free), n), dtype=np.uint8)
    for i, f in enumerate(free):
        basis[i, f] = 1
        for row, p in enumerate(pivots):
            basis[i, p] = red[row, f]
    return basis


def inverse(mat: np.ndarray) -> np.ndarray:
    m = as_binary(mat)
    k = m.shape[0]
    if m.shape != (k, k):
        raise ValueError("matrix must be square")
    aug = np.concatenate([m, np.eye(k, dtype=np.uint8)], axis=1)
    red, pivots = rref(aug)
    if pivots[:k] != list(range(k)) or len(pivots) < k:
        raise ValueError("matrix is singular over GF(2)")
    return red[:k, k:]


def complement_basis(span: np.ndarray, candidates: np.ndarray) -> np.ndarray:
    """Greedily pick rows of ``candidates`` that extend the row space of ``span``."""
    n = candidates.shape[1]
    acc = as_binary(span, n)
    current = rank(acc)
    picked = []
    for row in candidates:
        trial = np.concatenate([acc, row[None, :]], axis=0)
        r = rank(trial)
        if r > current:
            picked.append(row)
            acc, current = trial, r
    return np.array(picked, dtype=np.uint8).reshape(len(picked), n)
