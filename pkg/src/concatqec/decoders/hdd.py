"""Hard-decision decoding: table recovery at every level, no soft information."""
from __future__ import annotations

import numpy as np

from ..bits import flatten_rows, pack_bits, unpack_bits
from ..codes import LogicalClass, logical_class, recovery, syndrome
from ..concatenation import ConcatenatedCode, SyndromeTree, join_classes
from ..pauli import PauliOperator, multiply


def hdd_block_classes(ccode: ConcatenatedCode, tree: SyndromeTree) -> list[list[LogicalClass]]:
    """Estimated class of every block, level by level.

    Each level hypothesises the classes estimated below it, corrects the
    remaining syndrome with ``T`` and reports the class of the result.
    """
    tree.check_shape(ccode)
    base, n, k = ccode.base, ccode.base.n, ccode.base.k
    per_level = []
    below: list[LogicalClass] | None = None
    for t in range(1, ccode.levels + 1):
        syn = tree.level(t)
        if below is None:
            hyps = [PauliOperator.identity(n)] * len(syn)
        else:
            xs = [(c.x >> a) & 1 for c in below for a in range(k)]
            zs = [(c.z >> a) & 1 for c in below for a in range(k)]
            hyps = [
                PauliOperator(n, sum(xs[i] << b for b, i in enumerate(row)), sum(zs[i] << b for b, i in enumerate(row)))
                for row in ccode.gather(t)
            ]
        below = []
        for s, hyp in zip(syn, hyps):
            corrected = multiply(hyp, recovery(base, int(s) ^ syndrome(base, hyp)))
            below.append(logical_class(base, corrected))
        per_level.append(below)
    return per_level


def hdd_decode(ccode: ConcatenatedCode, tree: SyndromeTree) -> LogicalClass:
    return join_classes(hdd_block_classes(ccode, tree)[-1], ccode.base.k)


def hdd_decode_batch(ccode: ConcatenatedCode, levels: list[np.ndarray]) -> np.ndarray:
    """Vectorised bit-flip HDD: ``(B, k_total)`` estimated class bits."""
    xc = ccode.base.xcode
    n, k = ccode.base.n, ccode.base.k
    batch = levels[0].shape[0]
    est_bits = None
    for t in range(1, ccode.levels + 1):
        syn = levels[t - 1]
        if est_bits is None:
            hyp = np.zeros(syn.shape, dtype=np.uint64)
        else:
            hyp = pack_bits(flatten_rows(est_bits)[:, ccode.gather(t)])
        corrected = hyp ^ xc.recover(syn ^ xc.syndromes(hyp))
        est_bits = unpack_bits(xc.classes(corrected, syn).astype(np.uint64), k)
    return flatten_rows(est_bits)
