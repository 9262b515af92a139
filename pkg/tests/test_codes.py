import itertools
import time

import numpy as np
import pytest

from concatqec.codes import (
    CodeConstructionError,
    LogicalClass,
    SHIPPED_CODES,
    StabilizerCode,
    build_css,
    class_representative,
    code_422,
    dump_code,
    get_code,
    hamming_parity_check,
    logical_class,
    parse_code,
    quantum_hamming_15_7_3,
    recovery,
    syndrome,
)
from concatqec.pauli import PauliOperator, commutes, multiply, weight

from conftest import stabilizer_product, x_error


def all_paulis(n):
    for x in range(1 << n):
        for z in range(1 << n):
            yield PauliOperator(n, x, z)


def test_hamming_dimensions(hamming):
    assert (hamming.n, hamming.k, hamming.r) == (15, 7, 8)
    kinds = [("X" if g.z == 0 else "Z") for g in hamming.generators]
    assert kinds == ["X"] * 4 + ["Z"] * 4


def test_code422_dimensions(c422):
    assert (c422.n, c422.k) == (4, 2)
    assert len(c422.logical_x) == len(c422.logical_z) == 2


@pytest.mark.parametrize("name", sorted(SHIPPED_CODES))
def test_shipped_invariants(name):
    code = get_code(name)
    for a, b in itertools.combinations(code.generators, 2):
        assert commutes(a, b)
    for op in code.logical_x + code.logical_z:
        assert all(commutes(op, g) for g in code.generators)
    for a, lx in enumerate(code.logical_x):
        for b, lz in enumerate(code.logical_z):
            assert commutes(lx, lz) == (a != b)
    for s, op in enumerate(code.recovery_table):
        assert syndrome(code, op) == s


def test_get_code_shares_instances():
    assert get_code("hamming15") is get_code("hamming15")


def test_get_code_unknown():
    with pytest.raises(ValueError, match="unknown code"):
        get_code("no-such-code")


def test_syndrome_identity(hamming):
    assert syndrome(hamming, PauliOperator.identity(15)) == 0


def test_single_x_syndrome_is_parity_column(hamming):
    h = hamming_parity_check(4)
    for q in range(1, 16):
        s = syndrome(hamming, x_error(15, q))
        z_part = s >> 4
        column = sum(int(h[row, q - 1]) << row for row in range(4))
        assert z_part == column == q
        assert s & 0xF == 0


def test_syndrome_stabilizer_invariance(hamming, rng):
    for _ in range(200):
        e = PauliOperator(15, int(rng.integers(1 << 15)), int(rng.integers(1 << 15)))
        for g in hamming.generators:
            assert syndrome(hamming, multiply(e, g)) == syndrome(hamming, e)


def test_syndrome_size_mismatch(hamming):
    with pytest.raises(ValueError):
        syndrome(hamming, PauliOperator.identity(4))


def test_recovery_zero_is_identity(hamming):
    assert recovery(hamming, 0).is_identity()


def test_recovery_single_x(hamming):
    for q in range(1, 16):
        e = x_error(15, q)
        assert recovery(hamming, syndrome(hamming, e)) == e


def test_recovery_out_of_range(hamming):
    with pytest.raises(ValueError):
        recovery(hamming, 1 << 8)


def test_recovery_is_minimum_weight_x_errors(hamming):
    best = {}
    for x in range(1 << 15):
        e = PauliOperator(15, x)
        s = syndrome(hamming, e)
        best[s] = min(best.get(s, 99), weight(e))
    for s, w in best.items():
        assert weight(recovery(hamming, s)) == w


def test_recovery_is_minimum_weight_general(c422):
    best = {}
    for e in all_paulis(4):
        s = syndrome(c422, e)
        best[s] = min(best.get(s, 99), weight(e))
    for s, w in best.items():
        assert weight(recovery(c422, s)) <= w


def test_recovery_tie_break_is_smallest_masks(c422):
    # syndrome of X1 is shared by X1..X4; the smallest x mask wins
    assert recovery(c422, syndrome(c422, x_error(4, 3))) == x_error(4, 1)


def test_logical_class_of_generators(hamming):
    for g in hamming.generators:
        assert logical_class(hamming, g).is_trivial()


@pytest.mark.parametrize("name", ["hamming15", "code422", "steane7"])
def test_logical_class_of_logicals(name):
    code = get_code(name)
    for a in range(code.k):
        assert logical_class(code, code.logical_x[a]) == LogicalClass(code.k, x=1 << a)
        assert logical_class(code, code.logical_z[a]) == LogicalClass(code.k, z=1 << a)


@pytest.mark.parametrize("name", sorted(SHIPPED_CODES))
def test_logical_class_degeneracy(name, rng):
    code = get_code(name)
    for _ in range(1000):
        e = PauliOperator(code.n, int(rng.integers(1 << code.n)), int(rng.integers(1 << code.n)))
        assert logical_class(code, multiply(e, stabilizer_product(code, rng))) == logical_class(code, e)


def test_class_representative_examples(hamming):
    assert class_representative(hamming, LogicalClass.trivial(7), 0).is_identity()
    for a in range(7):
        assert class_representative(hamming, LogicalClass(7, x=1 << a), 0) == hamming.logical_x[a]


def test_class_representative_round_trip(hamming, rng):
    for _ in range(500):
        e = PauliOperator(15, int(rng.integers(1 << 15)), int(rng.integers(1 << 15)))
        rep = class_representative(hamming, logical_class(hamming, e), syndrome(hamming, e))
        diff = multiply(rep, e)
        assert syndrome(hamming, diff) == 0
        assert logical_class(hamming, diff).is_trivial()


def test_class_representative_k_mismatch(hamming):
    with pytest.raises(ValueError):
        class_representative(hamming, LogicalClass.trivial(2), 0)


def test_coset_partition(hamming):
    xc = hamming.xcode
    masks = np.arange(1 << 15, dtype=np.uint64)
    syn = xc.syndromes(masks)
    cls = xc.classes(masks, syn)
    pairs, counts = np.unique(syn.astype(np.int64) * 128 + cls.astype(np.int64), return_counts=True)
    assert len(pairs) == 16 * 128
    assert np.all(counts == 16)


def test_xcode_agrees_with_general_table(hamming, rng):
    xc = hamming.xcode
    masks = rng.integers(0, 1 << 15, size=300).astype(np.uint64)
    syn = xc.syndromes(masks)
    cls = xc.classes(masks, syn)
    for m, s, c in zip(masks, syn, cls):
        e = PauliOperator(15, int(m))
        assert syndrome(hamming, e) == int(s)
        assert logical_class(hamming, e).x == int(c)


def test_no_low_weight_x_logical(hamming):
    for w in (1, 2):
        for support in itertools.combinations(range(1, 16), w):
            e = x_error(15, *support)
            assert not (syndrome(hamming, e) == 0 and not logical_class(hamming, e).is_trivial())


def test_build_css_hamming_counts():
    h = hamming_parity_check(4)
    assert not ((h.astype(int) @ h.T.astype(int)) % 2).any()
    code = build_css(h, h)
    assert (code.n, code.k, len(code.generators)) == (15, 7, 8)


def test_build_css_non_orthogonal():
    with pytest.raises(CodeConstructionError, match="row 1 and hz row 1"):
        build_css([[1, 0, 0]], [[1, 1, 0]])


def test_build_css_dependent_rows():
    with pytest.raises(CodeConstructionError):
        build_css([[1, 1, 1, 1], [1, 1, 1, 1]], [[1, 1, 1, 1]])


def test_builders_are_deterministic():
    a, b = quantum_hamming_15_7_3(), quantum_hamming_15_7_3()
    assert a.generators == b.generators and a.logical_x == b.logical_x and a.logical_z == b.logical_z
    assert code_422().k == 2


def test_anticommuting_generators_rejected():
    with pytest.raises(CodeConstructionError, match="anticommute"):
        StabilizerCode([PauliOperator.from_string("XI"), PauliOperator.from_string("ZI")], [], [])


def test_code_file_round_trip(hamming, tmp_path):
    text = dump_code(hamming)
    again = parse_code(text)
    assert again.generators == hamming.generators
    assert again.logical_x == hamming.logical_x
    path = tmp_path / "mine.code"
    path.write_text(text)
    assert get_code(str(path)).k == 7


def test_code_file_errors():
    with pytest.raises(CodeConstructionError, match="header"):
        parse_code("four two\n")
    with pytest.raises(CodeConstructionError, match="operator lines"):
        parse_code("4 2\nXXXX\n")


def test_construction_time():
    start = time.perf_counter()
    quantum_hamming_15_7_3()
    assert time.perf_counter() - start < 1.0
