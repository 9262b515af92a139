import itertools
import math

import numpy as np
import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

from concatqec.codes import LogicalClass, get_code, logical_class, syndrome
from concatqec.concatenation import build_concatenated, extract_syndromes, true_logical_class
from concatqec.decoders import (
    DecoderConfig,
    OracleLimitError,
    SoftList,
    assemble_candidate,
    base_candidates,
    brute_force_dqmld,
    class_list,
    format_decoder,
    generate_test_patterns,
    hdd_decode,
    lmld_ca_decode,
    make_decoder,
    outer_correct,
    parse_decoder,
    reliability,
    select_blocks,
    symbol_map_decode,
)
from concatqec.decoders.candidates import level1_lists
from concatqec.decoders.chase import _best_patterns, column
from concatqec.decoders.lmld import combine_level, unique_rows
from concatqec.decoders.softlist import logsumexp
from concatqec.pauli import PauliOperator, multiply

from conftest import x_error

EXHAUSTIVE = DecoderConfig(flips=4, list_size=4, exhaustive_threshold=4)


def soft(probs, k=3):
    return SoftList.from_unsorted(k, list(range(len(probs))), np.log(probs), normalize=False)


# -- base candidates and class lists ---------------------------------------------------


def test_zero_syndrome_identity_first(hamming):
    cands = base_candidates(hamming, 0, 0.01)
    assert cands[0][0].is_identity()
    assert cands[0][1] == max(lp for _, lp in cands)


def test_x5_coset_weight_two(hamming):
    s = syndrome(hamming, x_error(15, 5))
    cands = base_candidates(hamming, s, 0.01, w_max=2)
    assert len(cands) == 8
    assert cands[0][0] == x_error(15, 5)
    assert sorted(op.x.bit_count() for op, _ in cands) == [1] + [2] * 7
    brute = [x for x in range(1 << 15) if x.bit_count() <= 2 and syndrome(hamming, PauliOperator(15, x)) == s]
    assert sorted(op.x for op, _ in cands) == sorted(brute)
    assert math.isclose(logsumexp([lp for _, lp in cands]), 0.0, abs_tol=1e-12)


def test_exhaustive_code422(c422):
    for s in (0, syndrome(c422, x_error(4, 1))):
        cands = base_candidates(c422, s, 0.1, exhaustive_threshold=4)
        assert len(cands) == 8
        assert all(syndrome(c422, op) == s for op, _ in cands)


def test_leader_appended_beyond_w_max(hamming):
    s = syndrome(hamming, x_error(15, 1, 2))
    cands = base_candidates(hamming, s, 0.01, w_max=0)
    assert [op for op, _ in cands] == [hamming.recovery_table[s]]


def test_base_candidates_bad_prior(hamming):
    with pytest.raises(ValueError):
        base_candidates(hamming, 0, 1.5)


def test_class_list_single(hamming):
    lst = class_list(hamming, [(x_error(15, 3), -4.0)])
    assert len(lst) == 1 and lst.logp[0] == 0.0


def test_class_list_sums_same_class(hamming):
    e = x_error(15, 3)
    f = multiply(e, hamming.generators[0])
    g = multiply(e, hamming.logical_x[0])
    lst = class_list(hamming, [(e, math.log(0.5)), (f, math.log(0.2)), (g, math.log(0.3))])
    assert len(lst) == 2
    probs = {c: p for c, p in lst.probabilities().items()}
    assert math.isclose(probs[logical_class(hamming, e)], 0.7)
    assert math.isclose(probs[logical_class(hamming, g)], 0.3)


def test_class_list_rejects_duplicates(hamming):
    e = x_error(15, 3)
    with pytest.raises(ValueError):
        class_list(hamming, [(e, -1.0), (e, -2.0)])


def test_class_list_exhaustive_128(hamming):
    for s in (0, 5 << 4):
        lst = class_list(hamming, base_candidates(hamming, s, 0.05, exhaustive_threshold=15))
        assert len(lst) == 128
        assert math.isclose(sum(lst.probabilities().values()), 1.0, rel_tol=1e-12)


def test_softlist_order_and_ties():
    lst = SoftList.from_unsorted(2, [3, 1, 2], np.log([0.2, 0.4, 0.4]))
    assert lst.codes == (1, 2, 3)
    with pytest.raises(ValueError):
        SoftList(2, (1, 2), np.log([0.1, 0.9]))
    with pytest.raises(ValueError):
        SoftList(2, (1, 1), np.log([0.5, 0.5]))


def test_head_size_ties():
    lst = soft([0.4, 0.2, 0.2, 0.2])
    assert lst.head_size(2) == 4
    assert lst.head_size(2, ties=False) == 2
    assert lst.head_size(1) == 1


# -- reliability, selection and test patterns --------------------------------------------


def test_reliability_examples():
    assert math.isclose(reliability(soft([0.6, 0.3])), math.log(2))
    assert reliability(soft([0.5, 0.5])) == 0.0
    assert reliability(soft([1.0])) == math.inf


def test_select_blocks_examples():
    assert select_blocks([1.0] * 6, 4) == [0, 1, 2, 3]
    assert select_blocks([0.3, 0.1], 0) == []
    assert select_blocks([5, 1, 3], 2) == [1, 2]
    assert select_blocks([math.inf, 2.0, 0.5], 2) == [2, 1]
    with pytest.raises(ValueError):
        select_blocks([1.0], 2)


def long_lists(rng, count=15, size=128):
    return [soft(np.sort(rng.random(size))[::-1] + 1e-3 * np.arange(size)[::-1], k=7) for _ in range(count)]


@pytest.mark.parametrize("d, expected", [(2, 256), (4, 65536)])
def test_tp_count(rng, d, expected):
    lists = long_lists(rng)
    tps = generate_test_patterns(lists, select_blocks([reliability(x) for x in lists], 8), d)
    assert tps.shape == (expected, 15)
    assert len(np.unique(tps, axis=0)) == expected
    assert not tps[0].any()


def test_tp_short_lists():
    lists = [soft([0.7, 0.3]), soft([1.0]), soft([0.5, 0.3, 0.2])]
    tps = generate_test_patterns(lists, [0, 1, 2], 4)
    assert len(tps) == 2 * 1 * 3


def test_tp_d1_is_all_top(rng):
    lists = long_lists(rng, count=5)
    tps = generate_test_patterns(lists, [0, 2, 4], 1)
    assert tps.tolist() == [[0] * 5]


def test_tp_cap_keeps_most_likely(rng):
    lists = long_lists(rng, count=6, size=5)
    sel = [0, 1, 2, 3]
    full = generate_test_patterns(lists, sel, 3)
    capped = generate_test_patterns(lists, sel, 3, tp_cap=10)
    score = lambda t: sum(lists[b].logp[t[b]] for b in range(6))  # noqa: E731
    assert len(capped) == 10
    assert not capped[0].any()
    best = sorted((score(t) for t in full), reverse=True)[:10]
    assert np.allclose(sorted((score(t) for t in capped), reverse=True), best)


def test_tp_without_ties_is_plain_grid():
    lists = [soft([0.4, 0.2, 0.2, 0.2]), soft([0.5, 0.25, 0.25])]
    tps = generate_test_patterns(lists, [0, 1], 2, ties=False)
    assert sorted(map(tuple, tps.tolist())) == [(0, 0), (0, 1), (1, 0), (1, 1)]


def test_tp_ties_widen_but_keep_budget():
    lists = [soft([0.4, 0.2, 0.2, 0.2]), soft([0.6, 0.2, 0.2])]
    tps = generate_test_patterns(lists, [0, 1], 2, ties=True)
    assert len(tps) == 4
    assert tps[0].tolist() == [0, 0]
    # the first list's runners-up cost less, so its tied group gets the budget
    assert {tuple(t) for t in tps.tolist()} == {(0, 0), (1, 0), (2, 0), (3, 0)}


group_sizes = st.lists(st.integers(1, 3), min_size=1, max_size=4)


@settings(max_examples=150, deadline=None)
@given(st.lists(st.tuples(group_sizes, st.lists(st.integers(1, 4), min_size=4, max_size=4)), min_size=1, max_size=4), st.integers(1, 40))
def test_best_patterns_exact(spec, budget):
    logps = []
    for sizes, gaps in spec:
        levels = -np.cumsum([0] + gaps[: len(sizes) - 1]) * 0.25
        logps.append(np.repeat(levels, sizes).astype(float))
    total = math.prod(len(lp) for lp in logps)
    budget = min(budget, total)
    got = _best_patterns(logps, budget)
    assert got.shape == (budget, len(logps))
    assert len({tuple(r) for r in got.tolist()}) == budget
    assert not got[0].any()
    score = lambda t: sum(lp[i] for lp, i in zip(logps, t))  # noqa: E731
    got_scores = [score(t) for t in got]
    assert all(a >= b - 1e-12 for a, b in zip(got_scores, got_scores[1:]))
    brute = sorted((score(t) for t in itertools.product(*(range(len(lp)) for lp in logps))), reverse=True)
    assert np.allclose(got_scores, brute[:budget])


# -- outer correction and candidate assembly ---------------------------------------------


def test_outer_correct_examples(hamming):
    e = x_error(15, 6)
    s = syndrome(hamming, e)
    assert outer_correct(hamming, s, e).is_identity()
    assert outer_correct(hamming, s, PauliOperator.identity(15)) == hamming.recovery_table[s]
    assert outer_correct(hamming, s, PauliOperator.identity(15)) == e


def test_column_gathers_logical_j():
    classes = [LogicalClass(2, x=0b10), LogicalClass(2, x=0b11), LogicalClass(2)]
    assert column(classes, 1).x == 0b011
    assert column(classes, 0).x == 0b010


def test_assemble_all_top(c422):
    lists = [soft([0.6, 0.4], k=2), SoftList.from_unsorted(2, [2, 1], np.log([0.9, 0.1]))]
    tp = [lst.top for lst in lists]
    ident = [PauliOperator.identity(2)] * 2
    cand = assemble_candidate(tp, ident, lists)
    assert cand.classes == tuple(tp)
    assert math.isclose(cand.logp, math.log(0.6) + math.log(0.9))
    assert cand.logp <= 0


def test_assemble_drop():
    lists = [soft([1.0], k=2), soft([1.0], k=2)]
    tp = [LogicalClass(2), LogicalClass(2)]
    corr = [PauliOperator(2, 0b01), PauliOperator.identity(2)]
    assert assemble_candidate(tp, corr, lists) is None


def test_assemble_representatives(c422):
    cands = base_candidates(c422, 0, 0.1, exhaustive_threshold=4)
    lst = class_list(c422, cands)
    target = lst[1][0]
    cand = assemble_candidate([target], [PauliOperator.identity(2)], [lst], [cands], c422)
    rep = cand.representatives[0]
    assert logical_class(c422, rep) == target
    members = [lp for op, lp in cands if logical_class(c422, op) == target]
    assert dict((op, lp) for op, lp in cands)[rep] == max(members)


def test_no_drops_in_exhaustive_code422(c422_2, rng):
    base = c422_2.base
    for _ in range(20):
        e = PauliOperator(16, int(rng.integers(1 << 16)))
        tree = extract_syndromes(c422_2, e)
        lists = level1_lists(base, tree.level(1), 0.05, EXHAUSTIVE)
        tps = generate_test_patterns(lists, [0, 1, 2, 3], 4)
        for tp_pos in tps:
            tp = [lists[b][int(i)][0] for b, i in enumerate(tp_pos)]
            corr = [outer_correct(base, int(tree.level(2)[j]), column(tp, j)) for j in range(2)]
            assert assemble_candidate(tp, corr, lists) is not None


# -- the vectorised combiner against the plain composition -------------------------------


def reference_combine(base, lists, s_out, cfg):
    sel = select_blocks([reliability(x) for x in lists], min(cfg.flips, len(lists)))
    tps = generate_test_patterns(lists, sel, cfg.list_size, cfg.tp_cap, ties=cfg.ties)
    seen, groups = set(), {}
    for pos in tps:
        tp = [lists[b][int(i)][0] for b, i in enumerate(pos)]
        corr = [outer_correct(base, int(s), column(tp, j)) for j, s in enumerate(s_out)]
        cand = assemble_candidate(tp, corr, lists)
        if cand is None or cand.classes in seen:
            continue
        seen.add(cand.classes)
        top = tuple(logical_class(base, column(cand.classes, j)).x for j in range(len(s_out)))
        groups.setdefault(top, []).append(cand.logp)
    if not groups:
        return None
    keys = list(groups)
    lse = np.array([logsumexp(groups[kx]) for kx in keys])
    lse -= logsumexp(lse)
    return dict(zip(keys, lse))


@pytest.mark.parametrize(
    "name, cfg, p",
    [
        ("code422", EXHAUSTIVE, 0.08),
        ("hamming15", DecoderConfig(flips=3, list_size=2), 0.03),
        ("hamming15", DecoderConfig(flips=4, list_size=3, tp_cap=20), 0.04),
        ("hamming15", DecoderConfig(flips=3, list_size=2, ties=False), 0.03),
    ],
)
def test_combine_matches_reference(name, cfg, p, rng):
    base = get_code(name)
    cc = build_concatenated(base, 2)
    for _ in range(6):
        bits = rng.random(cc.n_total) < p
        e = PauliOperator(cc.n_total, sum(1 << int(q) for q in np.flatnonzero(bits)))
        tree = extract_syndromes(cc, e)
        lists = level1_lists(base, tree.level(1), p, cfg)
        got = combine_level(base.xcode, lists, tree.level(2), cfg)
        ref = reference_combine(base, lists, tree.level(2), cfg)
        if ref is None:
            assert got is None
            continue
        rows, glp = got
        mine = {tuple(int(c) for c in row): float(lp) for row, lp in zip(rows, glp)}
        assert mine.keys() == ref.keys()
        for key in ref:
            assert math.isclose(mine[key], ref[key], abs_tol=1e-9)
        assert all(a >= b - 1e-9 for a, b in zip(glp, glp[1:]))


def test_unique_rows_matches_numpy(rng):
    rows = rng.integers(0, 4, size=(500, 3)).astype(np.uint64)
    first, inverse = unique_rows(rows)
    assert np.array_equal(rows[first][inverse], rows)
    assert len(first) == len(np.unique(rows, axis=0))


# -- full decoders ------------------------------------------------------------------------


@pytest.mark.parametrize("spec", ["hdd", "symbol-map", "lmld-ca", "lmld-ca:M=8,D=4"])
def test_zero_tree_trivial(ham2, spec):
    dec = make_decoder(spec, ham2, 0.01)
    assert dec.decode(extract_syndromes(ham2, PauliOperator.identity(225))).is_trivial()


@pytest.mark.parametrize("spec", ["hdd", "symbol-map", "lmld-ca:M=8,D=2,wmax=3"])
def test_single_x_sample(ham2, spec):
    dec = make_decoder(spec, ham2, 0.02)
    for q in (1, 8, 15, 16, 113, 225):
        e = x_error(225, q)
        assert dec.decode(extract_syndromes(ham2, e)) == true_logical_class(ham2, e)


def test_hdd_fixes_inner_logical_flip(ham2, hamming):
    e = x_error(225, 1, 2)
    tree = extract_syndromes(ham2, e)
    # the inner decoder miscorrects block 1 into a logical flip
    inner = logical_class(hamming, multiply(x_error(15, 1, 2), hamming.recovery_table[tree.level(1)[0]]))
    assert not inner.is_trivial()
    assert tree.level(2).any()
    assert hdd_decode(ham2, tree) == true_logical_class(ham2, e)


def test_symbol_map_is_exact_for_single_logical_codes():
    rep = get_code("rep3")
    cc = build_concatenated(rep, 2)
    cfg = DecoderConfig(flips=3, list_size=2, exhaustive_threshold=3)
    for x in range(1 << 9):
        tree = extract_syndromes(cc, PauliOperator(9, x))
        _, marg = symbol_map_decode(cc, tree, cfg, 0.1)
        _, dist = brute_force_dqmld(cc, tree, 0.1)
        assert math.isclose(marg[0], dist.probabilities().get(LogicalClass(1, 1), 0.0), abs_tol=1e-12)


def test_symbol_marginals_normalised(ham2, rng):
    for _ in range(5):
        bits = rng.random(225) < 0.03
        e = PauliOperator(225, sum(1 << int(q) for q in np.flatnonzero(bits)))
        _, marg = symbol_map_decode(ham2, extract_syndromes(ham2, e), DecoderConfig(), 0.03)
        assert marg.shape == (49,)
        assert np.all((marg >= 0) & (marg <= 1))


def test_oracle_examples(c422):
    est, dist = brute_force_dqmld(c422, 0, 0.1)
    assert est.is_trivial()
    for s in range(4):
        try:
            _, dist = brute_force_dqmld(c422, s, 0.1)
        except ValueError:
            continue  # Z-check-free syndromes are unreachable by X errors
        assert math.isclose(sum(dist.probabilities().values()), 1.0, rel_tol=1e-12)


def test_oracle_refuses_large(ham2):
    with pytest.raises(OracleLimitError):
        brute_force_dqmld(ham2, extract_syndromes(ham2, PauliOperator.identity(225)), 0.01)
    with pytest.raises(OracleLimitError):
        make_decoder("oracle", ham2, 0.01)


def test_lmld_matches_oracle_on_code422(c422_2):
    cfg = DecoderConfig(flips=4, list_size=4, exhaustive_threshold=4)
    trees = {}
    for x in range(1 << 16):
        tree = extract_syndromes(c422_2, PauliOperator(16, x))
        trees.setdefault(tree, tree)
    assert len(trees) > 1
    for tree in trees:
        mine, _ = lmld_ca_decode(c422_2, tree, cfg, 0.05)
        exact, _ = brute_force_dqmld(c422_2, tree, 0.05)
        assert mine == exact


def test_oracle_is_optimal_on_sample(c422_2, rng):
    wrong = {"oracle": 0, "hdd": 0, "lmld-ca:M=2,D=1": 0, "symbol-map:M=2": 0}
    for _ in range(400):
        bits = rng.random(16) < 0.08
        e = PauliOperator(16, sum(1 << int(q) for q in np.flatnonzero(bits)))
        tree, true = extract_syndromes(c422_2, e), true_logical_class(c422_2, e)
        for spec in wrong:
            wrong[spec] += make_decoder(spec, c422_2, 0.08).decode(tree) != true
    assert all(wrong["oracle"] <= v for v in wrong.values())


def test_decoders_deterministic(ham2, rng):
    bits = rng.random(225) < 0.03
    e = PauliOperator(225, sum(1 << int(q) for q in np.flatnonzero(bits)))
    tree = extract_syndromes(ham2, e)
    cfg = DecoderConfig(flips=8, list_size=2)
    a = lmld_ca_decode(ham2, tree, cfg, 0.03)
    b = lmld_ca_decode(ham2, tree, cfg, 0.03)
    assert a[0] == b[0] and a[1].codes == b[1].codes and np.array_equal(a[1].logp, b[1].logp)


def test_lmld_soft_output_is_tie_widened_top_d(ham2, rng):
    bits = rng.random(225) < 0.03
    e = PauliOperator(225, sum(1 << int(q) for q in np.flatnonzero(bits)))
    tree = extract_syndromes(ham2, e)
    _, full = lmld_ca_decode(ham2, tree, DecoderConfig(), 0.03, full_output=True)
    _, short = lmld_ca_decode(ham2, tree, DecoderConfig(), 0.03)
    assert short.codes == full.codes[: full.head_size(2)] or len(short) == 1


# -- decoder strings ---------------------------------------------------------------------


def test_parse_decoder():
    spec = parse_decoder("lmld-ca:M=8,D=4,wmax=3,tpcap=100")
    assert spec.name == "lmld-ca"
    cfg = spec.config
    assert (cfg.flips, cfg.list_size, cfg.w_max, cfg.tp_cap) == (8, 4, 3, 100)
    assert parse_decoder("HDD").name == "hdd"
    assert format_decoder(parse_decoder("symbol-map:D=4")) == "symbol-map:D=4"
    assert parse_decoder("lmld-ca:ties=0").config.ties is False


@pytest.mark.parametrize("text", ["magic", "lmld-ca:Q=1", "lmld-ca:M=x", "lmld-ca:D=0", "lmld-ca:ties=2"])
def test_parse_decoder_errors(text):
    with pytest.raises(ValueError):
        parse_decoder(text)


def test_flips_above_n_rejected(c422_2):
    with pytest.raises(ValueError):
        make_decoder("lmld-ca:M=5", c422_2, 0.05)
