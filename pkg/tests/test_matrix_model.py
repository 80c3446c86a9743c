from fractions import Fraction
import itertools
import math

import numpy as np
import pytest
from hypothesis import given, settings, strategies as st

from onematrix.exactcore import N, NLaurent, ZERO
from onematrix.matrix_model import (
    PerturbationSeries, connected_moment, connected_moment_setpartitions, constraint_residual,
    count_cycles, free_energy_series, genus_extract, loop_identity_residual, loop_insertion_check,
    matchings, moment_series, multiloop_residual, planar_moments, set_partitions,
    spectral_curve_check, trace_word, verify_constraint_on_z, verify_loop_identity,
    verify_multiloop_identity, wick_moment, z_series,
)
import onematrix.matrix_model as mm

from oracles import CATALAN, CONNECTED, GENUS, WICK, Z_COEFFS, brute_wick, harer_zagier


@pytest.mark.parametrize("word", sorted(WICK))
def test_wick_hand_values(word):
    assert wick_moment(word) == NLaurent(WICK[word])


@pytest.mark.parametrize("word", sorted(CONNECTED))
def test_connected_hand_values(word):
    assert connected_moment(word) == NLaurent(CONNECTED[word])


@pytest.mark.parametrize("word", sorted(GENUS))
def test_genus_hand_values(word):
    assert genus_extract(word) == GENUS[word]


def test_catalan():
    assert planar_moments(6) == CATALAN


@pytest.mark.parametrize("k", range(0, 9))
def test_single_trace_against_recursion(k):
    assert wick_moment([2 * k]) == NLaurent(harer_zagier(k))


words = st.lists(st.integers(0, 4), min_size=1, max_size=4).filter(lambda w: sum(w) <= 10)


@settings(max_examples=60, deadline=None)
@given(words)
def test_against_brute_force(word):
    assert wick_moment(word) == NLaurent(brute_wick(word))


@settings(max_examples=60, deadline=None)
@given(st.lists(st.integers(0, 5), max_size=4).filter(lambda w: sum(w) <= 12), st.randoms())
def test_word_order_irrelevant(word, rnd):
    shuffled = list(word)
    rnd.shuffle(shuffled)
    assert wick_moment(word) == wick_moment(shuffled)


@settings(max_examples=60, deadline=None)
@given(st.lists(st.integers(1, 5), min_size=1, max_size=4).filter(lambda w: sum(w) <= 12))
def test_parity(word):
    value = wick_moment(word)
    if sum(word) % 2:
        assert value == ZERO
    else:
        assert value != ZERO
        assert {p % 2 for p, _ in value.split()} == {len(word) % 2}


@settings(max_examples=40, deadline=None)
@given(st.lists(st.integers(0, 4), min_size=1, max_size=4).filter(lambda w: sum(w) <= 10))
def test_cumulant_recursion_matches_set_partitions(word):
    assert connected_moment(word) == connected_moment_setpartitions(word)


@settings(max_examples=40, deadline=None)
@given(st.lists(st.integers(0, 4), min_size=1, max_size=4).filter(lambda w: sum(w) <= 10))
def test_moment_cumulant_roundtrip(word):
    total = ZERO
    for pi in set_partitions(list(word)):
        term = NLaurent.const(1)
        for block in pi:
            term = term * connected_moment(block)
        total = total + term
    assert total == wick_moment(word)


@settings(max_examples=40, deadline=None)
@given(st.lists(st.integers(1, 5), min_size=1, max_size=4).filter(lambda w: sum(w) <= 12 and sum(w) % 2 == 0))
def test_genus_positivity(word):
    genus = genus_extract(word)
    if genus:
        assert genus[0][0] == 0
        assert all(g >= 0 for g, _ in genus)


def test_genus_extract_rejects_bad_parity(monkeypatch):
    monkeypatch.setattr(mm, "connected_moment", lambda w: N ** 2)
    with pytest.raises(ValueError):
        mm.genus_extract([2])


def test_matchings_table():
    for n in range(0, 11, 2):
        table = matchings(n)
        assert table.shape == (math.prod(range(1, n, 2)) if n else 1, n)
        if n:
            idx = np.arange(n)
            assert (table != idx).all()
            partner_of_partner = np.take_along_axis(table, table.astype(np.int64), axis=1)
            assert (partner_of_partner == idx).all()
            assert len({tuple(r) for r in table.tolist()}) == len(table)
    with pytest.raises(ValueError):
        matchings(3)


def test_count_cycles():
    perms = np.array([[0, 1, 2, 3], [1, 0, 3, 2], [1, 2, 3, 0], [1, 2, 0, 3]], dtype=np.int8)
    assert count_cycles(perms).tolist() == [4, 2, 1, 2]


def test_large_word_uses_chunked_path(monkeypatch):
    small = wick_moment([3, 3, 2])
    mm._MOMENTS.clear()
    monkeypatch.setattr(mm, "TABLE_MAX_LETTERS", 4)
    assert wick_moment([3, 3, 2]) == small
    mm._MOMENTS.clear()


def test_trace_word_parsing():
    assert trace_word("2,2") == (2, 2)
    assert trace_word("3, 1") == (1, 3)
    with pytest.raises(ValueError):
        trace_word([-1])


def test_spectral_curve():
    rep = spectral_curve_check(8)
    assert rep.passed
    assert spectral_curve_check(0).passed
    literal = spectral_curve_check(8, "literal")
    assert not literal.passed
    at_zero = [ex for ex in literal.counterexamples if ex["equation"] == "loop" and ex["power"] == 0]
    assert at_zero and at_zero[0]["coefficient"] == "-1"


@pytest.mark.parametrize("key", sorted(Z_COEFFS))
def test_z_series_hand_values(key):
    variables, order = key
    z = z_series(variables, order)
    assert z.coefficient((0,) * len(variables)) == 1
    for alpha, coeff in Z_COEFFS[key].items():
        assert z.coefficient(alpha) == NLaurent(coeff)


def test_z_series_rejects_t0():
    with pytest.raises(ValueError):
        z_series([0, 1], 1)


def test_free_energy():
    f = free_energy_series(z_series([4], 1))
    assert f.coefficient((1,)) == -2 * N ** 2 - 1
    one = PerturbationSeries.constant([1], 3)
    assert free_energy_series(one).is_zero()
    assert free_energy_series(z_series([1], 2)).coefficient((2,)) == N ** 2 / 2
    for order in (1, 2, 3):
        for _, c in free_energy_series(z_series([4], order)).items():
            assert all(p % 2 == 0 and p <= 2 for p, _ in c.split())


def test_free_energy_of_two_couplings_has_genus_parity():
    f = free_energy_series(z_series([1, 2], 3))
    for _, c in f.items():
        assert all(p % 2 == 0 and p <= 2 for p, _ in c.split())


def test_series_algebra():
    x = PerturbationSeries.variable([1, 2], 4, 1)
    y = PerturbationSeries.variable([1, 2], 4, 2)
    one = PerturbationSeries.constant([1, 2], 4)
    s = one + x + y.scale(N)
    assert (s * s.inverse()) == one
    assert (s.log() - (x + y.scale(N)) + (x + y.scale(N)) * (x + y.scale(N)).scale(Fraction(1, 2))
            ).truncate(2).is_zero()
    d = (x * x * y).derivative(1)
    assert d == (x * y).scale(2).truncate(3)
    with pytest.raises(ValueError):
        (x + y).inverse()


def test_moment_series_derivative_rule():
    z = z_series([2, 4], 3)
    g = moment_series([4], [2, 4], 2)
    assert (z.derivative(4) - g.scale(-N)).truncate(2).is_zero()


@pytest.mark.parametrize("m,w,S,D", [(2, [2], [2], 2), (2, [], [2], 2), (1, [1, 3], [1, 3], 2),
                                     (3, [2], [1, 3], 2), (1, [2], [4], 3)])
def test_loop_insertion(m, w, S, D):
    rep = loop_insertion_check(m, w, S, D)
    assert rep.passed, rep.counterexamples


def test_loop_insertion_odd_at_order_zero():
    rep = loop_insertion_check(3, [2], [3], 1)
    assert rep.passed
    assert "0" == rep.details["lhs"]


@pytest.mark.parametrize("n", range(-1, 9))
def test_loop_identity(n):
    assert verify_loop_identity(n).passed


def test_loop_identity_hand_values():
    assert loop_identity_residual(0) == ZERO
    assert sum((wick_moment([k, 2 - k]) for k in range(3)), ZERO) == 2 * N ** 2 + 1
    assert N * wick_moment([4]) == 2 * N ** 2 + 1


@pytest.mark.parametrize("n,ins", [(1, [1]), (0, [1]), (2, [2]), (3, [1, 2]), (4, [3, 3])])
def test_multiloop_identity(n, ins):
    assert verify_multiloop_identity(n, ins).passed


def test_multiloop_blocks_by_hand():
    # n=1, insertion 1: 2<(trM)^2 ... > blocks are 2N, -3N, N
    assert 2 * wick_moment([0, 1, 1]) == 2 * N
    assert N * wick_moment([3, 1]) == 3 * N
    assert wick_moment([2]) == N
    assert multiloop_residual(1, [1]) == ZERO


def test_multiloop_detects_wrong_sign():
    # dropping the derivative-shift block leaves a nonzero residual
    ins = [2]
    full = multiloop_residual(2, ins)
    shift = wick_moment([2 + 2]) * 2
    assert full == ZERO and full - shift != ZERO


@pytest.mark.parametrize("n", range(-1, 4))
@pytest.mark.parametrize("lam", [(), (1,), (2,)])
def test_constraint_annihilates_z(n, lam):
    rep = verify_constraint_on_z(n, lam, [1, 3, 4], 2)
    assert rep.passed, rep.counterexamples


@pytest.mark.parametrize("n", range(-1, 6))
def test_constraint_order_zero_is_loop_identity(n):
    res = constraint_residual(n, (), [1], 1)
    assert res.coefficient((0,)) == loop_identity_residual(n) == ZERO


def test_constraint_order_zero_pieces_match_loop_identity():
    # split the order-0 coefficient into the two sums and compare with the loop sums
    from onematrix.weyl import GeneralizedConstraint
    from onematrix.exactcore import IndexMultiset

    fam = GeneralizedConstraint(2, IndexMultiset())
    op = fam.operator(8)
    derivs = ZERO
    for (t, d), c in op.items():
        if not t:
            word = [v for v, e in d for _ in range(e)]
            derivs = derivs + c * wick_moment(word) * N ** len(word)
    assert derivs == sum((wick_moment([k, 2 - k]) for k in range(3)), ZERO)


def test_constraint_exact_beyond_cutoff():
    for n, lam in [(2, ()), (1, (1,)), (3, (2,))]:
        assert constraint_residual(n, lam, [1, 3], 2, extra=5) == constraint_residual(n, lam, [1, 3], 2)


def test_constraint_detects_broken_operator(monkeypatch):
    # with the double-derivative sum rescaled the residual must be nonzero
    from onematrix import weyl

    monkeypatch.setattr(weyl, "INV_N2", NLaurent.monomial(-2, 2))
    weyl.clear_caches()
    try:
        rep = verify_constraint_on_z(2, (), [1, 3], 2)
        assert not rep.passed
    finally:
        monkeypatch.undo()
        weyl.clear_caches()
    assert verify_constraint_on_z(2, (), [1, 3], 2).passed


def test_set_partitions_count():
    assert [len(list(set_partitions(list(range(n))))) for n in range(6)] == [1, 1, 2, 5, 15, 52]


def test_series_json():
    data = z_series([4], 2).to_json()
    assert data["variables"] == [4] and data["order"] == 2
    assert data["coefficients"][0] == {"alpha": [0], "value": {"terms": [[0, "1"]]}}


def test_parity_over_all_small_words():
    for total in range(0, 13, 2):
        for r in range(1, 5):
            for word in itertools.combinations_with_replacement(range(1, total + 1), r):
                if sum(word) == total:
                    scaled = connected_moment(word).shift(len(word) - 2)
                    assert all(p % 2 == 0 for p, _ in scaled.split())
