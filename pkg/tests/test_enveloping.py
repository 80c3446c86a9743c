import itertools
import random

import pytest
from hypothesis import given, settings, strategies as st

from onematrix.enveloping import (
    UNIT_WORD, CanonicalWord, Central, CurrentGen, EnvElement, VirGen, canonical, env_bracket,
    env_multiply, oracle_check, random_canonical_word, random_pairs, realize, straighten,
    structure_constants_csv,
)
from onematrix.exactcore import N
from onematrix.weyl import IDENTITY, TPolynomial, apply, equal_on_window, window_monomials
from onematrix.constraints import generalized_constraint


def j(m):
    return canonical(mu=(-m,)) if m < 0 else canonical(lam=(m,))


def L(*ms):
    return canonical(Lam=ms)


def test_straighten_examples():
    assert straighten([CurrentGen(1), CurrentGen(-1)]) == j(-1) * j(1) + EnvElement.scalar(2)
    assert straighten([VirGen(1), CurrentGen(-2)]) == canonical(mu=(2,), Lam=(1,)) + j(-1).scale(2)
    assert straighten([]) == EnvElement.scalar(1)
    assert straighten([Central("current-level"), VirGen(0)]) == L(0).scale(2)


def test_multiply_examples():
    a = L(2) + j(-1).scale(3)
    assert env_multiply(EnvElement.scalar(1), a) == a
    assert env_multiply(j(-1), j(1)) == canonical(mu=(1,), lam=(1,))
    assert env_multiply(j(1), j(-1)) == canonical(mu=(1,), lam=(1,)) + EnvElement.scalar(2)


def test_bracket_examples():
    assert env_bracket(L(2), L(-2)) == L(0).scale(4) + EnvElement.scalar("1/2")
    assert env_bracket(j(2), j(-3)).is_zero()
    assert env_bracket(j(2), j(1)).is_zero()
    br = env_bracket(L(1), j(-1))
    assert br.coefficient(CanonicalWord.of(lam=(0,))) == 1


def test_word_str_and_json():
    w = CanonicalWord.of(mu=(1,), lam=(1,), Lam=(2,))
    assert str(w) == "j(-1)j(1)L(2)"
    assert str(UNIT_WORD) == "1"
    e = canonical(mu=(2, 1), Lam=(-1, 3), coeff=N)
    assert EnvElement.from_json(e.to_json()) == e


def test_realize_examples():
    for key in window_monomials(4, 2):
        p = TPolynomial.monomial(key)
        assert apply(realize(EnvElement.scalar(1)), p) == apply(IDENTITY, p)
        assert apply(realize(j(-1)), p) == (p * TPolynomial.var(1)).scale(N)
    for n, lam in [(0, (1,)), (1, (2, 1)), (-1, (1,))]:
        word = canonical(lam=lam, Lam=(n,))
        target = generalized_constraint(n, lam)
        for key in window_monomials(5, 2):
            p = TPolynomial.monomial(key)
            assert apply(realize(word), p) == apply(target, p).scale((2 * N ** -1) ** len(lam))


def test_fixed_oracle_cases():
    for a, b in [(L(2), L(-2)), (L(1), j(-1)), (j(1), j(-1)), (L(1), j(-2)), (L(3), L(3))]:
        rep = oracle_check(a, b, (6, 3))
        assert rep.passed, rep.counterexamples


def test_random_oracle_pairs():
    for a, b in random_pairs(30, seed=0):
        rep = oracle_check(a, b, (6, 3))
        assert rep.passed, rep.counterexamples


def test_oracle_catches_wrong_bracket():
    # a realization-level comparison that should not hold
    from onematrix.report import window_check
    from onematrix.weyl import commutator_action

    wrong = realize(L(0).scale(3))
    rep = window_check("x", {}, lambda p: apply(wrong, p),
                       lambda p: commutator_action(realize(L(2)), realize(L(-2)), p), (4, 2))
    assert not rep.passed


gens = st.lists(st.one_of(st.integers(-3, 3).map(CurrentGen), st.integers(-3, 3).map(VirGen)),
                max_size=5)


@settings(max_examples=80, deadline=None)
@given(gens, st.integers(0, 10 ** 6))
def test_confluence(word, seed):
    assert straighten(word, rng=random.Random(seed)) == straighten(word)


@settings(max_examples=80, deadline=None)
@given(gens)
def test_structure_constants_are_n_free(word):
    assert straighten(word).n_free()


def _elem(rng):
    return EnvElement({random_canonical_word(rng, 2, 2): rng.randint(-2, 2) or 1})


@settings(max_examples=40, deadline=None)
@given(st.integers(0, 10 ** 6))
def test_associative_antisymmetric_jacobi(seed):
    rng = random.Random(seed)
    a, b, c = _elem(rng), _elem(rng), _elem(rng)
    assert env_multiply(env_multiply(a, b), c) == env_multiply(a, env_multiply(b, c))
    assert env_bracket(a, b) == -env_bracket(b, a)
    jac = env_bracket(a, env_bracket(b, c)) + env_bracket(b, env_bracket(c, a)) + env_bracket(c, env_bracket(a, b))
    assert jac.is_zero()


def _small_words():
    keys = [(0, -1), (1, 0), (1, 1), (2, -1), (2, 0), (2, 1)]
    words = {UNIT_WORD}
    for r in (1, 2):
        for combo in itertools.combinations_with_replacement(keys, r):
            words.add(CanonicalWord.from_keys(sorted(combo)))
    return sorted(words)


def test_pbw_faithful_on_small_words():
    words = _small_words()
    ops = [realize(EnvElement({w: 1})) for w in words]
    for (wa, a), (wb, b) in itertools.combinations(zip(words, ops), 2):
        assert not equal_on_window(a, b, 4, 3).equal, (str(wa), str(wb))


def test_csv_export():
    text = structure_constants_csv([(CanonicalWord.of(Lam=(2,)), CanonicalWord.of(Lam=(-2,)))])
    lines = text.strip().splitlines()
    assert lines[0] == "left,right,result,coefficient"
    assert "L(2),L(-2),L(0),4" in lines
    assert "L(2),L(-2),1,1/2" in lines


def test_central_kind_validated():
    with pytest.raises(ValueError):
        straighten([Central("nope")])
