import pytest

from onematrix.constraints import (
    current_mode, derivative, generalized_bracket_terms, generalized_constraint, hat_l,
    sugawara_mode, verify_factorization, verify_generalized_bracket, verify_kacmoody,
    verify_mixed_bracket, verify_scaling_identity, verify_sugawara, verify_virasoro_bracket,
    virasoro_constraint,
)
from onematrix.exactcore import IndexMultiset, N, NLaurent, partitions_up_to
from onematrix.weyl import (
    J0_ZERO, TPolynomial, WeylOperator, apply, commutator_action, equal_on_window, make_key,
    window_monomials,
)

from oracles import CONSTRAINT_ACTIONS, VIRASORO_CENTRAL


def _family(kind, mode, lam):
    return {
        "L": lambda: virasoro_constraint(mode),
        "Lgen": lambda: generalized_constraint(mode, lam),
        "Hat": lambda: hat_l(mode),
        "Sug": lambda: sugawara_mode(mode),
    }[kind]()


@pytest.mark.parametrize("kind,mode,lam,monomial,expected", CONSTRAINT_ACTIONS)
def test_hand_actions(kind, mode, lam, monomial, expected):
    got = apply(_family(kind, mode, lam), TPolynomial.monomial(make_key(monomial)))
    want = TPolynomial({key: NLaurent(c) for key, c in expected.items()})
    assert got == want


def test_generalized_empty_lambda_is_virasoro():
    assert equal_on_window(generalized_constraint(2, ()), virasoro_constraint(2), 6, 3).equal


def test_current_modes():
    assert apply(current_mode(-3), TPolynomial.one()) == TPolynomial.var(3).scale(3 * N)
    assert apply(current_mode(2), TPolynomial.var(2)) == TPolynomial.one().scale(2 * N ** -1)
    assert commutator_action(current_mode(1), current_mode(-1), TPolynomial.one()) == TPolynomial.one().scale(2)


def test_j0_conventions():
    t0 = TPolynomial.var(0)
    assert apply(current_mode(0), t0) == TPolynomial.one().scale(2 * N ** -1)
    assert apply(current_mode(0, j0=J0_ZERO), t0).is_zero()


def test_level_must_be_positive():
    with pytest.raises(ValueError):
        current_mode(1, k=0)
    with pytest.raises(ValueError):
        sugawara_mode(1, k=0)


def test_hat_matches_constraint_for_nonnegative_side():
    for n in (-1, 0, 1, 2, 3):
        assert equal_on_window(hat_l(n), virasoro_constraint(n), 6, 3).equal


@pytest.mark.parametrize("m,n", [(1, -1), (2, -2), (3, -3), (0, 0), (2, 1), (-3, 1)])
def test_virasoro_with_central_term(m, n):
    report = verify_virasoro_bracket(m, n, (6, 3), "hat")
    assert report.passed, report.counterexamples


@pytest.mark.parametrize("m,n", sorted(VIRASORO_CENTRAL))
def test_central_value_on_constant(m, n):
    one = TPolynomial.one()
    lhs = commutator_action(hat_l(m), hat_l(n), one) - apply(hat_l(m + n), one).scale(m - n)
    assert lhs == one.scale(VIRASORO_CENTRAL[(m, n)])


def test_constraint_bracket_range():
    for m in range(-1, 3):
        for n in range(-1, 3):
            assert verify_virasoro_bracket(m, n, (6, 3), "constraint").passed


def test_bracket_failure_is_reported():
    # [d1, d2] = 0, so a claimed nonzero right-hand side must be caught
    from onematrix.report import window_check
    rep = window_check("x", {}, lambda p: apply(derivative(1), p), lambda p: apply(derivative(2), p), (2, 1))
    assert not rep.passed
    assert rep.counterexamples[0]["monomial"] == "t1"


@pytest.mark.parametrize("m,n", [(1, -1), (2, -2), (3, 1), (0, 0), (-4, 4)])
def test_kacmoody(m, n):
    assert verify_kacmoody(m, n, (6, 3)).passed


@pytest.mark.parametrize("n,j", [(1, -2), (3, 0), (-2, 1), (2, 2), (-1, -1)])
def test_mixed(n, j):
    assert verify_mixed_bracket(n, j, (6, 3)).passed


@pytest.mark.parametrize("n", range(-6, 7))
def test_sugawara_is_closed_form(n):
    assert verify_sugawara(n, (6, 3)).passed


def test_generalized_bracket_examples():
    assert verify_generalized_bracket(1, (), -1, (), (6, 3)).passed
    rep = verify_generalized_bracket(0, (1,), 0, (), (6, 3))
    assert rep.passed
    assert rep.details["rhs"] == [{"coeff": 1, "n": 0, "lambda": [1]}]
    ab = generalized_bracket_terms(1, (1,), 1, (1,))
    assert ab == {}
    ab = generalized_bracket_terms(2, (1,), 1, (2,))
    ba = generalized_bracket_terms(1, (2,), 2, (1,))
    assert ab == {k: -v for k, v in ba.items()}


def test_generalized_bracket_produces_index_zero():
    terms = generalized_bracket_terms(0, (1,), -1, ())
    assert (0, IndexMultiset([0])) in terms
    assert verify_generalized_bracket(0, (1,), -1, (), (6, 3)).passed


def test_generalized_bracket_small_sweep():
    parts = [p.parts for p in partitions_up_to(2)]
    for n in (-1, 0, 1):
        for m in (-1, 2):
            for lam in parts:
                for mu in parts:
                    assert verify_generalized_bracket(n, lam, m, mu, (6, 3)).passed


def test_wrong_sign_is_detected():
    # the mode -1 terms come from the last sum; negating them must be caught
    from onematrix.weyl import GeneralizedConstraint, Sum
    from onematrix.report import window_check

    a, b = generalized_constraint(2, (1,)), generalized_constraint(-1, (2,))
    bad = Sum(tuple((NLaurent.const(c if mode != -1 else -c), GeneralizedConstraint(mode, parts))
                    for (mode, parts), c in generalized_bracket_terms(2, (1,), -1, (2,)).items()))
    rep = window_check("x", {}, lambda p: commutator_action(a, b, p), lambda p: apply(bad, p), (6, 3))
    assert not rep.passed


@pytest.mark.parametrize("n,lam", [(0, ()), (2, ()), (0, (1,)), (1, (2, 1)), (-1, (3,))])
def test_scaling_identity(n, lam):
    assert verify_scaling_identity(n, lam, (5, 3)).passed


@pytest.mark.parametrize("n", range(-1, 4))
def test_factorization(n):
    for lam in partitions_up_to(3):
        assert verify_factorization(n, lam.parts, (6, 3)).passed


def test_derivative_helper():
    assert derivative(1, 1) == WeylOperator.term(1, d=[1, 1])
    assert len(window_monomials(8, 3)) == 220
