from fractions import Fraction
import itertools
import json

import pytest
from hypothesis import given, settings, strategies as st

from onematrix.lie_abstract import (
    CORRECTED, PRINTED, LBasis, LElement, LWindow, antisymmetry_scan, basis_order_key, closure_scan,
    cocycle, consistency_with_operators, jacobi_residual, jacobi_scan, l_bracket,
)

E = LElement.basis
SMALL = LWindow(-2, 2, -1, 1, 2)


def test_virasoro_slice():
    for variant in (PRINTED, CORRECTED):
        br = l_bracket(E(2), E(-2), variant)
        assert br == E(0).scale(4) + LElement(central=Fraction(1, 2))


def test_printed_fails_antisymmetry_on_witness():
    assert l_bracket(E(0, [1]), E(0), PRINTED) == E(0, [1])
    assert l_bracket(E(0), E(0, [1]), PRINTED) == E(0, [1])


def test_corrected_witness():
    assert l_bracket(E(0, [1]), E(0), CORRECTED) == E(0, [1])
    assert l_bracket(E(0), E(0, [1]), CORRECTED) == -E(0, [1])


def test_part_zero_appears():
    br = l_bracket(E(0, [1]), E(-1), CORRECTED)
    assert br.coefficient(LBasis.of(0, [0])) == 1


def test_numeric_c():
    br = l_bracket(E(3), E(-3), CORRECTED, c=Fraction(2))
    assert br.central == 4


def test_central_commutes():
    z = LElement(central=1)
    assert l_bracket(z, E(1, [2]), CORRECTED).is_zero()
    assert l_bracket(E(-2), z, PRINTED).is_zero()


def test_cocycle_values_and_oddness():
    assert cocycle(2) == Fraction(1, 2)
    assert cocycle(3) == 2
    assert [cocycle(g) for g in (-1, 0, 1)] == [0, 0, 0]
    for g in range(-8, 9):
        assert cocycle(-g) == -cocycle(g)


basis = st.tuples(st.integers(-3, 3), st.lists(st.integers(-2, 2), max_size=2))


@settings(max_examples=200, deadline=None)
@given(basis, basis)
def test_grading(x, y):
    (n, a), (m, b) = x, y
    total = n + sum(a) + m + sum(b)
    for variant in (PRINTED, CORRECTED):
        br = l_bracket(E(n, a), E(m, b), variant)
        for bb, _ in br.items():
            assert bb.grade == total
        if br.central:
            assert total == 0
            assert br.central == cocycle(n + sum(a))


def _rand_elem(draw_terms):
    out = LElement()
    for (n, parts), c in draw_terms:
        out = out + E(n, parts).scale(c)
    return out


elements = st.lists(st.tuples(basis, st.integers(-3, 3)), min_size=1, max_size=3).map(_rand_elem)


@settings(max_examples=60, deadline=None)
@given(elements, elements, elements)
def test_corrected_is_a_lie_algebra_on_random_elements(a, b, c):
    assert l_bracket(a, b) == -l_bracket(b, a)
    jac = l_bracket(a, l_bracket(b, c)) + l_bracket(b, l_bracket(c, a)) + l_bracket(c, l_bracket(a, b))
    assert jac.is_zero()


def test_antisymmetry_scan_small():
    assert antisymmetry_scan(SMALL, CORRECTED).passed
    rep = antisymmetry_scan(SMALL, PRINTED)
    assert not rep.passed
    assert rep.counterexamples[0]["case"] == [[0, [1]], [0, []]]
    again = antisymmetry_scan(SMALL, PRINTED)
    assert json.dumps(rep.to_json()) == json.dumps(again.to_json())


def test_empty_partition_slice_both_variants():
    w = LWindow(-3, 3, 0, 0, 0)
    for variant in (PRINTED, CORRECTED):
        assert antisymmetry_scan(w, variant).passed
        assert jacobi_scan(w, variant).passed


def test_jacobi_scan_small():
    assert jacobi_scan(LWindow(-1, 1, -1, 1, 2), CORRECTED, all_orders=True).passed
    rep = jacobi_scan(LWindow(-1, 1, -1, 1, 1), PRINTED, max_examples=3)
    assert not rep.passed
    assert len(rep.counterexamples) == 3
    assert rep.details["failures"] > 3


def test_jacobi_residual_value():
    x, y, z = (0, ()), (0, ()), (0, (1,))
    assert jacobi_residual(x, y, z, CORRECTED).is_zero()
    assert not jacobi_residual(x, y, z, PRINTED).is_zero()


def test_window_order():
    elems = LWindow().elements()
    assert elems[0] == (0, ())
    assert elems == sorted(elems, key=basis_order_key)
    assert len(elems) == 7 * 21


def test_closure():
    rep = closure_scan(2, 2, 2, part_min=0)
    assert rep.passed
    assert rep.details["central_fired"] == 0
    strict = closure_scan(2, 2, 2, part_min=1)
    assert not strict.passed
    assert strict.counterexamples[0]["outside"] == [[0, [0]]]


def test_closure_virasoro_half():
    assert closure_scan(4, 0, 0).passed


@pytest.mark.parametrize("case", [(0, (1,), 0, ()), (1, (), -1, ()), (1, (1,), 1, (1,)), (2, (2,), -1, (1, 1))])
def test_consistency_with_operators(case):
    rep = consistency_with_operators(*case, window=(6, 3))
    assert rep.passed, rep.counterexamples


def test_consistency_values():
    assert consistency_with_operators(0, (1,), 0, ()).details["abstract"] == E(0, [1])
    assert consistency_with_operators(1, (), -1, ()).details["abstract"] == E(0).scale(2)


def test_element_json_roundtrip():
    e = E(1, [-2, 0]).scale(3) + E(-1).scale(Fraction(1, 2)) + LElement(central=Fraction(2, 3))
    assert LElement.from_json(json.loads(json.dumps(e.to_json()))) == e


def test_window_pair_count():
    n = len(LWindow().elements())
    rep = antisymmetry_scan(LWindow(), CORRECTED)
    assert rep.checked == n * (n + 1) // 2
    assert rep.passed
    assert len(list(itertools.combinations_with_replacement(range(n), 3))) == 540274
