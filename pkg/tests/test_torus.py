import math
from fractions import Fraction

import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

from monoheight.errors import DimensionMismatchError
from monoheight.linalg import IntMatrix, mat_pow
from monoheight.torus import (
    TorusPoint,
    apply_map,
    direct_height,
    height_functional,
    invert_point,
    is_root_of_unity_point,
    log_weil_height,
    place_log_vectors,
    point_from_rationals,
    power_point,
    weil_height,
)

nonzero = st.fractions(max_denominator=500).filter(lambda q: q != 0 and abs(q) < 10**6)


def test_weil_examples():
    assert math.isclose(weil_height(point_from_rationals(["2/3", 5])).value, math.log(15), rel_tol=1e-15)
    assert weil_height(point_from_rationals([1, -1])).exact_zero
    assert math.isclose(weil_height(point_from_rationals([2**5, Fraction(1, 2**8)])).value, 13 * math.log(2))


@settings(max_examples=100, deadline=None)
@given(st.lists(nonzero, min_size=1, max_size=4))
def test_factored_equals_direct(coords):
    P = point_from_rationals(coords)
    assert P.coords() == tuple(coords)
    assert math.isclose(weil_height(P).value, direct_height(coords), rel_tol=1e-12, abs_tol=1e-12)
    assert math.isclose(
        height_functional([[1 if i == j else 0 for j in range(P.n)] for i in range(P.n)], P),
        weil_height(P).value,
        rel_tol=1e-12,
        abs_tol=1e-12,
    )


@settings(max_examples=60, deadline=None)
@given(st.lists(nonzero, min_size=2, max_size=2), st.lists(st.integers(-3, 3), min_size=4, max_size=4))
def test_map_is_coordinatewise_monomial(coords, entries):
    A = IntMatrix.from_rows([entries[:2], entries[2:]])
    P = point_from_rationals(coords)
    x, y = coords
    expect = tuple(x ** a * y ** b for a, b in A.rows)
    assert apply_map(A, P).coords() == expect


def test_map_composition():
    A = IntMatrix.from_rows([[2, 1], [1, 1]])
    P = point_from_rationals(["-3/4", 7])
    Q = P
    for _ in range(5):
        Q = apply_map(A, Q)
    assert Q == apply_map(mat_pow(A, 5), P)
    with pytest.raises(DimensionMismatchError):
        apply_map(IntMatrix.identity(3), P)


def test_huge_exponents_stay_finite():
    A = IntMatrix.from_rows([[2, 1], [1, 1]])
    P = point_from_rationals([2, 3])
    Q = apply_map(mat_pow(A, 2000), P)
    h = weil_height(Q)
    assert h.scale > 0 and not h.exact_zero
    expected = 2000 * math.log((3 + math.sqrt(5)) / 2)
    assert abs(log_weil_height(Q) - expected) < 5


def test_inverse_and_power():
    P = point_from_rationals(["2/3", -5])
    assert invert_point(P).coords() == (Fraction(3, 2), Fraction(-1, 5))
    assert power_point(P, 2).coords() == (Fraction(4, 9), Fraction(25))
    assert is_root_of_unity_point(point_from_rationals([-1, 1]))
    assert not is_root_of_unity_point(P)


def test_json_round_trip():
    P = point_from_rationals(["2/3", -5, 7])
    assert TorusPoint.from_json(P.to_json()) == P
    assert TorusPoint.from_json(["2/3", "-5", "7"]) == P
    assert TorusPoint.from_json({"coords": ["2/3", -5, 7]}) == P


def test_place_vectors():
    P = point_from_rationals(["2/3", 5])
    vecs = place_log_vectors(P)
    assert len(vecs) == 4
    assert math.isclose(vecs[0][0], math.log(2 / 3))
    assert sum(max(0, *v) for v in vecs) == pytest.approx(math.log(15))


def test_rejects_zero_and_floats():
    with pytest.raises(ValueError):
        point_from_rationals([0, 1])
    with pytest.raises(TypeError):
        point_from_rationals([0.5, 1])
