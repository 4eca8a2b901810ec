import math
import random

import pytest

from monoheight.canonical import HeightOptions, backward_canonical_height, forward_canonical_height
from monoheight.linalg import IntMatrix
from monoheight.suite import random_matrix, random_point
from monoheight.torus import TorusPoint, point_from_rationals
from monoheight.verify import (
    preperiodicity_test,
    verify_dim2_zero_height,
    verify_fibration_semiconjugacy,
    verify_functional_equation,
    verify_lower_bound,
    verify_recurrence,
)


def test_report_invariant(golden):
    rep = verify_functional_equation(golden, point_from_rationals([2, 3]))
    assert rep.passed == (rep.hypotheses_met and rep.residual <= rep.tolerance)
    assert rep.details["simple_form_residual"] < 1e-12
    assert set(rep.to_json()) >= {"identity_name", "lhs", "rhs", "residual", "tolerance", "passed", "hypotheses_met"}


@pytest.mark.parametrize("A", [[[2, 1], [1, 1]], [[2, 0], [0, 2]], [[3, 1], [1, 2]]])
@pytest.mark.parametrize("pt", [[2, 3], [1, 1], ["5/7", -12]])
def test_functional_equation_examples(A, pt):
    assert verify_functional_equation(IntMatrix.from_rows(A), point_from_rationals(pt)).passed


def test_recurrence_examples(golden):
    assert verify_recurrence(golden, point_from_rationals([2, 1]), 4).passed
    assert verify_recurrence(IntMatrix.from_rows([[3, 1], [1, 2]]), point_from_rationals([2, 3]), 3).passed
    rep = verify_recurrence(golden, point_from_rationals([-1, 1]), 4)
    assert rep.passed and rep.residual == 0.0


def test_lower_bound(golden):
    assert verify_lower_bound(golden, point_from_rationals([32, "1/256"])).passed
    rep = verify_lower_bound(IntMatrix.scalar(2, 3), point_from_rationals([2, 3]))
    assert rep.passed and rep.lhs == pytest.approx(math.log(3))
    rep = verify_lower_bound(IntMatrix.from_rows([[2, 0, 0], [0, 3, 0], [0, 0, 5]]), point_from_rationals([2, 3, 5]))
    assert not rep.hypotheses_met and not rep.passed
    rep = verify_lower_bound(IntMatrix.from_rows([[2, 1], [0, 2]]), point_from_rationals([2, 3]))
    assert not rep.hypotheses_met and "diagonalizable" in rep.explanation


def test_preperiodicity(golden, jordan2):
    assert preperiodicity_test(golden, point_from_rationals([-1, 1])).preperiodic
    assert not preperiodicity_test(golden, point_from_rationals([2, 1])).preperiodic
    assert not preperiodicity_test(jordan2, point_from_rationals([2, 1])).preperiodic
    assert forward_canonical_height(jordan2, point_from_rationals([2, 1])).exact_zero


def test_preperiodic_exponents_with_cyclotomic_part():
    # diag(2, -1): (1, 5) has a periodic second coordinate
    A = IntMatrix.from_rows([[2, 0], [0, -1]])
    res = preperiodicity_test(A, point_from_rationals([1, 5]))
    assert res.preperiodic and res.period == 2
    assert not preperiodicity_test(A, point_from_rationals([2, 5])).preperiodic


def test_preperiodic_implies_zero():
    rng = random.Random(9)
    for _ in range(30):
        n = rng.choice((2, 3))
        A = random_matrix(rng, n)
        P = TorusPoint(tuple(rng.choice((1, -1)) for _ in range(n)))
        assert preperiodicity_test(A, P).preperiodic
        assert forward_canonical_height(A, P).exact_zero
        assert backward_canonical_height(A, P).exact_zero


def test_dim2_zero_height():
    J = IntMatrix.from_rows([[2, 1], [0, 2]])
    r = verify_dim2_zero_height(J, point_from_rationals([2, 1]))
    assert r.passed and r.details["forward_zero"]
    r = verify_dim2_zero_height(J, point_from_rationals([2, 3]))
    assert r.passed and r.lhs == pytest.approx(math.log(3) / 2)
    r = verify_dim2_zero_height(IntMatrix.from_rows([[3, 0], [1, 3]]), point_from_rationals([1, 5]))
    assert r.passed and r.details["forward_zero"]
    assert not verify_dim2_zero_height(IntMatrix.scalar(2, 2), point_from_rationals([2, 3])).hypotheses_met


def test_semiconjugacy():
    J = IntMatrix.from_rows([[2, 1], [0, 2]])
    r = verify_fibration_semiconjugacy(J, point_from_rationals([2, 3]))
    assert r.passed and r.details["pi_of_image"] == point_from_rationals([9, 1]).to_json()
    J3 = IntMatrix.from_rows([[2, 1, 0], [0, 2, 1], [0, 0, 2]])
    rng = random.Random(2)
    for _ in range(10):
        assert verify_fibration_semiconjugacy(J3, random_point(rng, 3)).passed
    assert verify_fibration_semiconjugacy(J3, TorusPoint((1, 1, 1))).passed


def test_determinism(golden):
    P = point_from_rationals(["3/4", 10])
    assert verify_recurrence(golden, P).to_json() == verify_recurrence(golden, P).to_json()


def test_degenerate_gate():
    r = verify_functional_equation(IntMatrix.from_rows([[1, 1], [0, 1]]), point_from_rationals([2, 3]))
    assert not r.hypotheses_met and not r.passed
