"""Weil and canonical heights for monomial maps on the split torus over Q."""

from .errors import (
    ConvergenceError,
    DegenerateDynamicsError,
    DimensionMismatchError,
    FactorizationBudgetError,
    HypothesisError,
    MonoheightError,
    SingularMatrixError,
)
from .linalg import IntMatrix, IntPolynomial, adjugate, backward_matrix, char_poly, det, mat_mul, mat_pow, rank
from .torus import (
    HeightValue,
    TorusPoint,
    apply_map,
    invert_point,
    is_root_of_unity_point,
    point_from_rationals,
    weil_height,
)

__version__ = "0.1.0"
