"""Forward, backward and total canonical heights of monomial maps.

The forward height is the limsup of ``h(phi_A^n P) / (n^ell delta^n)``.
Because the Weil height of ``phi_A^n P`` is the height functional of the
integer matrix ``A^n`` applied to ``P``'s place-wise log vectors, and that
functional is continuous in the matrix, the limsup equals the maximum of the
functional over the limit set of ``A^n / (n^ell delta^n)``.  Whenever that set
is known in closed form (finitely many rotation classes, or one irrational
rotation sweeping a circle) the height is evaluated exactly; otherwise the
orbit is iterated with exact exponents and the tail maximum is reported.
"""

from __future__ import annotations

import math
import os
from dataclasses import asdict, dataclass, field

import numpy as np

from .errors import DegenerateDynamicsError, DimensionMismatchError, HypothesisError, SingularMatrixError
from .linalg import IntMatrix, backward_matrix, det, mat_pow
from .spectral import MatrixAnalysis, analyze, ell_rank_chain
from .torus import (
    TorusPoint,
    apply_map,
    height_functional,
    invert_point,
    is_root_of_unity_point,
    log_weil_height,
    place_log_vectors,
    weil_height,
)

__all__ = [
    "HeightOptions",
    "HeightEstimate",
    "forward_canonical_height",
    "backward_canonical_height",
    "total_canonical_height",
    "fibration_height",
    "closed_form_orbit_height",
    "is_forward_zero",
    "single_integer_eigenvalue",
]

CLOSED_PROJECTOR = "closed_form_projector"
CLOSED_FIBRATION = "closed_form_fibration"
ITERATIVE = "iterative_window"

DEFAULT_NMAX = 60
DEFAULT_WINDOW = 8


def _default_nmax() -> int:
    raw = os.environ.get("MONOHEIGHT_NMAX")
    if raw is None:
        return DEFAULT_NMAX
    value = int(raw)
    if value < 2:
        raise ValueError("MONOHEIGHT_NMAX must be at least 2")
    return value


@dataclass(frozen=True)
class HeightOptions:
    n_max: int = field(default_factory=_default_nmax)
    window: int | None = None
    tolerance: float = 1e-6
    method: str = "auto"  # or "iterative"

    def __post_init__(self):
        if self.n_max < 2:
            raise ValueError("n_max must be at least 2")
        if self.window is not None and self.window < 1:
            raise ValueError("window must be positive")
        if self.tolerance <= 0:
            raise ValueError("tolerance must be positive")
        if self.method not in ("auto", "iterative"):
            raise ValueError(f"unknown method {self.method!r}")


@dataclass(frozen=True)
class HeightEstimate:
    value: float
    method: str
    n_max: int | None = None
    window: int | None = None
    uncertainty: float = 0.0
    exact_zero: bool = False

    def __post_init__(self):
        if self.value < 0:
            raise ValueError("canonical heights are nonnegative")
        if self.exact_zero and self.value != 0:
            raise ValueError("exact_zero requires value 0")

    def to_json(self) -> dict:
        return asdict(self)

    def __add__(self, other: "HeightEstimate") -> "HeightEstimate":
        methods = {self.method, other.method}
        if ITERATIVE in methods:
            method = ITERATIVE
        elif CLOSED_FIBRATION in methods:
            method = CLOSED_FIBRATION
        else:
            method = CLOSED_PROJECTOR
        it = [e for e in (self, other) if e.method == ITERATIVE]
        return HeightEstimate(
            value=self.value + other.value,
            method=method,
            n_max=it[0].n_max if it else None,
            window=it[0].window if it else None,
            uncertainty=self.uncertainty + other.uncertainty,
            exact_zero=self.exact_zero and other.exact_zero,
        )


def _check_dynamics(an: MatrixAnalysis, what: str = "A") -> None:
    if det(an.matrix) == 0:
        raise SingularMatrixError(f"{what} is singular")
    if an.delta <= 1 + an.delta_radius:
        raise DegenerateDynamicsError(f"dynamical degree of {what} is {float(an.delta):.12g}; need > 1")


def is_forward_zero(A: IntMatrix, P: TorusPoint) -> bool:
    """Exact test for ``hhat_A^+(P) = 0``.

    The height vanishes iff every exponent vector lies in the kernel of all
    limit matrices; the rational part of that kernel is the kernel of an
    integer polynomial in ``A`` precomputed by :func:`analyze`.
    """
    Z = analyze(A).zero_test
    return all(not any(Z.apply(v)) for _, v in P.exponents)


def single_integer_eigenvalue(A: IntMatrix) -> int | None:
    """``lambda`` if the characteristic polynomial is exactly ``(x - lambda)^N``."""
    an = analyze(A)
    if len(an.factors) != 1:
        return None
    f, _, _ = an.factors[0]
    if f.degree != 1:
        return None
    return -f.coeffs[0]


def fibration_height(A: IntMatrix, P: TorusPoint) -> tuple[HeightEstimate, HeightEstimate]:
    """Closed forms for a non-diagonalizable ``A`` with one integer eigenvalue.

    With ``pi = phi_{(A - lambda)^ell}`` the forward height is
    ``h(pi P) / (ell! lambda^ell)`` for ``lambda > 0``.  The backward matrix has
    nilpotent part ``-(A - lambda) lambda^(N-2) + ...``, so its ``ell``-th power
    carries the sign ``(-1)^ell``: the backward height sees ``pi(P)^-1`` for
    odd ``ell`` and ``pi(P)`` for even ``ell``.  For ``lambda < 0`` both are
    ``max(h(pi P), h(pi P^-1)) / (ell! |lambda|^ell)``.
    """
    lam = single_integer_eigenvalue(A)
    if lam is None:
        raise HypothesisError("fibration height needs a single integer eigenvalue")
    if A == IntMatrix.scalar(A.n, lam):
        raise HypothesisError("fibration height needs a non-diagonalizable matrix")
    if abs(lam) <= 1:
        raise DegenerateDynamicsError(f"eigenvalue {lam} has modulus <= 1")
    ell = ell_rank_chain(A)
    pi = mat_pow(A - IntMatrix.scalar(A.n, lam), ell)
    base = apply_map(pi, P)
    zero = is_root_of_unity_point(base)
    norm = math.factorial(ell) * abs(lam) ** ell
    if zero:
        z = HeightEstimate(0.0, CLOSED_FIBRATION, exact_zero=True)
        return z, z
    h_pi = weil_height(base).value
    h_inv = weil_height(invert_point(base)).value
    if lam > 0:
        fwd = h_pi / norm
        bwd = (h_inv if ell % 2 else h_pi) / norm
    else:
        fwd = bwd = max(h_pi, h_inv) / norm
    return HeightEstimate(fwd, CLOSED_FIBRATION), HeightEstimate(bwd, CLOSED_FIBRATION)


def _circle_max(S: np.ndarray, U: np.ndarray, W: np.ndarray, vectors: list[list[float]]) -> float:
    """Exact maximum over ``phi`` of the height functional of ``S + cos(phi) U + sin(phi) W``.

    Each place contributes ``max(0, max_i s_i + u_i cos + w_i sin)``; between
    consecutive switch points the total is a single sinusoid, maximised in
    closed form.
    """
    places = []
    for vec in vectors:
        v = np.asarray(vec, dtype=float)
        s, u, w = S @ v, U @ v, W @ v
        pieces = [(0.0, 0.0, 0.0)] + list(zip(s.tolist(), u.tolist(), w.tolist()))
        places.append(pieces)

    def f(phi: float) -> float:
        c, sn = math.cos(phi), math.sin(phi)
        return math.fsum(max(a + b * c + d * sn for a, b, d in pieces) for pieces in places)

    two_pi = 2 * math.pi
    cuts = [0.0]
    for pieces in places:
        for i in range(len(pieces)):
            for j in range(i + 1, len(pieces)):
                ds = pieces[i][0] - pieces[j][0]
                du = pieces[i][1] - pieces[j][1]
                dw = pieces[i][2] - pieces[j][2]
                R = math.hypot(du, dw)
                if R < 1e-300 or abs(ds) > R:
                    continue
                alpha = math.atan2(dw, du)
                gap = math.acos(-ds / R)
                cuts.append((alpha + gap) % two_pi)
                cuts.append((alpha - gap) % two_pi)
    cuts = sorted(set(cuts))
    best = max(f(c) for c in cuts)
    bounds = cuts + [cuts[0] + two_pi]
    for a, b in zip(bounds, bounds[1:]):
        if b - a < 1e-15:
            continue
        mid = 0.5 * (a + b)
        cm, sm = math.cos(mid), math.sin(mid)
        mu = om = 0.0
        for pieces in places:
            _, bu, bw = max(pieces, key=lambda t: t[0] + t[1] * cm + t[2] * sm)
            mu += bu
            om += bw
        if mu == 0.0 and om == 0.0:
            continue
        star = math.atan2(om, mu)
        star = a + (star - a) % two_pi
        if star <= b:
            best = max(best, f(star))
    return best


def _closed_projector(an: MatrixAnalysis, P: TorusPoint) -> float:
    ls = an.limit_structure()
    vectors = place_log_vectors(P)
    if ls.period != "aperiodic":
        return max(height_functional(L, P, vectors) for L in ls.limits)
    U, W = ls.circle
    return max(_circle_max(S, U, W, vectors) for S in ls.base)


def _iterative(A: IntMatrix, an: MatrixAnalysis, P: TorusPoint, opts: HeightOptions, zero: bool) -> HeightEstimate:
    ls = an.limit_structure()
    if opts.window is not None:
        window = opts.window
    elif ls.period != "aperiodic":
        window = 2 * ls.period
    else:
        window = DEFAULT_WINDOW
    n_max = opts.n_max
    if 2 * window > n_max:
        window = max(1, n_max // 2)
    floor = 1e-15
    if zero:
        return HeightEstimate(0.0, ITERATIVE, n_max, window, floor, True)
    log_delta = math.log(float(an.delta))
    ell = an.ell
    values = []
    Q = P
    for n in range(1, n_max + 1):
        Q = apply_map(A, Q)
        lh = log_weil_height(Q)
        values.append(0.0 if lh == -math.inf else math.exp(lh - ell * math.log(n) - n * log_delta))
    last = max(values[-window:])
    prev = max(values[-2 * window:-window])
    delta = abs(last - prev)
    if ell > 0:
        # error ~ c / n, while successive windows differ by ~ c * window / n^2
        factor = 2.0 * n_max / window
    else:
        r = an.second_modulus_ratio ** window
        factor = max(1.0, r / (1.0 - r)) if r < 1 else 2.0 * n_max / window
    unc = max(delta * factor, floor * max(1.0, last))
    return HeightEstimate(last, ITERATIVE, n_max, window, unc, False)


def forward_canonical_height(A: IntMatrix, P: TorusPoint, opts: HeightOptions | None = None) -> HeightEstimate:
    opts = opts or HeightOptions()
    an = analyze(A)
    _check_dynamics(an)
    if A.n != P.n:
        raise DimensionMismatchError(f"{A.n}x{A.n} matrix with a point of dimension {P.n}")
    zero = is_forward_zero(A, P)
    if opts.method == "iterative":
        return _iterative(A, an, P, opts, zero)
    lam = single_integer_eigenvalue(A)
    if lam is not None and not an.diagonalizable:
        return fibration_height(A, P)[0]
    ls = an.limit_structure()
    if not ls.closed_form:
        return _iterative(A, an, P, opts, zero)
    if zero:
        return HeightEstimate(0.0, CLOSED_PROJECTOR, exact_zero=True)
    return HeightEstimate(_closed_projector(an, P), CLOSED_PROJECTOR)


def backward_canonical_height(A: IntMatrix, P: TorusPoint, opts: HeightOptions | None = None) -> HeightEstimate:
    """Forward height for ``A' = sgn(det A) adj(A)``."""
    Ab = backward_matrix(A)
    an = analyze(Ab)
    if an.delta <= 1 + an.delta_radius:
        raise DegenerateDynamicsError("degenerate: the backward matrix has dynamical degree 1")
    return forward_canonical_height(Ab, P, opts)


def total_canonical_height(A: IntMatrix, P: TorusPoint, opts: HeightOptions | None = None) -> HeightEstimate:
    return forward_canonical_height(A, P, opts) + backward_canonical_height(A, P, opts)


def closed_form_orbit_height(A: IntMatrix, P: TorusPoint, n: int, opts: HeightOptions | None = None) -> float:
    """``hhat_A(phi_A^n P)`` from ``H_0`` and ``H_1`` via the two-term linear recurrence.

    Falls back to direct evaluation when ``|lambda_1| = |lambda_N|``, where the
    closed form is singular.
    """
    if n < 0:
        raise ValueError("n must be nonnegative")
    an = analyze(A)
    _check_dynamics(an)
    H0 = total_canonical_height(A, P, opts).value
    if n == 0:
        return H0
    H1 = total_canonical_height(A, apply_map(A, P), opts).value
    if n == 1:
        return H1
    big, small = float(an.delta), float(an.min_modulus)
    if big - small <= 2 * float(an.delta_radius) + 1e-12:
        return total_canonical_height(A, apply_map(mat_pow(A, n), P), opts).value
    return ((big * small**n - big**n * small) * H0 + (big**n - small**n) * H1) / (big - small)
