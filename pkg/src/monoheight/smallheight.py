"""Points of arbitrarily small positive canonical height.

Northcott fails for these heights: for a matrix with real, distinct, positive
eigenvalues and irreducible characteristic polynomial, choosing an integer
vector ``Y`` almost orthogonal to the dominant left eigenvector ``c_1`` makes
``hhat^+(2^Y)`` as small as we like while staying positive.  Orthogonality to
both ``c_1`` and ``c_N`` does the same for the total height (``N >= 3``).
"""

from __future__ import annotations

import math
from dataclasses import dataclass, field

import mpmath
import numpy as np

from .canonical import (
    HeightEstimate,
    HeightOptions,
    forward_canonical_height,
    total_canonical_height,
)
from .errors import HypothesisError
from .linalg import IntMatrix, char_poly, is_irreducible
from .spectral import DPS, analyze
from .torus import TorusPoint, is_root_of_unity_point

__all__ = [
    "SmallHeightCertificate",
    "GOLDEN_MATRIX",
    "fibonacci",
    "fibonacci_points",
    "dirichlet_small_forward",
    "dirichlet_small_total",
    "spectral_rows",
    "best_multiplier",
]

FIBONACCI = "fibonacci_2x2"
DIRICHLET_FORWARD = "dirichlet_forward"
DIRICHLET_TOTAL = "dirichlet_total"

GOLDEN_MATRIX = IntMatrix.from_rows([[2, 1], [1, 1]])

# relative slack covering the float error in R and in the kernel vector
R_SLACK = 1e-9
# double rounding in a closed-form measurement; the Fibonacci bound is attained exactly
FLOAT_REL = 1e-12
CHUNK = 1 << 16


@dataclass(frozen=True)
class SmallHeightCertificate:
    point: TorusPoint
    target_epsilon: float
    predicted_bound: float
    measured_forward: HeightEstimate
    measured_total: HeightEstimate | None
    construction: str
    approximation_data: dict = field(default_factory=dict)
    target_met: bool = True

    @property
    def holds(self) -> bool:
        m = self.measured_total if self.construction == DIRICHLET_TOTAL else self.measured_forward
        return m.value <= self.predicted_bound * (1 + FLOAT_REL) + m.uncertainty and not is_root_of_unity_point(self.point)

    def to_json(self) -> dict:
        return {
            "construction": self.construction,
            "point": self.point.to_json(),
            "target_epsilon": self.target_epsilon,
            "predicted_bound": self.predicted_bound,
            "measured_forward": self.measured_forward.to_json(),
            "measured_total": None if self.measured_total is None else self.measured_total.to_json(),
            "approximation_data": self.approximation_data,
            "target_met": self.target_met,
            "holds": self.holds,
        }


def fibonacci(k: int) -> int:
    a, b = 0, 1
    for _ in range(k):
        a, b = b, a + b
    return a


def fibonacci_points(k: int, opts: HeightOptions | None = None) -> SmallHeightCertificate:
    """``P = (2^F_k, 2^-F_{k+1})`` for ``[[2,1],[1,1]]``; ``hhat^+ = log 2 / sqrt 5 * gamma^-k``.

    ``F_{k+1} - gamma F_k = psi^k`` is the approximation error, so the target
    epsilon recorded is ``gamma^-k``.
    """
    if k < 2:
        raise ValueError("fibonacci_points needs k >= 2")
    gamma = (1 + math.sqrt(5)) / 2
    fk, fk1 = fibonacci(k), fibonacci(k + 1)
    P = TorusPoint((1, 1), ((2, (fk, -fk1)),))
    predicted = math.log(2) / math.sqrt(5) * gamma ** (-k)
    measured = forward_canonical_height(GOLDEN_MATRIX, P, opts)
    approx = {"y": fk, "y_i": [fk, -fk1], "z": [1.0, -gamma], "achieved": gamma ** (-k), "k": k}
    return SmallHeightCertificate(P, gamma ** (-k), predicted, measured, None, FIBONACCI, approx)


def _check_hypotheses(A: IntMatrix, min_n: int) -> None:
    if A.n < min_n:
        raise HypothesisError(f"construction needs N >= {min_n}, got N = {A.n}")
    if not is_irreducible(char_poly(A)):
        raise HypothesisError("characteristic polynomial is reducible")
    for e in analyze(A).eigen:
        if abs(e.value.imag) > e.radius:
            raise HypothesisError("eigenvalues are not all real")
        if e.value.real - e.radius <= 0:
            raise HypothesisError("eigenvalues are not all positive")


def spectral_rows(A: IntMatrix):
    """Eigenvalues (descending), right columns ``b_k`` and left rows ``c_k`` with ``c_k b_k = 1``.

    Only for real spectra; computed in mpmath at the module precision.
    """
    with mpmath.workdps(DPS):
        E, EL, ER = mpmath.eig(mpmath.matrix(A.tolist()), left=True, right=True)
        n = A.n
        order = sorted(range(n), key=lambda k: -mpmath.re(E[k]))
        lam, B, C = [], [], []
        for k in order:
            b = [mpmath.re(ER[i, k]) for i in range(n)]
            c = [mpmath.re(EL[k, j]) for j in range(n)]
            s = mpmath.fsum(ci * bi for ci, bi in zip(c, b))
            lam.append(mpmath.re(E[k]))
            B.append(b)
            C.append([ci / s for ci in c])
        return lam, B, C


def _R(B, C) -> float:
    with mpmath.workdps(DPS):
        return float(max(abs(b[i] * c[j]) for b, c in zip(B, C) for i in range(len(b)) for j in range(len(c))))


def _normalize(z):
    m = max(abs(x) for x in z)
    i = max(range(len(z)), key=lambda t: abs(z[t]))
    s = 1 if z[i] > 0 else -1
    return [s * x / m for x in z]


def _forward_kernel(c):
    """Kernel vector of the row ``c``: among the two-term vectors
    ``c_j e_i - c_i e_j`` take the one closest to integral at ``y = 1``."""
    n = len(c)
    best, score = None, math.inf
    for i in range(n):
        for j in range(i + 1, n):
            z = [mpmath.mpf(0)] * n
            z[i], z[j] = c[j], -c[i]
            if not any(z):
                continue
            z = _normalize(z)
            s = max(float(abs(x - mpmath.nint(x))) for x in z)
            if s < score:
                best, score = z, s
    return best


def _total_kernel(c1, cN):
    with mpmath.workdps(DPS):
        n = len(c1)
        if n == 3:
            z = [c1[1] * cN[2] - c1[2] * cN[1], c1[2] * cN[0] - c1[0] * cN[2], c1[0] * cN[1] - c1[1] * cN[0]]
        else:
            M = mpmath.matrix([c1, cN])
            _, _, V = mpmath.svd_r(M)
            z = [V[n - 1, j] for j in range(n)]
        return _normalize(z)


def _cf_search(alpha, y_max: int, eps: float):
    """Smallest ``q <= y_max`` with ``|q alpha - p| < eps`` via continued-fraction convergents."""
    with mpmath.workdps(DPS):
        x = mpmath.mpf(alpha)
        p0, q0, p1, q1 = 0, 1, 1, 0
        best = None
        while True:
            a = int(mpmath.floor(x))
            p0, q0, p1, q1 = p1, q1, a * p1 + p0, a * q1 + q0
            if q1 > y_max:
                break
            err = float(abs(q1 * mpmath.mpf(alpha) - p1))
            if q1 > 0 and (best is None or err < best[1]):
                best = (q1, err)
            if err < eps:
                break
            frac = x - a
            if frac == 0:
                break
            x = 1 / frac
        return best


def best_multiplier(z, y_max: int, eps: float):
    """Smallest ``y <= y_max`` with ``max_i |y z_i - round(y z_i)| < eps``, else the best ``y``.

    Returns ``(y, achieved)``.
    """
    fz = np.array([float(v) for v in z])
    nonint = [i for i, v in enumerate(z) if abs(v - mpmath.nint(v)) > 1e-30]
    if len(nonint) == 1:
        # only one coordinate is irrational: continued fractions give the optimum
        found = _cf_search(z[nonint[0]], y_max, eps)
        if found is not None:
            return found
    best_y, best_err = 1, math.inf
    for start in range(1, y_max + 1, CHUNK):
        ys = np.arange(start, min(start + CHUNK, y_max + 1), dtype=np.float64)
        prod = np.outer(ys, fz)
        err = np.max(np.abs(prod - np.rint(prod)), axis=1)
        hits = np.flatnonzero(err < eps)
        if hits.size:
            return int(ys[hits[0]]), float(err[hits[0]])
        k = int(np.argmin(err))
        if err[k] < best_err:
            best_y, best_err = int(ys[k]), float(err[k])
    return best_y, best_err


def _exact_error(z, y: int, ys) -> float:
    with mpmath.workdps(DPS):
        return float(max(abs(y * zi - yi) for zi, yi in zip(z, ys)))


def _build(A, z, epsilon, y_max, prime, factor, R, construction, opts):
    y, _ = best_multiplier(z, y_max, epsilon)
    ys = [int(mpmath.nint(y * zi)) for zi in z]
    achieved = _exact_error(z, y, ys)
    P = TorusPoint((1,) * A.n, ((prime, tuple(ys)),))
    eps_used = max(epsilon, achieved)
    predicted = factor * math.log(prime) * A.n * R * (1 + R_SLACK) * eps_used
    fwd = forward_canonical_height(A, P, opts)
    tot = total_canonical_height(A, P, opts) if construction == DIRICHLET_TOTAL else None
    approx = {"y": y, "y_i": ys, "z": [float(v) for v in z], "achieved": achieved, "R": R, "prime": prime}
    return SmallHeightCertificate(P, epsilon, predicted, fwd, tot, construction, approx, achieved < epsilon)


def dirichlet_small_forward(A: IntMatrix, epsilon: float, y_max: int = 10**6, prime: int = 2,
                            opts: HeightOptions | None = None) -> SmallHeightCertificate:
    """Point ``prime^Y`` with ``Y`` nearly in the kernel of the dominant left row; ``hhat^+ <= 2 log p N R eps``."""
    if epsilon <= 0:
        raise ValueError("epsilon must be positive")
    _check_hypotheses(A, 2)
    _, B, C = spectral_rows(A)
    with mpmath.workdps(DPS):
        z = _forward_kernel(C[0])
        return _build(A, z, epsilon, y_max, prime, 2, _R(B, C), DIRICHLET_FORWARD, opts)


def dirichlet_small_total(A: IntMatrix, epsilon: float, y_max: int = 10**6, prime: int = 2,
                          opts: HeightOptions | None = None) -> SmallHeightCertificate:
    """As :func:`dirichlet_small_forward` but orthogonal to the top and bottom rows; ``hhat <= 4 log p N R eps``."""
    if epsilon <= 0:
        raise ValueError("epsilon must be positive")
    _check_hypotheses(A, 3)
    _, B, C = spectral_rows(A)
    with mpmath.workdps(DPS):
        z = _total_kernel(C[0], C[-1])
        return _build(A, z, epsilon, y_max, prime, 4, _R(B, C), DIRICHLET_TOTAL, opts)
