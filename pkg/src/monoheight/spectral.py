"""Spectral data of integer matrices: dynamical degree, Jordan growth exponent, limit matrices.

The dominant growth of ``A**n`` is governed by the eigenvalues of modulus
``delta = rho(A)`` whose Jordan blocks have the maximal size ``ell + 1``:

    A^n / (n^ell delta^n)  ~  sum_k (lambda_k / delta)^n Q_k,
    Q_k = lambda_k^-ell / ell! * (A - lambda_k)^ell * r_k(A) / r_k(lambda_k),

where ``r_k = m / (x - lambda_k)^(ell+1)`` and ``m`` is the minimal
polynomial.  ``ell`` is read off the exact factorization of ``m`` over Q, so
it never needs a numeric estimate.
"""

from __future__ import annotations

import math
from dataclasses import dataclass, field
from functools import lru_cache
from math import lcm

import mpmath
import numpy as np

from .errors import ConvergenceError, DegenerateDynamicsError, SingularMatrixError
from .linalg import (
    IntMatrix,
    IntPolynomial,
    char_poly,
    det,
    expand_factored,
    is_cyclotomic,
    mat_mul,
    mat_pow,
    minimal_polynomial,
    poly_eval_matrix,
    rank,
    squarefree_decomposition,
)

__all__ = [
    "Root",
    "SpectralData",
    "LimitStructure",
    "MatrixAnalysis",
    "poly_roots",
    "analyze",
    "spectral_data",
    "dynamical_degree",
    "ell_of",
    "ell_rank_chain",
    "ell_growth_estimate",
    "dominant_limit_structure",
    "power_iteration_radius",
]

DPS = 50
P_MAX = 24
ANGLE_TOL = 1e-9
RADIUS_INFLATION = 4


@dataclass(frozen=True)
class Root:
    value: complex
    radius: float
    multiplicity: int = 1

    @property
    def modulus(self) -> float:
        return abs(self.value)


def _polyval(coeffs_desc, z):
    acc = mpmath.mpc(0)
    for c in coeffs_desc:
        acc = acc * z + c
    return acc


def _aberth(p: IntPolynomial, dps: int, max_iter: int = 500) -> list[tuple[mpmath.mpc, mpmath.mpf]]:
    """Simple roots of a squarefree integer polynomial, each with a residual radius."""
    n = p.degree
    if n < 1:
        return []
    with mpmath.workdps(dps):
        desc = [mpmath.mpf(c) for c in reversed(p.coeffs)]
        if n == 1:
            return [(mpmath.mpc(-desc[1] / desc[0]), mpmath.mpf(0))]
        ddesc = [c * (n - i) for i, c in enumerate(desc[:-1])]
        lead = desc[0]
        bound = 2 * max(abs(desc[k] / lead) ** (mpmath.mpf(1) / k) for k in range(1, n + 1))
        center = -desc[1] / (n * lead)
        z = [center + bound * mpmath.expj(2 * mpmath.pi * k / n + mpmath.mpf("0.4")) for k in range(n)]
        eps = mpmath.mpf(10) ** (-(dps - 6))
        for _ in range(max_iter):
            biggest = mpmath.mpf(0)
            for k in range(n):
                pz = _polyval(desc, z[k])
                if pz == 0:
                    continue
                ratio = pz / _polyval(ddesc, z[k])
                s = mpmath.fsum(1 / (z[k] - z[j]) for j in range(n) if j != k)
                w = ratio / (1 - ratio * s)
                z[k] -= w
                biggest = max(biggest, abs(w) / max(1, abs(z[k])))
            if biggest < eps:
                break
        else:
            raise ConvergenceError(f"Aberth iteration did not converge for {p}")
        out = []
        floor = mpmath.mpf(10) ** (-(dps - 10))
        for zk in z:
            pz = abs(_polyval(desc, zk))
            dpz = abs(_polyval(ddesc, zk))
            r = RADIUS_INFLATION * n * pz / dpz if dpz else mpmath.inf
            out.append((zk, max(r, floor * max(1, abs(zk)))))
        return _symmetrize(out)


def _symmetrize(roots):
    """Snap near-real roots to the real axis and make complex roots come in exact conjugate pairs."""
    real, upper = [], []
    for z, r in roots:
        if abs(z.imag) <= r:
            real.append((mpmath.mpc(z.real, 0), r))
        elif z.imag > 0:
            upper.append((z, r))
    out = real[:]
    for z, r in upper:
        out.append((z, r))
        out.append((mpmath.conj(z), r))
    if len(out) != len(roots):
        # a conjugate partner was lost to a snapping decision; fall back to the raw roots
        return roots
    return out


def poly_roots(p: IntPolynomial, precision: float = 1e-12) -> list[Root]:
    """All complex roots with radii, multiplicities from the exact squarefree decomposition."""
    if p.is_zero():
        raise ValueError("the zero polynomial has no finite root set")
    dps = max(DPS, int(-math.log10(precision)) + 20) if precision > 0 else DPS
    out = []
    for g, mult in squarefree_decomposition(p):
        for z, r in _aberth(g, dps):
            out.append(Root(complex(z), float(r), mult))
    out.sort(key=lambda t: (-abs(t.value), -t.value.real, -t.value.imag))
    return out


@dataclass(frozen=True)
class Eigen:
    value: mpmath.mpc
    radius: mpmath.mpf
    factor: int
    alg_mult: int
    min_mult: int


@dataclass
class LimitStructure:
    """Limit points of ``A^n / (n^ell delta^n)``.

    ``period`` is an int when every dominant phase is a root of unity; then
    ``limits[r]`` is the limit along ``n = r mod period``.  When exactly one
    conjugate pair of dominant phases is irrational, ``period`` is
    ``"aperiodic"``, ``limits`` is empty, and the limit set is the family
    ``base[r] + cos(phi) U + sin(phi) W`` over ``r`` and all ``phi``
    (``circle = (U, W)``).  With more irrational pairs, ``circle`` is None
    and callers must iterate.
    """

    period: int | str
    limits: list[np.ndarray]
    base_period: int = 1
    base: list[np.ndarray] = field(default_factory=list)
    circle: tuple[np.ndarray, np.ndarray] | None = None

    @property
    def closed_form(self) -> bool:
        return self.period != "aperiodic" or self.circle is not None


@dataclass
class MatrixAnalysis:
    matrix: IntMatrix
    charpoly: IntPolynomial
    factors: tuple[tuple[IntPolynomial, int, int], ...]
    eigen: list[Eigen]
    delta: mpmath.mpf
    delta_radius: mpmath.mpf
    dominant: list[int]
    contributing: list[int]
    ell: int
    second_modulus_ratio: float
    min_modulus: mpmath.mpf
    zero_test: IntMatrix
    periodic_test: IntMatrix
    _limits: LimitStructure | None = None

    @property
    def n(self) -> int:
        return self.matrix.n

    @property
    def diagonalizable(self) -> bool:
        return all(a == 1 for _, _, a in self.factors)

    def modulus_groups(self) -> list[tuple[float, float]]:
        """Distinct eigenvalue moduli (descending), merging overlapping intervals."""
        items = sorted(((abs(e.value), e.radius) for e in self.eigen), key=lambda t: -t[0])
        groups: list[list] = []
        for m, r in items:
            if groups and groups[-1][0] - groups[-1][1] <= m + r:
                groups[-1][1] = max(groups[-1][1], r)
                continue
            groups.append([m, r])
        return [(float(m), float(r)) for m, r in groups]

    def limit_structure(self) -> LimitStructure:
        if self._limits is None:
            self._limits = _build_limits(self)
        return self._limits

    def dominant_rotation_period(self) -> int | str:
        return self.limit_structure().period


@dataclass(frozen=True)
class SpectralData:
    charpoly: IntPolynomial
    eigenvalues: tuple[Root, ...]
    delta: float
    delta_radius: float
    ell: int
    ell_provenance: str
    dominant_rotation_period: int | str
    second_modulus_ratio: float

    def to_json(self) -> dict:
        return {
            "charpoly": list(self.charpoly.coeffs),
            "eigenvalues": [
                {"re": r.value.real, "im": r.value.imag, "radius": r.radius, "multiplicity": r.multiplicity}
                for r in self.eigenvalues
            ],
            "delta": self.delta,
            "delta_radius": self.delta_radius,
            "ell": self.ell,
            "ell_provenance": self.ell_provenance,
            "rotation_period": self.dominant_rotation_period,
            "second_modulus_ratio": self.second_modulus_ratio,
        }


@lru_cache(maxsize=2048)
def analyze(A: IntMatrix) -> MatrixAnalysis:
    """Exact factorization plus high-precision eigenvalues of ``A`` (cached)."""
    chi = char_poly(A)
    mfacs = minimal_polynomial(A)
    from .linalg import factor_poly

    cfacs = factor_poly(chi)
    factors = tuple((f, c, a) for (f, c), (_, a) in zip(cfacs, mfacs))
    eigen: list[Eigen] = []
    for idx, (f, c, a) in enumerate(factors):
        for z, r in _aberth(f, DPS):
            eigen.append(Eigen(z, r, idx, c, a))
    with mpmath.workdps(DPS):
        mods = [abs(e.value) for e in eigen]
        top = max(range(len(eigen)), key=lambda i: mods[i])
        delta, delta_radius = mods[top], eigen[top].radius
        dominant = [i for i, e in enumerate(eigen) if mods[i] + e.radius >= delta - delta_radius]
        ell = max(eigen[i].min_mult for i in dominant) - 1
        contributing = [i for i in dominant if eigen[i].min_mult == ell + 1]
        rest = [mods[i] for i in range(len(eigen)) if i not in dominant]
        second = float(max(rest) / delta) if rest and delta > 0 else 0.0
        min_modulus = min(mods)
    contrib_factors = {eigen[i].factor for i in contributing}
    zero_poly = expand_factored((f, a - 1 if i in contrib_factors else a) for i, (f, _, a) in enumerate(factors))
    cyclo = expand_factored((f, 1) for f, _, _ in factors if is_cyclotomic(f))
    return MatrixAnalysis(
        matrix=A,
        charpoly=chi,
        factors=factors,
        eigen=eigen,
        delta=delta,
        delta_radius=delta_radius,
        dominant=dominant,
        contributing=contributing,
        ell=ell,
        second_modulus_ratio=second,
        min_modulus=min_modulus,
        zero_test=poly_eval_matrix(zero_poly, A),
        periodic_test=poly_eval_matrix(cyclo, A),
    )


def _rational_phase(theta: float) -> tuple[int, int] | None:
    """``(k, p)`` with ``|theta - 2 pi k / p| < ANGLE_TOL`` and ``p <= P_MAX`` minimal."""
    for p in range(1, P_MAX + 1):
        k = round(theta * p / (2 * math.pi))
        if abs(theta - 2 * math.pi * k / p) < ANGLE_TOL:
            return k % p, p
    return None


def _mp_matmul(X, Y):
    n = len(X)
    return [[mpmath.fsum(X[i][k] * Y[k][j] for k in range(n)) for j in range(n)] for i in range(n)]


def _top_term(an: MatrixAnalysis, k: int):
    """``Q_k`` for the contributing eigenvalue ``k`` as an mpmath complex matrix."""
    e = an.eigen[k]
    lam = e.value
    n = an.n
    A = [[mpmath.mpc(x) for x in row] for row in an.matrix.rows]
    eye = [[mpmath.mpc(int(i == j)) for j in range(n)] for i in range(n)]
    # r_k(x) = (f(x)/(x - lam))^s * prod_{j != own} f_j(x)^{a_j}, assembled as a coefficient list
    f_own, _, s = an.factors[e.factor]
    desc = [mpmath.mpc(c) for c in reversed(f_own.coeffs)]
    quot = [desc[0]]
    for c in desc[1:-1]:
        quot.append(c + quot[-1] * lam)
    poly = [mpmath.mpc(1)]
    for _ in range(s):
        poly = _pmul(poly, quot)
    for j, (f, _, a) in enumerate(an.factors):
        if j != e.factor:
            fd = [mpmath.mpc(c) for c in reversed(f.coeffs)]
            for _ in range(a):
                poly = _pmul(poly, fd)
    rA = [[mpmath.mpc(0)] * n for _ in range(n)]
    for c in poly:
        rA = _mp_matmul(rA, A)
        for i in range(n):
            rA[i][i] += c
    r_lam = _polyval(poly, lam)
    N = [[A[i][j] - (lam if i == j else 0) for j in range(n)] for i in range(n)]
    top = eye
    for _ in range(an.ell):
        top = _mp_matmul(top, N)
    top = _mp_matmul(top, rA)
    scale = 1 / (r_lam * lam ** an.ell * math.factorial(an.ell))
    return [[top[i][j] * scale for j in range(n)] for i in range(n)]


def _pmul(a, b):
    out = [mpmath.mpc(0)] * (len(a) + len(b) - 1)
    for i, x in enumerate(a):
        for j, y in enumerate(b):
            out[i + j] += x * y
    return out


def _build_limits(an: MatrixAnalysis) -> LimitStructure:
    n = an.n
    with mpmath.workdps(DPS):
        rational: list[tuple[int, int, list]] = []
        irrational: list[tuple[mpmath.mpf, list]] = []
        for k in an.contributing:
            lam = an.eigen[k].value
            theta = float(mpmath.arg(lam))
            Q = _top_term(an, k)
            ph = _rational_phase(theta)
            if ph is None:
                irrational.append((mpmath.arg(lam), Q))
            else:
                rational.append((ph[0], ph[1], Q))
        p = 1
        for _, q, _ in rational:
            p = lcm(p, q)

        def combo(r: int) -> np.ndarray:
            acc = [[mpmath.mpc(0)] * n for _ in range(n)]
            for k, q, Q in rational:
                u = mpmath.expjpi(mpmath.mpf(2 * k * r) / q)
                for i in range(n):
                    for j in range(n):
                        acc[i][j] += u * Q[i][j]
            return np.array([[float(acc[i][j].real) for j in range(n)] for i in range(n)])

        base = [combo(r) for r in range(p)]
        if not irrational:
            return LimitStructure(period=p, limits=base, base_period=p, base=base)
        if len(irrational) == 2 and abs(irrational[0][0] + irrational[1][0]) < 1e-20:
            _, Q = max(irrational, key=lambda t: t[0])
            U = np.array([[float(2 * Q[i][j].real) for j in range(n)] for i in range(n)])
            W = np.array([[float(-2 * Q[i][j].imag) for j in range(n)] for i in range(n)])
            return LimitStructure(period="aperiodic", limits=[], base_period=p, base=base, circle=(U, W))
        return LimitStructure(period="aperiodic", limits=[], base_period=p, base=base, circle=None)


def _require_nonsingular(A: IntMatrix) -> None:
    if det(A) == 0:
        raise SingularMatrixError("operation requires det(A) != 0")


def spectral_data(A: IntMatrix) -> SpectralData:
    _require_nonsingular(A)
    an = analyze(A)
    roots = sorted(
        (Root(complex(e.value), float(e.radius), e.alg_mult) for e in an.eigen),
        key=lambda t: (-abs(t.value), -t.value.real, -t.value.imag),
    )
    period = an.dominant_rotation_period() if an.delta > 1 + an.delta_radius else 1
    return SpectralData(
        charpoly=an.charpoly,
        eigenvalues=tuple(roots),
        delta=float(an.delta),
        delta_radius=float(an.delta_radius),
        ell=an.ell,
        ell_provenance="exact",
        dominant_rotation_period=period,
        second_modulus_ratio=an.second_modulus_ratio,
    )


def dynamical_degree(A: IntMatrix) -> tuple[float, float]:
    """``(delta, radius)`` with ``delta = rho(A)``."""
    _require_nonsingular(A)
    an = analyze(A)
    return float(an.delta), float(an.delta_radius)


def ell_of(A: IntMatrix) -> int:
    """Largest Jordan block size minus one among eigenvalues of modulus ``rho(A)``."""
    _require_nonsingular(A)
    return analyze(A).ell


def ell_rank_chain(A: IntMatrix) -> int | None:
    """``ell`` from rank stabilization of ``(A - lambda I)^k``; None unless every dominant eigenvalue is an integer."""
    _require_nonsingular(A)
    an = analyze(A)
    lams = set()
    for i in an.dominant:
        f = an.factors[an.eigen[i].factor][0]
        if f.degree != 1:
            return None
        lams.add(-f.coeffs[0])
    best = 0
    eye = IntMatrix.identity(A.n)
    for lam in lams:
        B = A - eye.scale(lam)
        Bk, prev = B, rank(B)
        k = 1
        while True:
            Bk = mat_mul(Bk, B)
            r = rank(Bk)
            if r == prev:
                break
            prev, k = r, k + 1
        best = max(best, k)
    return best - 1


def ell_growth_estimate(A: IntMatrix, n: int = 128) -> float:
    """Numeric growth exponent of ``||A^k|| / delta^k`` (a cross-check only).

    Compares peaks over ``[n, n + w)`` and ``[2n, 2n + 2w)`` so polynomial
    growth ``k^ell`` shows up as a difference of ``ell * log 2``.
    """
    delta, _ = dynamical_degree(A)
    w = 2 * P_MAX

    def peak(start: int, width: int) -> float:
        Ak = mat_pow(A, start)
        best = -math.inf
        for k in range(start, start + width):
            norm = max(abs(x) for row in Ak.rows for x in row)
            best = max(best, math.log(norm) - k * math.log(delta))
            Ak = mat_mul(Ak, A)
        return best

    return (peak(2 * n, 2 * w) - peak(n, w)) / math.log(2)


def power_iteration_radius(A: IntMatrix, n: int = 200, seed: int = 0) -> float:
    """Spectral radius from the growth of ``||A^k x||`` on a float copy (peaks over windows)."""
    rng = np.random.default_rng(seed)
    M = np.array(A.tolist(), dtype=float)
    x = rng.standard_normal(A.n)
    log_scale = 0.0
    logs = []
    for _ in range(2 * n):
        x = M @ x
        s = np.linalg.norm(x)
        if s == 0:
            return 0.0
        log_scale += math.log(s)
        x /= s
        logs.append(log_scale)
    w = max(1, n // 4)
    first = max(logs[n - w:n])
    second = max(logs[2 * n - w:2 * n])
    return math.exp((second - first) / n)


def dominant_limit_structure(A: IntMatrix) -> LimitStructure:
    _require_nonsingular(A)
    an = analyze(A)
    if an.delta <= 1 + an.delta_radius:
        raise DegenerateDynamicsError(f"rho(A) = {float(an.delta):.12g} is not > 1")
    return an.limit_structure()

