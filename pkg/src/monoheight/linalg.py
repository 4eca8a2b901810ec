"""Exact integer matrix and polynomial arithmetic.

Everything here works on Python ints, so there is no overflow path: entries of
``A**n`` grow like ``delta**n`` and every height computation downstream relies
on them being exact.
"""

from __future__ import annotations

import json
from dataclasses import dataclass
from functools import lru_cache
from math import gcd
from typing import Iterable, Sequence

import sympy

from .errors import DimensionMismatchError, SingularMatrixError

__all__ = [
    "IntMatrix",
    "IntPolynomial",
    "mat_mul",
    "mat_pow",
    "det",
    "adjugate",
    "backward_matrix",
    "char_poly",
    "rank",
    "poly_eval_matrix",
    "minimal_polynomial",
    "factor_poly",
    "squarefree_decomposition",
    "is_irreducible",
    "is_cyclotomic",
]


def _parse_int(value) -> int:
    if isinstance(value, bool):
        raise TypeError("booleans are not matrix entries")
    if isinstance(value, int):
        return value
    if isinstance(value, str):
        return int(value.strip())
    if isinstance(value, float) and value.is_integer():
        return int(value)
    raise TypeError(f"not an integer entry: {value!r}")


@dataclass(frozen=True)
class IntMatrix:
    """Square matrix of arbitrary-precision integers (immutable, hashable)."""

    rows: tuple[tuple[int, ...], ...]

    def __post_init__(self):
        rows = tuple(tuple(_parse_int(x) for x in r) for r in self.rows)
        n = len(rows)
        if n == 0:
            raise DimensionMismatchError("matrix dimension must be at least 1")
        if any(len(r) != n for r in rows):
            raise DimensionMismatchError("matrix must be square")
        object.__setattr__(self, "rows", rows)

    @classmethod
    def from_rows(cls, rows: Iterable[Iterable]) -> "IntMatrix":
        return cls(tuple(tuple(r) for r in rows))

    @classmethod
    def identity(cls, n: int) -> "IntMatrix":
        return cls.scalar(n, 1)

    @classmethod
    def scalar(cls, n: int, d: int) -> "IntMatrix":
        return cls(tuple(tuple(d if i == j else 0 for j in range(n)) for i in range(n)))

    @classmethod
    def zero(cls, n: int) -> "IntMatrix":
        return cls.scalar(n, 0)

    @property
    def n(self) -> int:
        return len(self.rows)

    def __getitem__(self, ij: tuple[int, int]) -> int:
        i, j = ij
        return self.rows[i][j]

    def __iter__(self):
        return iter(self.rows)

    def __matmul__(self, other: "IntMatrix") -> "IntMatrix":
        return mat_mul(self, other)

    def __add__(self, other: "IntMatrix") -> "IntMatrix":
        _check_same(self, other)
        return IntMatrix(tuple(tuple(a + b for a, b in zip(r, s)) for r, s in zip(self.rows, other.rows)))

    def __sub__(self, other: "IntMatrix") -> "IntMatrix":
        _check_same(self, other)
        return IntMatrix(tuple(tuple(a - b for a, b in zip(r, s)) for r, s in zip(self.rows, other.rows)))

    def __neg__(self) -> "IntMatrix":
        return self.scale(-1)

    def scale(self, c: int) -> "IntMatrix":
        return IntMatrix(tuple(tuple(c * a for a in r) for r in self.rows))

    def __pow__(self, k: int) -> "IntMatrix":
        return mat_pow(self, k)

    def transpose(self) -> "IntMatrix":
        return IntMatrix(tuple(zip(*self.rows)))

    def apply(self, v: Sequence[int]) -> tuple[int, ...]:
        if len(v) != self.n:
            raise DimensionMismatchError(f"vector of length {len(v)} for {self.n}x{self.n} matrix")
        return tuple(sum(a * x for a, x in zip(r, v)) for r in self.rows)

    def trace(self) -> int:
        return sum(self.rows[i][i] for i in range(self.n))

    def is_zero(self) -> bool:
        return all(a == 0 for r in self.rows for a in r)

    def tolist(self) -> list[list[int]]:
        return [list(r) for r in self.rows]

    def to_json(self) -> dict:
        return {"n": self.n, "rows": [[_json_int(a) for a in r] for r in self.rows]}

    @classmethod
    def from_json(cls, data) -> "IntMatrix":
        if isinstance(data, str):
            data = json.loads(data)
        if isinstance(data, dict):
            m = cls.from_rows(data["rows"])
            if "n" in data and int(data["n"]) != m.n:
                raise DimensionMismatchError(f"declared n={data['n']} but rows give {m.n}")
            return m
        return cls.from_rows(data)

    def __str__(self) -> str:
        return "[" + ", ".join("[" + ", ".join(map(str, r)) + "]" for r in self.rows) + "]"


_JSON_SAFE = 2**53


def _json_int(a: int):
    return a if -_JSON_SAFE < a < _JSON_SAFE else str(a)


def _check_same(A: IntMatrix, B: IntMatrix) -> None:
    if A.n != B.n:
        raise DimensionMismatchError(f"dimensions differ: {A.n} vs {B.n}")


def mat_mul(A: IntMatrix, B: IntMatrix) -> IntMatrix:
    _check_same(A, B)
    cols = tuple(zip(*B.rows))
    return IntMatrix(tuple(tuple(sum(a * b for a, b in zip(r, c)) for c in cols) for r in A.rows))


def mat_pow(A: IntMatrix, k: int) -> IntMatrix:
    """``A**k`` by binary exponentiation; ``A**0`` is the identity."""
    if k < 0:
        raise ValueError("negative matrix powers are not integral in general")
    result = IntMatrix.identity(A.n)
    base = A
    while k:
        if k & 1:
            result = mat_mul(result, base)
        k >>= 1
        if k:
            base = mat_mul(base, base)
    return result


def _det_cofactor(rows: Sequence[Sequence[int]]) -> int:
    n = len(rows)
    if n == 1:
        return rows[0][0]
    if n == 2:
        return rows[0][0] * rows[1][1] - rows[0][1] * rows[1][0]
    total = 0
    for j, a in enumerate(rows[0]):
        if a:
            minor = [r[:j] + r[j + 1:] for r in rows[1:]]
            total += (-1) ** j * a * _det_cofactor(minor)
    return total


def _bareiss(rows: Sequence[Sequence[int]]) -> tuple[int, int]:
    """Fraction-free elimination. Returns (rank, signed last pivot).

    For a full-rank square input the second value is the determinant.
    """
    m = [list(r) for r in rows]
    nrows = len(m)
    ncols = len(m[0]) if m else 0
    sign = 1
    prev = 1
    r = 0
    for c in range(ncols):
        if r == nrows:
            break
        pivot = next((i for i in range(r, nrows) if m[i][c] != 0), None)
        if pivot is None:
            continue
        if pivot != r:
            m[r], m[pivot] = m[pivot], m[r]
            sign = -sign
        for i in range(r + 1, nrows):
            for j in range(c + 1, ncols):
                m[i][j] = (m[i][j] * m[r][c] - m[i][c] * m[r][j]) // prev
            m[i][c] = 0
        prev = m[r][c]
        r += 1
    return r, sign * prev


def det(A: IntMatrix) -> int:
    if A.n <= 3:
        return _det_cofactor(A.rows)
    r, d = _bareiss(A.rows)
    return d if r == A.n else 0


def rank(A: IntMatrix) -> int:
    """Rank over the rationals."""
    return _bareiss(A.rows)[0]


def adjugate(A: IntMatrix) -> IntMatrix:
    n = A.n
    if n == 1:
        return IntMatrix(((1,),))
    rows = A.rows
    cof = [[0] * n for _ in range(n)]
    for i in range(n):
        for j in range(n):
            minor = [r[:j] + r[j + 1:] for k, r in enumerate(rows) if k != i]
            cof[i][j] = (-1) ** (i + j) * (_det_cofactor(minor) if n - 1 <= 3 else _minor_det(minor))
    # adjugate is the transposed cofactor matrix
    return IntMatrix(tuple(tuple(cof[j][i] for j in range(n)) for i in range(n)))


def _minor_det(rows) -> int:
    r, d = _bareiss(rows)
    return d if r == len(rows) else 0


def backward_matrix(A: IntMatrix) -> IntMatrix:
    """``A' = |det A| * A^{-1} = sgn(det A) * adj(A)``."""
    d = det(A)
    if d == 0:
        raise SingularMatrixError("backward matrix needs det(A) != 0")
    adj = adjugate(A)
    return adj if d > 0 else -adj


@dataclass(frozen=True)
class IntPolynomial:
    """Integer polynomial, coefficients in ascending degree order."""

    coeffs: tuple[int, ...]

    def __post_init__(self):
        c = [_parse_int(x) for x in self.coeffs]
        while c and c[-1] == 0:
            c.pop()
        object.__setattr__(self, "coeffs", tuple(c))

    @classmethod
    def from_sympy(cls, p: sympy.Poly) -> "IntPolynomial":
        return cls(tuple(int(c) for c in reversed(p.all_coeffs())))

    def to_sympy(self) -> sympy.Poly:
        return sympy.Poly(list(reversed(self.coeffs)) or [0], _X, domain="ZZ")

    @property
    def degree(self) -> int:
        return len(self.coeffs) - 1

    @property
    def leading(self) -> int:
        return self.coeffs[-1] if self.coeffs else 0

    def is_zero(self) -> bool:
        return not self.coeffs

    def is_monic(self) -> bool:
        return self.leading == 1

    def __call__(self, x):
        acc = 0
        for c in reversed(self.coeffs):
            acc = acc * x + c
        return acc

    def derivative(self) -> "IntPolynomial":
        return IntPolynomial(tuple(k * c for k, c in enumerate(self.coeffs))[1:])

    def __mul__(self, other: "IntPolynomial") -> "IntPolynomial":
        if self.is_zero() or other.is_zero():
            return IntPolynomial(())
        out = [0] * (len(self.coeffs) + len(other.coeffs) - 1)
        for i, a in enumerate(self.coeffs):
            for j, b in enumerate(other.coeffs):
                out[i + j] += a * b
        return IntPolynomial(tuple(out))

    def __pow__(self, k: int) -> "IntPolynomial":
        out = IntPolynomial((1,))
        for _ in range(k):
            out = out * self
        return out

    def content(self) -> int:
        g = 0
        for c in self.coeffs:
            g = gcd(g, c)
        return g

    def __str__(self) -> str:
        if not self.coeffs:
            return "0"
        terms = []
        for k in range(self.degree, -1, -1):
            c = self.coeffs[k]
            if c == 0:
                continue
            mono = "" if k == 0 else ("x" if k == 1 else f"x^{k}")
            if mono and abs(c) == 1:
                body = mono
            else:
                body = f"{abs(c)}{mono}"
            sign = "-" if c < 0 else "+"
            terms.append((sign, body))
        first_sign, first = terms[0]
        s = ("-" if first_sign == "-" else "") + first
        for sign, body in terms[1:]:
            s += f" {sign} {body}"
        return s


_X = sympy.Symbol("x")


def char_poly(A: IntMatrix) -> IntPolynomial:
    """Monic ``det(xI - A)`` by Faddeev-LeVerrier (all divisions are exact)."""
    n = A.n
    coeffs = [0] * (n + 1)
    coeffs[n] = 1
    M = IntMatrix.zero(n)
    eye = IntMatrix.identity(n)
    for k in range(1, n + 1):
        M = mat_mul(A, M) + eye.scale(coeffs[n - k + 1])
        t = mat_mul(A, M).trace()
        q, r = divmod(-t, k)
        assert r == 0, "Faddeev-LeVerrier division must be exact over Z"
        coeffs[n - k] = q
    return IntPolynomial(tuple(coeffs))


def poly_eval_matrix(p: IntPolynomial, A: IntMatrix) -> IntMatrix:
    """Exact ``p(A)`` by Horner's rule."""
    n = A.n
    acc = IntMatrix.zero(n)
    eye = IntMatrix.identity(n)
    for c in reversed(p.coeffs):
        acc = mat_mul(acc, A) + eye.scale(c)
    return acc


@lru_cache(maxsize=4096)
def factor_poly(p: IntPolynomial) -> tuple[tuple[IntPolynomial, int], ...]:
    """Irreducible factorization over Q of a monic integer polynomial.

    Factors are primitive with positive leading coefficient, ordered by
    (degree, coefficients) so results are deterministic.
    """
    if p.is_zero():
        raise ValueError("cannot factor the zero polynomial")
    _, facs = p.to_sympy().factor_list()
    out = []
    for f, m in facs:
        q = IntPolynomial.from_sympy(f)
        if q.leading < 0:
            q = IntPolynomial(tuple(-c for c in q.coeffs))
        out.append((q, int(m)))
    out.sort(key=lambda t: (t[0].degree, t[0].coeffs))
    return tuple(out)


def squarefree_decomposition(p: IntPolynomial) -> tuple[tuple[IntPolynomial, int], ...]:
    """Yun decomposition ``p = c * prod g_i**i`` with pairwise coprime squarefree ``g_i``."""
    _, parts = p.to_sympy().sqf_list()
    out = []
    for g, m in parts:
        q = IntPolynomial.from_sympy(g)
        if q.leading < 0:
            q = IntPolynomial(tuple(-c for c in q.coeffs))
        out.append((q, int(m)))
    out.sort(key=lambda t: t[1])
    return tuple(out)


def is_irreducible(p: IntPolynomial) -> bool:
    facs = factor_poly(p)
    return len(facs) == 1 and facs[0][1] == 1


@lru_cache(maxsize=1024)
def is_cyclotomic(p: IntPolynomial) -> int:
    """Return ``k`` if ``p`` is the k-th cyclotomic polynomial, else 0."""
    if not p.is_monic() or p.degree < 1:
        return 0
    d = p.degree
    # phi(k) >= sqrt(k/2), so phi(k) = d forces k <= 2 d^2
    for k in range(1, 2 * d * d + 3):
        if sympy.totient(k) == d:
            if IntPolynomial.from_sympy(sympy.Poly(sympy.cyclotomic_poly(k, _X), _X)) == p:
                return k
    return 0


def minimal_polynomial(A: IntMatrix) -> tuple[tuple[IntPolynomial, int], ...]:
    """Minimal polynomial of ``A`` as a factored product ``prod f_i**a_i``.

    Starts from the characteristic factorization and lowers each exponent while
    the product still annihilates ``A``.
    """
    facs = list(factor_poly(char_poly(A)))
    exps = [m for _, m in facs]
    for i, (f, _) in enumerate(facs):
        while exps[i] > 1:
            exps[i] -= 1
            if not poly_eval_matrix(_product(facs, exps), A).is_zero():
                exps[i] += 1
                break
    return tuple((f, e) for (f, _), e in zip(facs, exps))


def _product(facs, exps) -> IntPolynomial:
    out = IntPolynomial((1,))
    for (f, _), e in zip(facs, exps):
        out = out * (f ** e)
    return out


def expand_factored(facs: Iterable[tuple[IntPolynomial, int]]) -> IntPolynomial:
    out = IntPolynomial((1,))
    for f, e in facs:
        out = out * (f ** e)
    return out
