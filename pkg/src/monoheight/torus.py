"""Points of the split torus G_m^N over Q in factored form, and their Weil height.

A point stores a sign per coordinate and, for each prime ``p``, the vector of
``p``-adic valuations of the coordinates.  The monomial map of an integer
matrix acts linearly on those vectors, so orbits can be iterated exactly far
past the point where the rationals themselves would be unwritable.
"""

from __future__ import annotations

import json
import math
from dataclasses import dataclass
from decimal import Decimal, localcontext
from fractions import Fraction
from functools import lru_cache
from typing import Iterable, Mapping, Sequence

from .errors import DimensionMismatchError
from .factor import factorint
from .linalg import IntMatrix

__all__ = [
    "TorusPoint",
    "HeightValue",
    "point_from_rationals",
    "apply_map",
    "weil_height",
    "invert_point",
    "power_point",
    "is_root_of_unity_point",
    "direct_height",
    "place_log_vectors",
    "height_functional",
]

_DEC_PREC = 60


@dataclass(frozen=True)
class HeightValue:
    """Nonnegative height (natural log scale).

    The true height is ``mantissa * 2**scale``; ``scale`` is nonzero only when
    exponents are too large for a double.
    """

    mantissa: float
    exact_zero: bool
    scale: int = 0

    @property
    def value(self) -> float:
        try:
            return math.ldexp(self.mantissa, self.scale)
        except OverflowError:
            return math.inf

    def log(self) -> float:
        if self.exact_zero:
            return -math.inf
        return math.log(self.mantissa) + self.scale * math.log(2)

    def __float__(self) -> float:
        return self.value


@dataclass(frozen=True)
class TorusPoint:
    """Point of G_m^N(Q): ``x_i = signs[i] * prod_p p**exponents[p][i]``.

    ``exponents`` is a tuple of ``(prime, vector)`` pairs in increasing prime
    order; primes whose vector vanishes are dropped.
    """

    signs: tuple[int, ...]
    exponents: tuple[tuple[int, tuple[int, ...]], ...] = ()

    def __post_init__(self):
        signs = tuple(int(s) for s in self.signs)
        if not signs:
            raise DimensionMismatchError("a torus point needs at least one coordinate")
        if any(s not in (1, -1) for s in signs):
            raise ValueError(f"signs must be +1 or -1, got {signs}")
        n = len(signs)
        table: dict[int, list[int]] = {}
        for p, vec in self.exponents:
            p = int(p)
            vec = [int(e) for e in vec]
            if len(vec) != n:
                raise DimensionMismatchError(f"exponent vector for {p} has length {len(vec)}, expected {n}")
            acc = table.setdefault(p, [0] * n)
            for i, e in enumerate(vec):
                acc[i] += e
        exps = tuple((p, tuple(v)) for p, v in sorted(table.items()) if any(v))
        object.__setattr__(self, "signs", signs)
        object.__setattr__(self, "exponents", exps)

    @property
    def n(self) -> int:
        return len(self.signs)

    @property
    def primes(self) -> tuple[int, ...]:
        return tuple(p for p, _ in self.exponents)

    def table(self) -> dict[int, tuple[int, ...]]:
        return dict(self.exponents)

    @classmethod
    def from_table(cls, signs: Sequence[int], table: Mapping[int, Sequence[int]]) -> "TorusPoint":
        return cls(tuple(signs), tuple((int(p), tuple(v)) for p, v in table.items()))

    @classmethod
    def identity(cls, n: int) -> "TorusPoint":
        return cls((1,) * n)

    def coords(self) -> tuple[Fraction, ...]:
        """The coordinates as exact rationals (only sensible for modest exponents)."""
        out = []
        for i, s in enumerate(self.signs):
            num, den = 1, 1
            for p, v in self.exponents:
                if v[i] > 0:
                    num *= p ** v[i]
                elif v[i] < 0:
                    den *= p ** (-v[i])
            out.append(Fraction(s * num, den))
        return tuple(out)

    def max_abs_exponent(self) -> int:
        return max((abs(e) for _, v in self.exponents for e in v), default=0)

    def to_json(self) -> dict:
        def enc(e: int):
            return e if abs(e) < 2**53 else str(e)

        return {"signs": list(self.signs), "primes": {str(p): [enc(e) for e in v] for p, v in self.exponents}}

    @classmethod
    def from_json(cls, data) -> "TorusPoint":
        if isinstance(data, str):
            data = json.loads(data)
        if isinstance(data, (list, tuple)):
            return point_from_rationals(data)
        if "coords" in data:
            return point_from_rationals(data["coords"])
        primes = data.get("primes", {})
        signs = data.get("signs")
        if signs is None:
            n = len(next(iter(primes.values()))) if primes else 0
            signs = [1] * n
        return cls(tuple(signs), tuple((int(p), tuple(int(e) for e in v)) for p, v in primes.items()))

    def __str__(self) -> str:
        if self.max_abs_exponent() <= 64:
            return "(" + ", ".join(str(c) for c in self.coords()) + ")"
        return json.dumps(self.to_json())


def _as_fraction(x) -> Fraction:
    if isinstance(x, Fraction):
        return x
    if isinstance(x, float):
        raise TypeError("float coordinates are ambiguous; pass a string or Fraction")
    return Fraction(x)


def point_from_rationals(coords: Iterable, **budget) -> TorusPoint:
    """Factor nonzero rationals into a :class:`TorusPoint`.

    ``budget`` is forwarded to :func:`monoheight.factor.factorint`.
    """
    fr = [_as_fraction(c) for c in coords]
    n = len(fr)
    if n == 0:
        raise DimensionMismatchError("empty coordinate list")
    if any(c == 0 for c in fr):
        raise ValueError("torus coordinates must be nonzero")
    table: dict[int, list[int]] = {}
    for i, c in enumerate(fr):
        for p, k in factorint(c.numerator, **budget).items():
            table.setdefault(p, [0] * n)[i] += k
        for p, k in factorint(c.denominator, **budget).items():
            table.setdefault(p, [0] * n)[i] -= k
    signs = tuple(1 if c > 0 else -1 for c in fr)
    return TorusPoint.from_table(signs, table)


def apply_map(A: IntMatrix, P: TorusPoint) -> TorusPoint:
    """Monomial map: exponent vectors ``e -> A e``; sign ``i -> prod_j s_j**a_ij``."""
    if A.n != P.n:
        raise DimensionMismatchError(f"{A.n}x{A.n} matrix applied to a point of dimension {P.n}")
    neg = [s < 0 for s in P.signs]
    signs = tuple(-1 if sum(1 for a, m in zip(row, neg) if m and a % 2) % 2 else 1 for row in A.rows)
    return TorusPoint(signs, tuple((p, A.apply(v)) for p, v in P.exponents))


def invert_point(P: TorusPoint) -> TorusPoint:
    return TorusPoint(P.signs, tuple((p, tuple(-e for e in v)) for p, v in P.exponents))


def power_point(P: TorusPoint, m: int) -> TorusPoint:
    """Coordinatewise ``m``-th power."""
    signs = tuple(s if m % 2 else 1 for s in P.signs)
    return TorusPoint(signs, tuple((p, tuple(m * e for e in v)) for p, v in P.exponents))


def is_root_of_unity_point(P: TorusPoint) -> bool:
    """Over Q the only roots of unity are +-1, i.e. all exponents vanish."""
    return not P.exponents


@lru_cache(maxsize=None)
def _dec_log(p: int) -> Decimal:
    with localcontext() as ctx:
        ctx.prec = _DEC_PREC
        return Decimal(p).ln()


def _height_decimal(P: TorusPoint) -> Decimal:
    with localcontext() as ctx:
        ctx.prec = _DEC_PREC
        ctx.Emax = 10**15
        ctx.Emin = -(10**15)
        total = Decimal(0)
        arch = [Decimal(0)] * P.n
        for p, v in P.exponents:
            lp = _dec_log(p)
            worst = -min(0, min(v))
            if worst:
                total += worst * lp
            for i, e in enumerate(v):
                if e:
                    arch[i] += e * lp
        top = max(arch)
        if top > 0:
            total += top
        return +total


def weil_height(P: TorusPoint) -> HeightValue:
    """Absolute logarithmic Weil height of ``(1 : x_1 : ... : x_N)``.

    ``h(P) = sum_p log p * max_i max(0, -e_{p,i}) + max(0, max_i sum_p e_{p,i} log p)``.
    """
    if not P.exponents:
        return HeightValue(0.0, True)
    h = _height_decimal(P)
    if h.adjusted() < 300:
        return HeightValue(float(h), False)
    with localcontext() as ctx:
        ctx.prec = _DEC_PREC
        ctx.Emax = 10**15
        scale = int((h.ln() / Decimal(2).ln()).to_integral_value()) - 52
        mant = h / (Decimal(2) ** scale)
        return HeightValue(float(mant), False, scale)


def log_weil_height(P: TorusPoint) -> float:
    """``log h(P)`` without overflow; ``-inf`` for roots of unity."""
    if not P.exponents:
        return -math.inf
    with localcontext() as ctx:
        ctx.prec = _DEC_PREC
        ctx.Emax = 10**15
        return float(_height_decimal(P).ln())


def direct_height(coords: Sequence) -> float:
    """Height straight from the rationals: ``log max(|a_0|, ..., |a_N|)``.

    ``x_i = a_i / a_0`` with ``a_0`` the lcm of the denominators and
    ``gcd(a_0, ..., a_N) = 1``.  Independent of the factored representation.
    """
    fr = [_as_fraction(c) for c in coords]
    a0 = 1
    for c in fr:
        a0 = a0 * c.denominator // math.gcd(a0, c.denominator)
    ints = [a0] + [int(c * a0) for c in fr]
    g = 0
    for a in ints:
        g = math.gcd(g, a)
    return math.log(max(abs(a) for a in ints) // g)


def place_log_vectors(P: TorusPoint) -> list[list[float]]:
    """``[log||x_j||_v]_j`` for every place where some coordinate is not a unit.

    The archimedean vector comes first, then one vector per prime.
    """
    with localcontext() as ctx:
        ctx.prec = _DEC_PREC
        ctx.Emax = 10**15
        arch = [Decimal(0)] * P.n
        finite = []
        for p, v in P.exponents:
            lp = _dec_log(p)
            finite.append([float(-e * lp) for e in v])
            for i, e in enumerate(v):
                arch[i] += e * lp
    return [[float(a) for a in arch]] + finite


def height_functional(L, P: TorusPoint, vectors: list[list[float]] | None = None) -> float:
    """``sum_v max(0, max_i (L log||x||_v)_i)`` for a real matrix ``L``.

    With ``L`` the identity this is the Weil height; with ``L`` a limit of
    normalised powers ``A^n / (n^l delta^n)`` it is a canonical height.
    """
    if vectors is None:
        vectors = place_log_vectors(P)
    terms = []
    for vec in vectors:
        best = 0.0
        for row in L:
            val = math.fsum(float(a) * x for a, x in zip(row, vec))
            if val > best:
                best = val
        terms.append(best)
    return math.fsum(terms)
