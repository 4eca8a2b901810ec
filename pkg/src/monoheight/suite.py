"""Randomized property suites: seeded, deterministic, optionally parallel."""

from __future__ import annotations

import random
from concurrent.futures import ProcessPoolExecutor
from dataclasses import dataclass, field

from .canonical import HeightOptions, forward_canonical_height, backward_canonical_height
from .linalg import IntMatrix, det
from .spectral import analyze
from .torus import TorusPoint, apply_map, direct_height, weil_height
from .verify import (
    VerificationReport,
    preperiodicity_test,
    verify_functional_equation,
    verify_lower_bound,
    verify_recurrence,
)

__all__ = ["random_matrix", "random_point", "run_suite", "SuiteSummary", "SUITE_IDENTITIES"]

PRIMES = (2, 3, 5)
ENTRY_RANGE = 3
EXPONENT_RANGE = 6
RHO_MARGIN = 1e-6


def random_matrix(rng: random.Random, n: int, lo: int = -ENTRY_RANGE, hi: int = ENTRY_RANGE) -> IntMatrix:
    """Uniform entries in ``[lo, hi]``, resampled until ``det != 0`` and ``rho > 1 + 1e-6``."""
    while True:
        A = IntMatrix.from_rows([[rng.randint(lo, hi) for _ in range(n)] for _ in range(n)])
        if det(A) != 0 and analyze(A).delta > 1 + RHO_MARGIN:
            return A


def random_point(rng: random.Random, n: int, primes=PRIMES, e: int = EXPONENT_RANGE) -> TorusPoint:
    signs = tuple(rng.choice((1, -1)) for _ in range(n))
    return TorusPoint(signs, tuple((p, tuple(rng.randint(-e, e) for _ in range(n))) for p in primes))


def _oracle_report(A: IntMatrix, P: TorusPoint, k_max: int = 3) -> VerificationReport:
    worst = 0.0
    Q = P
    for _ in range(k_max + 1):
        a, b = weil_height(Q).value, direct_height(Q.coords())
        worst = max(worst, abs(a - b) / max(1.0, abs(b)))
        Q = apply_map(A, Q)
    return VerificationReport("height-oracle", 0.0, 0.0, worst, 1e-12, worst <= 1e-12, True)


def _preperiodic_report(A: IntMatrix, P: TorusPoint, opts: HeightOptions) -> VerificationReport:
    # preperiodic => both heights vanish exactly; points here are forced preperiodic
    Q = TorusPoint(P.signs)
    pre = bool(preperiodicity_test(A, Q))
    fz = forward_canonical_height(A, Q, opts).exact_zero
    bz = backward_canonical_height(A, Q, opts).exact_zero
    ok = pre and fz and bz
    return VerificationReport("preperiodic-zero", 0.0, 0.0, 0.0 if ok else 1.0, 0.0, ok, True)


SUITE_IDENTITIES = ("functional-eq", "recurrence", "lower-bound", "height-oracle", "preperiodic-zero")


def _run_case(case) -> dict:
    ident, rows, pt, opts = case
    A = IntMatrix.from_rows(rows)
    P = TorusPoint.from_json(pt)
    if ident == "functional-eq":
        rep = verify_functional_equation(A, P, opts)
    elif ident == "recurrence":
        rep = verify_recurrence(A, P, 4, opts)
    elif ident == "lower-bound":
        rep = verify_lower_bound(A, P, opts)
    elif ident == "height-oracle":
        rep = _oracle_report(A, P)
    else:
        rep = _preperiodic_report(A, P, opts)
    out = rep.to_json()
    out["matrix"] = rows
    out["point"] = pt
    return out


@dataclass
class SuiteSummary:
    seed: int
    counts: dict = field(default_factory=dict)
    failures: list = field(default_factory=list)

    @property
    def all_passed(self) -> bool:
        return not self.failures

    def to_json(self) -> dict:
        return {"seed": self.seed, "counts": self.counts, "failures": self.failures, "all_passed": self.all_passed}


def _cases(seed: int, count: int, identities, dims, opts):
    rng = random.Random(seed)
    cases = []
    for ident in identities:
        for i in range(count):
            n = dims[i % len(dims)]
            A = random_matrix(rng, n)
            P = random_point(rng, n)
            cases.append((ident, A.tolist(), P.to_json(), opts))
    return cases


def run_suite(seed: int = 42, count: int = 100, identities=SUITE_IDENTITIES, dims=(2, 3),
              opts: HeightOptions | None = None, parallel: int = 0) -> SuiteSummary:
    """Run ``count`` random cases per identity.  Results are independent of ``parallel``."""
    opts = opts or HeightOptions()
    cases = _cases(seed, count, identities, dims, opts)
    if parallel and parallel > 1:
        with ProcessPoolExecutor(max_workers=parallel) as ex:
            results = list(ex.map(_run_case, cases, chunksize=8))
    else:
        results = [_run_case(c) for c in cases]
    summary = SuiteSummary(seed)
    for res in results:
        c = summary.counts.setdefault(res["identity_name"], {"passed": 0, "failed": 0, "not_applicable": 0})
        if not res["hypotheses_met"]:
            c["not_applicable"] += 1
        elif res["passed"]:
            c["passed"] += 1
        else:
            c["failed"] += 1
            summary.failures.append(res)
    return summary
