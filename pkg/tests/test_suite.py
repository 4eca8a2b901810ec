import random

from monoheight.spectral import analyze
from monoheight.suite import SUITE_IDENTITIES, random_matrix, random_point, run_suite
from monoheight.linalg import det


def test_generators_respect_ranges():
    rng = random.Random(0)
    for _ in range(50):
        A = random_matrix(rng, 3)
        assert det(A) != 0 and analyze(A).delta > 1 + 1e-6
        assert all(-3 <= a <= 3 for row in A.rows for a in row)
        P = random_point(rng, 3)
        assert all(-6 <= e <= 6 for _, v in P.exponents for e in v)
        assert set(P.primes) <= {2, 3, 5}


def test_suite_seed_42_passes():
    s = run_suite(42, 40)
    assert s.all_passed, s.failures[:2]
    assert set(s.counts) == set(SUITE_IDENTITIES)
    assert run_suite(42, 40).to_json() == s.to_json()
