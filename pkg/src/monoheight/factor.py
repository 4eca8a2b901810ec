"""Integer factorization: trial division up to a bound, then Pollard rho (Brent).

Exceeding the rho iteration budget raises ``FactorizationBudgetError``; a
partially factored number is never returned as if it were complete.
"""

from __future__ import annotations

from functools import lru_cache
from math import gcd, isqrt

from .errors import FactorizationBudgetError

TRIAL_BOUND = 10**6
RHO_ITERATIONS = 2_000_000

# Deterministic Miller-Rabin witnesses for n < 3.3e24
_MR_BASES = (2, 3, 5, 7, 11, 13, 17, 19, 23, 29, 31, 37, 41)


@lru_cache(maxsize=1)
def _small_primes(bound: int = TRIAL_BOUND) -> tuple[int, ...]:
    sieve = bytearray([1]) * (bound + 1)
    sieve[0:2] = b"\x00\x00"
    for p in range(2, isqrt(bound) + 1):
        if sieve[p]:
            sieve[p * p::p] = bytearray(len(range(p * p, bound + 1, p)))
    return tuple(i for i, flag in enumerate(sieve) if flag)


def is_probable_prime(n: int) -> bool:
    if n < 2:
        return False
    for p in _MR_BASES:
        if n % p == 0:
            return n == p
    d, s = n - 1, 0
    while d % 2 == 0:
        d //= 2
        s += 1
    for a in _MR_BASES:
        x = pow(a, d, n)
        if x in (1, n - 1):
            continue
        for _ in range(s - 1):
            x = x * x % n
            if x == n - 1:
                break
        else:
            return False
    return True


def pollard_brent(n: int, max_iterations: int = RHO_ITERATIONS, seed: int = 1) -> int:
    """Return a nontrivial factor of the composite ``n``."""
    if n % 2 == 0:
        return 2
    budget = max_iterations
    c = seed
    while budget > 0:
        y, r, q, g = 2, 1, 1, 1
        x = ys = y
        m = 128
        while g == 1 and budget > 0:
            x = y
            for _ in range(r):
                y = (y * y + c) % n
            k = 0
            while k < r and g == 1:
                ys = y
                for _ in range(min(m, r - k)):
                    y = (y * y + c) % n
                    q = q * abs(x - y) % n
                g = gcd(q, n)
                k += m
            budget -= r
            r *= 2
        if g == n:
            # batch overshot; step back one at a time
            g = 1
            while g == 1:
                ys = (ys * ys + c) % n
                g = gcd(abs(x - ys), n)
        if 1 < g < n:
            return g
        c += 1
    raise FactorizationBudgetError(f"Pollard rho budget of {max_iterations} iterations exhausted for {n}")


def factorint(n: int, trial_bound: int = TRIAL_BOUND, rho_iterations: int = RHO_ITERATIONS) -> dict[int, int]:
    """Prime factorization of ``|n|`` as ``{prime: multiplicity}``; empty for 1."""
    n = abs(n)
    if n == 0:
        raise ValueError("0 has no prime factorization")
    out: dict[int, int] = {}
    for p in _small_primes():
        if p > trial_bound or p * p > n:
            break
        if n % p == 0:
            k = 0
            while n % p == 0:
                n //= p
                k += 1
            out[p] = k
    if n > 1:
        stack = [n]
        while stack:
            m = stack.pop()
            if m == 1:
                continue
            if m <= trial_bound**2 or is_probable_prime(m):
                # below the square of the trial bound, anything left is prime
                out[m] = out.get(m, 0) + 1
                continue
            d = pollard_brent(m, rho_iterations)
            stack.extend((d, m // d))
    return dict(sorted(out.items()))
