"""Integer helpers: primality, linear congruences, safe primes."""

from __future__ import annotations

import random
from math import gcd
from typing import Optional, Tuple

_SMALL_PRIMES = [2, 3, 5, 7, 11, 13, 17, 19, 23, 29, 31, 37, 41, 43, 47, 53, 59, 61, 67, 71, 73, 79, 83, 89, 97]
# first 13 primes are a deterministic Miller-Rabin base set below this bound
_DETERMINISTIC_LIMIT = 3317044064679887385961981
_sysrand = random.SystemRandom()


def _mr_round(n: int, d: int, s: int, a: int) -> bool:
    x = pow(a, d, n)
    if x in (1, n - 1):
        return True
    for _ in range(s - 1):
        x = x * x % n
        if x == n - 1:
            return True
    return False


def is_probable_prime(n: int, rounds: int = 64) -> bool:
    """Miller-Rabin; exact below ~3.3e24, error < 4^-rounds above."""
    if n < 2:
        return False
    for p in _SMALL_PRIMES:
        if n % p == 0:
            return n == p
    d, s = n - 1, 0
    while d % 2 == 0:
        d //= 2
        s += 1
    if n < _DETERMINISTIC_LIMIT:
        bases = _SMALL_PRIMES[:13]
    else:
        bases = [_sysrand.randrange(2, n - 1) for _ in range(rounds)]
    return all(_mr_round(n, d, s, a) for a in bases)


def is_safe_prime(p: int) -> bool:
    return p >= 5 and p % 2 == 1 and is_probable_prime((p - 1) // 2) and is_probable_prime(p)


def next_safe_prime(start: int) -> int:
    """Smallest safe prime p = 2q+1 with q >= start."""
    q = max(start, 3) | 1
    while not (is_probable_prime(q) and is_probable_prime(2 * q + 1)):
        q += 2
    return 2 * q + 1


def safe_prime_generator(p: int) -> int:
    """Smallest generator of the multiplicative group mod a safe prime p."""
    q = (p - 1) // 2
    for w in range(2, p):
        if pow(w, 2, p) != 1 and pow(w, q, p) != 1:
            return w
    raise ValueError(f"{p} has no generator; not a safe prime?")


def solve_linear_congruence(b: int, c: int, m: int) -> Optional[Tuple[int, int]]:
    """Solutions of b*a = c (mod m) as (residue, modulus), or None.

    The solution set is a single class modulo m / gcd(b, m).
    """
    b %= m
    c %= m
    d = gcd(b, m)
    if c % d:
        return None
    mod = m // d
    if mod == 1:
        return 0, 1
    return (c // d) * pow(b // d, -1, mod) % mod, mod


def crt_pair(r1: int, m1: int, r2: int, m2: int) -> Optional[Tuple[int, int]]:
    """Intersect a = r1 (mod m1) with a = r2 (mod m2) for arbitrary moduli."""
    d = gcd(m1, m2)
    if (r2 - r1) % d:
        return None
    lcm = m1 // d * m2
    if m1 // d == 1:
        return r2 % lcm, lcm
    t = (r2 - r1) // d * pow(m1 // d, -1, m2 // d) % (m2 // d)
    return (r1 + m1 * t) % lcm, lcm


def binomial(k: int, t: int) -> int:
    """C(k, t) for any integer k (negative k included) and t >= 0."""
    num = 1
    den = 1
    for i in range(t):
        num *= k - i
        den *= i + 1
    return num // den
