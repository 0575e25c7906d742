"""
Exact integer and rational number theory.

Everything here is a pure function of integers or :class:`fractions.Fraction`
values; nothing rounds.  Fractions are the package-wide rational type: they
are stored reduced with a positive denominator, so equality is structural.
"""
from __future__ import annotations

import math
from fractions import Fraction
from functools import lru_cache
from typing import Iterator

import numpy as np

from .errors import DomainError, NoneFound, NotAUnit, NoSuccessor

Rational = Fraction


def _check_modulus(p: int) -> None:
    if p < 1:
        raise DomainError(f"modulus must be positive, got {p}")


def mod_reduce(x: int, p: int) -> int:
    """Positive remainder of x modulo p, in [0, p)."""
    _check_modulus(p)
    return x % p


def mod_reduce_rational(x: Fraction, p: int) -> Fraction:
    """Representative of x + pZ in [0, p) for rational x."""
    _check_modulus(p)
    x = Fraction(x)
    return x - p * math.floor(x / p)


def signed_distance(x: int | Fraction, p: int) -> int | Fraction:
    """Distance from x to the nearest multiple of p, i.e. min(x mod p, -x mod p)."""
    if isinstance(x, Fraction) and x.denominator != 1:
        return min(mod_reduce_rational(x, p), mod_reduce_rational(-x, p))
    x = int(x)
    return min(mod_reduce(x, p), mod_reduce(-x, p))


def mod_inverse(a: int, m: int) -> int:
    if m < 2:
        raise DomainError(f"mod_inverse needs m >= 2, got {m}")
    if math.gcd(a, m) != 1:
        raise NotAUnit(f"{a} is not a unit modulo {m}")
    return pow(a, -1, m)


@lru_cache(maxsize=4096)
def factorize(m: int) -> tuple[tuple[int, int], ...]:
    """Prime factorization by trial division, as ((prime, exponent), ...)."""
    if m < 1:
        raise DomainError(f"cannot factor {m}")
    out = []
    for q in (2, 3):
        e = 0
        while m % q == 0:
            m //= q
            e += 1
        if e:
            out.append((q, e))
    q = 5
    step = 2
    while q * q <= m:
        e = 0
        while m % q == 0:
            m //= q
            e += 1
        if e:
            out.append((q, e))
        q += step
        step = 6 - step
    if m > 1:
        out.append((m, 1))
    return tuple(out)


def totient(m: int) -> int:
    """Euler's phi; phi(1) = 1."""
    result = m
    for q, _ in factorize(m):
        result -= result // q
    return result


def divisors(m: int) -> list[int]:
    divs = [1]
    for q, e in factorize(m):
        divs = [d * q**i for d in divs for i in range(e + 1)]
    return sorted(divs)


def divisor_count(m: int) -> int:
    count = 1
    for _, e in factorize(m):
        count *= e + 1
    return count


def units(m: int) -> Iterator[int]:
    """Residues in [0, m) coprime to m, ascending.  For m = 1 this is just 0."""
    if m < 1:
        raise DomainError(f"units needs m >= 1, got {m}")
    if m == 1:
        yield 0
        return
    for k in range(1, m):
        if math.gcd(k, m) == 1:
            yield k


@lru_cache(maxsize=256)
def units_array(m: int) -> np.ndarray:
    """units(m) as a read-only int64 array (cached)."""
    if m == 1:
        arr = np.zeros(1, dtype=np.int64)
    else:
        r = np.arange(1, m, dtype=np.int64)
        arr = r[np.gcd(r, m) == 1]
    arr.setflags(write=False)
    return arr


# Deterministic Miller-Rabin: these bases are correct for every n < 3.3e24.
_MR_BASES = (2, 3, 5, 7, 11, 13, 17, 19, 23, 29, 31, 37, 41)


def is_prime(n: int) -> bool:
    if n < 2:
        return False
    for q in _MR_BASES:
        if n % q == 0:
            return n == q
    d, s = n - 1, 0
    while d % 2 == 0:
        d //= 2
        s += 1
    for a in _MR_BASES:
        x = pow(a, d, n)
        if x == 1 or x == n - 1:
            continue
        for _ in range(s - 1):
            x = x * x % n
            if x == n - 1:
                break
        else:
            return False
    return True


def prime_in_range(lo: int, hi: int) -> int:
    """Smallest prime in [lo, hi]."""
    if lo < 2 or hi < lo:
        raise DomainError(f"need hi >= lo >= 2, got [{lo}, {hi}]")
    for n in range(lo, hi + 1):
        if is_prime(n):
            return n
    raise NoneFound(f"no prime in [{lo}, {hi}]")


def nearest_prime(n: int) -> int:
    """Prime closest to n (the smaller one on ties)."""
    if n <= 2:
        return 2
    for delta in range(n):
        if is_prime(n - delta):
            return n - delta
        if is_prime(n + delta):
            return n + delta
    raise NoneFound(n)  # unreachable by Bertrand's postulate


def smallest_odd_composite_at_least(n: int) -> int:
    c = max(n, 9)
    if c % 2 == 0:
        c += 1
    while is_prime(c):
        c += 2
    return c


def farey_pairs(m: int) -> Iterator[tuple[int, int]]:
    """(numerator, denominator) pairs of the order-m Farey sequence, ascending.

    Uses the next-term recurrence: from neighbours a/b < c/d the following
    term is (k*c - a)/(k*d - b) with k = (m + b) // d.
    """
    if m < 1:
        raise DomainError(f"Farey order must be >= 1, got {m}")
    a, b, c, d = 0, 1, 1, m
    yield a, b
    while c <= m:
        k = (m + b) // d
        a, b, c, d = c, d, k * c - a, k * d - b
        yield a, b


def farey_sequence(m: int) -> list[Fraction]:
    return [Fraction(a, b, _normalize=False) for a, b in farey_pairs(m)]


def farey_arrays(m: int) -> tuple[np.ndarray, np.ndarray]:
    """Numerators and denominators of the order-m Farey sequence as int64 arrays.

    The order-j sequence for any j <= m is the subsequence with denominator <= j.
    """
    pairs = np.fromiter(
        (v for pair in farey_pairs(m) for v in pair), dtype=np.int64
    ).reshape(-1, 2)
    return pairs[:, 0].copy(), pairs[:, 1].copy()


def farey_length(m: int) -> int:
    return 1 + sum(totient(k) for k in range(1, m + 1))


def farey_successor(f: Fraction, m: int) -> Fraction:
    """Next element after f in the order-m Farey sequence.

    The successor c'/k' of c/k satisfies c'k - ck' = 1 with k' as large as
    possible subject to k' <= m.
    """
    f = Fraction(f)
    c, k = f.numerator, f.denominator
    if not 0 <= f <= 1 or k > m:
        raise DomainError(f"{f} is not in the order-{m} Farey sequence")
    if f == 1:
        raise NoSuccessor("1/1 has no successor")
    k0 = (-pow(c, -1, k)) % k if k > 1 else 0
    k_next = k0 + k * ((m - k0) // k)
    c_next = (1 + c * k_next) // k
    return Fraction(c_next, k_next, _normalize=False)


def sqrt_upper(x: Fraction, bits: int = 64) -> Fraction:
    """Rational upper bound on sqrt(x), exact when x is a square of a rational."""
    x = Fraction(x)
    if x < 0:
        raise DomainError("sqrt of a negative number")
    p, q = x.numerator, x.denominator
    rp, rq = math.isqrt(p), math.isqrt(q)
    if rp * rp == p and rq * rq == q:
        return Fraction(rp, rq)
    scale = 1 << bits
    r = math.isqrt(p * q * scale * scale)
    if r * r != p * q * scale * scale:
        r += 1
    return Fraction(r, q * scale)
