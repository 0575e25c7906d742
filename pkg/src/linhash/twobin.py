"""
Two-bin multiplicative hashing modulo a prime p.

With h_a(x) = 0 iff (a x mod p) < p/2, the elements 1 and x collide under
a small multiplier a exactly when (a x mod p) < p/2.  The overlap of x
counts such a in [1, ceil(p/2) - 1]; a and p - a behave symmetrically, so
the full-range collision count of (1, x) is twice the overlap.
"""
from __future__ import annotations

import csv
import io
import json
import math
from dataclasses import dataclass, field
from fractions import Fraction
from typing import Iterable

import numpy as np

from .errors import DomainError
from .numtheory import is_prime, mod_inverse, sqrt_upper


def _check_element(x: int, p: int) -> None:
    if not is_prime(p):
        raise DomainError(f"{p} is not prime")
    if not 1 <= x < p:
        raise DomainError(f"need 1 <= x < p, got x={x}, p={p}")


def overlap(x: int, p: int) -> int:
    """Number of a in [1, ceil(p/2) - 1] with (a x mod p) < p/2."""
    _check_element(x, p)
    a = np.arange(1, (p + 1) // 2, dtype=np.int64)
    return int(np.count_nonzero(2 * (a * x % p) < p))


def overlap_reference(x: int, p: int) -> int:
    """Literal loop version of :func:`overlap`."""
    _check_element(x, p)
    return sum(1 for a in range(1, (p + 1) // 2) if 2 * (a * x % p) < p)


def excess_overlap(x: int, p: int) -> Fraction:
    return overlap(x, p) - Fraction(p, 4)


@dataclass(frozen=True)
class PigeonRep:
    """x = (sigma * m^{-1} * k) mod p with 1 <= m < n and k <= ceil(p/n)."""

    sigma: int
    m: int
    k: int

    def reconstruct(self, p: int) -> int:
        return self.sigma * mod_inverse(self.m, p) * self.k % p


def pigeon_rep(x: int, p: int, n: int) -> PigeonRep:
    """Pigeonhole representation of x from the multiples x*i, i in [0, n).

    Two of the n points (x i mod p) lie within p/n of each other on the
    circle of length p.  Among the closest pairs we prefer the smallest
    index difference, then sigma = +1.
    """
    _check_element(x, p)
    if not 2 <= n < p:
        raise DomainError(f"need 2 <= n < p, got n={n}, p={p}")
    i = np.arange(n, dtype=np.int64)
    r = i * x % p
    order = np.argsort(r, kind="stable")
    rs, idx = r[order], i[order]
    # consecutive gaps, including the wrap-around from the largest back to the smallest
    gaps = np.append(np.diff(rs), rs[0] + p - rs[-1])
    hi_idx = np.append(idx[1:], idx[0])
    diff = hi_idx - idx                       # i1 - i2 with r(i1) - r(i2) = gap (mod p)
    best = None
    for g, d in zip(gaps.tolist(), diff.tolist()):
        key = (g, abs(d), 0 if d > 0 else 1)
        if best is None or key < best[0]:
            best = (key, d)
    d = best[1]
    sigma = 1 if d > 0 else -1
    m = abs(d)
    k = x * sigma * m % p
    # k = 0 would need p | x*m, impossible for prime p and 0 < m < p
    assert 0 < k <= -(-p // n)
    return PigeonRep(sigma, m, k)


def epicbound_rhs(m: int, k: int, p: int) -> Fraction:
    """k + (m + p/(m k)) * gcd(k, m), the constant-free excess bound."""
    if m < 1:
        raise DomainError(f"need m >= 1, got {m}")
    if k < 1:
        raise DomainError(f"need k >= 1, got {k}")
    return k + (m + Fraction(p, m * k)) * math.gcd(k, m)


@dataclass(frozen=True)
class ElementReport:
    x: int
    overlap: int
    excess: Fraction
    rep: PigeonRep
    rhs: Fraction


@dataclass(frozen=True)
class OverlapReport:
    p: int
    n: int
    per_element: dict[int, ElementReport] = field(default_factory=dict)

    @property
    def total_excess(self) -> Fraction:
        return sum((e.excess for e in self.per_element.values()), Fraction(0))

    @property
    def bound_rhs(self) -> Fraction:
        """Sum of the constant-free per-element bounds; calibration is applied by the caller."""
        return sum((e.rhs for e in self.per_element.values()), Fraction(0))

    def max_ratio(self) -> Fraction:
        """Largest excess / rhs over the elements: the smallest constant that makes every bound hold."""
        return max((e.excess / e.rhs for e in self.per_element.values()), default=Fraction(0))

    def to_csv(self) -> str:
        buf = io.StringIO()
        w = csv.writer(buf, lineterminator="\n")
        w.writerow(["x", "overlap", "excess_num", "excess_den", "sigma", "m", "k", "rhs_num", "rhs_den"])
        for x, e in sorted(self.per_element.items()):
            w.writerow([x, e.overlap, e.excess.numerator, e.excess.denominator,
                        e.rep.sigma, e.rep.m, e.rep.k, e.rhs.numerator, e.rhs.denominator])
        return buf.getvalue()

    def to_dict(self) -> dict:
        tot, rhs = self.total_excess, self.bound_rhs
        return {
            "p": self.p,
            "n": self.n,
            "total_excess": [tot.numerator, tot.denominator],
            "bound_rhs": [rhs.numerator, rhs.denominator],
            "per_element": {
                str(x): {
                    "overlap": e.overlap,
                    "excess": [e.excess.numerator, e.excess.denominator],
                    "sigma": e.rep.sigma, "m": e.rep.m, "k": e.rep.k,
                    "rhs": [e.rhs.numerator, e.rhs.denominator],
                }
                for x, e in sorted(self.per_element.items())
            },
        }

    def to_json(self) -> str:
        return json.dumps(self.to_dict(), sort_keys=True)


def sum_excess(X: Iterable[int], p: int, n: int | None = None) -> OverlapReport:
    """Exact excess overlaps of every x in X, with pigeon reps for parameter n (default |X|)."""
    xs = sorted(set(int(x) for x in X))
    if 0 in xs:
        raise DomainError("X must not contain 0")
    for x in xs:
        _check_element(x, p)
    n = max(2, len(xs)) if n is None else n
    per = {}
    for x in xs:
        ov = overlap(x, p)
        rep = pigeon_rep(x, p, n)
        per[x] = ElementReport(x, ov, ov - Fraction(p, 4), rep, epicbound_rhs(rep.m, rep.k, p))
    return OverlapReport(p, n, per)


def jensen_maxload_bound(expected_collisions: Fraction, n: int) -> Fraction:
    """Upper bound on E[maxload] for two bins from E[collisions].

    C = binom(M, 2) + binom(n - M, 2) is convex in M, so by Jensen the mean
    mu satisfies mu^2 - n mu + (n^2 - n)/2 <= E[C]; this returns the larger
    root (square root rounded up).
    """
    ec = Fraction(expected_collisions)
    if n < 1:
        raise DomainError("need n >= 1")
    if not 0 <= ec <= Fraction(n * (n - 1), 2):
        raise DomainError(f"expected collisions {ec} outside [0, C({n}, 2)]")
    disc = Fraction(n * n, 4) - Fraction(n * n - n, 2) + ec
    if disc < 0:
        return Fraction(n, 2)
    return Fraction(n, 2) + sqrt_upper(disc)
