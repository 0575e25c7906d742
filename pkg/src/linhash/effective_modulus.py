"""
Real multipliers and the integer moduli they imitate.

For n bins and universe u write L = n*u.  A denominator k *claims* every
a in (0, 1) lying in a window [c/k, c/k + 1/L) with c coprime to k; the
effective modulus F(a) is the smallest denominator claiming a.  Windows are
half-open so that they tile without counting a boundary point twice.

The distribution of F is computed per denominator from the Farey
neighbours of each k-fraction: the part of the window of c/k that no
smaller denominator claims is cut on the left by the window of its
predecessor and on the right by its successor.  As c runs over the units
modulo k the left-neighbour denominator runs over the same units, so the
measure obtained by k only needs the units q with q(k - q) < L.
"""
from __future__ import annotations

import csv
import io
import json
import math
from dataclasses import dataclass
from fractions import Fraction
from typing import Iterable, Sequence

import numpy as np

from .errors import BudgetExceeded, DomainError
from .families import ItemSet, as_itemset, default_real_denominator
from .numtheory import signed_distance, units


@dataclass(frozen=True)
class IntervalSet:
    """Disjoint, sorted half-open intervals [lo, hi) with exact endpoints."""

    intervals: tuple[tuple[Fraction, Fraction], ...]

    @classmethod
    def union_of(cls, pieces: Iterable[tuple[Fraction, Fraction]]) -> "IntervalSet":
        merged: list[list[Fraction]] = []
        for lo, hi in sorted((Fraction(lo), Fraction(hi)) for lo, hi in pieces):
            if hi <= lo:
                continue
            if merged and lo <= merged[-1][1]:
                merged[-1][1] = max(merged[-1][1], hi)
            else:
                merged.append([lo, hi])
        return cls(tuple((lo, hi) for lo, hi in merged))

    @property
    def measure(self) -> Fraction:
        return sum((hi - lo for lo, hi in self.intervals), Fraction(0))

    def intersect(self, other: "IntervalSet") -> "IntervalSet":
        out = []
        i = j = 0
        A, B = self.intervals, other.intervals
        while i < len(A) and j < len(B):
            lo = max(A[i][0], B[j][0])
            hi = min(A[i][1], B[j][1])
            if lo < hi:
                out.append((lo, hi))
            if A[i][1] < B[j][1]:
                i += 1
            else:
                j += 1
        return IntervalSet(tuple(out))

    def __contains__(self, a: object) -> bool:
        return any(lo <= a < hi for lo, hi in self.intervals)

    def __len__(self) -> int:
        return len(self.intervals)


def _check_k(k: int, n: int, u: int) -> None:
    if not 1 <= k <= n * u:
        raise DomainError(f"denominator {k} outside [1, n*u] = [1, {n * u}]")


def claimed_intervals(k: int, n: int, u: int) -> IntervalSet:
    """Windows [c/k, c/k + 1/(nu)) over units c modulo k, clipped to (0, 1)."""
    _check_k(k, n, u)
    delta = Fraction(1, n * u)
    pieces = []
    for c in units(k):
        lo = Fraction(c, k)
        pieces.append((lo, min(lo + delta, Fraction(1))))
    return IntervalSet.union_of(pieces)


def _simplest_between(lo: Fraction, hi: Fraction, lo_closed: bool, hi_closed: bool) -> Fraction:
    """A fraction of smallest denominator in the interval between lo and hi (lo < hi).

    Continued-fraction descent: peel off the integer part and recurse on the
    reciprocal interval, flipping which ends are closed.
    """
    f = math.floor(lo)
    first = f if (lo == f and lo_closed) else f + 1
    if first < hi or (first == hi and hi_closed):
        return Fraction(first)
    x, y = lo - f, hi - f
    # 0 <= x < y < 1 and no integer inside; recurse on [1/y, 1/x]
    if x == 0:
        # interval is (0, y]-like: simplest is 1/q with q the first integer >= 1/y
        r = 1 / y
        q = math.ceil(r) if hi_closed else math.floor(r) + 1
        return f + Fraction(1, q)
    inner = _simplest_between(1 / y, 1 / x, hi_closed, lo_closed)
    return f + 1 / inner


def effective_modulus_of(a: Fraction, n: int, u: int) -> int:
    """F(a): smallest k with a unit c such that 0 <= a - c/k < 1/(nu)."""
    a = Fraction(a)
    if not 0 < a < 1:
        raise DomainError(f"multiplier must lie in (0, 1), got {a}")
    delta = Fraction(1, n * u)
    return _simplest_between(a - delta, a, False, True).denominator


@dataclass(frozen=True)
class FDistribution:
    """Measure of {a in (0,1) : F(a) = k} for k = 1 .. nu.

    Measures are Fractions when ``exact`` and floats otherwise; denominators
    that obtain nothing are omitted.
    """

    n: int
    u: int
    measure_by_k: dict[int, Fraction | float]
    exact: bool = True

    def measure(self, k: int) -> Fraction | float:
        return self.measure_by_k.get(k, Fraction(0) if self.exact else 0.0)

    def total(self) -> Fraction | float:
        if self.exact:
            return sum(self.measure_by_k.values(), Fraction(0))
        return math.fsum(self.measure_by_k.values())

    def max_measure(self) -> tuple[int, Fraction | float]:
        k = max(self.measure_by_k, key=self.measure_by_k.__getitem__)
        return k, self.measure_by_k[k]

    def to_csv(self) -> str:
        buf = io.StringIO()
        w = csv.writer(buf, lineterminator="\n")
        if self.exact:
            w.writerow(["k", "measure_num", "measure_den"])
            for k, v in sorted(self.measure_by_k.items()):
                w.writerow([k, v.numerator, v.denominator])
        else:
            w.writerow(["k", "measure"])
            for k, v in sorted(self.measure_by_k.items()):
                w.writerow([k, repr(v)])
        return buf.getvalue()

    def to_dict(self) -> dict:
        if self.exact:
            measures = {str(k): [v.numerator, v.denominator] for k, v in sorted(self.measure_by_k.items())}
        else:
            measures = {str(k): v for k, v in sorted(self.measure_by_k.items())}
        return {"n": self.n, "u": self.u, "exact": self.exact, "measure_by_k": measures}

    def to_json(self) -> str:
        return json.dumps(self.to_dict(), sort_keys=True)


def _active_units(k: int, L: int) -> np.ndarray:
    """Units q of k in [1, k-1] with q(k - q) < L; only these obtain any measure."""
    s = 0
    while s + 1 <= k - 1 and (s + 1) * (k - s - 1) < L:
        s += 1
    if 2 * s >= k - 1:
        q = np.arange(1, k, dtype=np.int64)
    else:
        small = np.arange(1, s + 1, dtype=np.int64)
        q = np.concatenate([small, k - small[::-1]])
    return q[np.gcd(q, k) == 1]


def _obtained_exact(k: int, qs: np.ndarray, L: int) -> Fraction:
    # Window [c/k, c/k + 1/L) minus predecessor window (gap 1/(kq)) and
    # everything from the successor on (gap 1/(k(k-q))).
    n_delta = 0
    recips: dict[int, int] = {}
    for q in qs.tolist():
        r = k - q
        left_free = k * q <= L       # predecessor window ends by c/k
        right_free = k * r <= L      # successor lies at or beyond c/k + 1/L
        if left_free and right_free:
            n_delta += 1
        elif left_free:
            recips[r] = recips.get(r, 0) + 1            # 1/(k r)
        elif right_free:
            recips[q] = recips.get(q, 0) + 1            # 1/(k q)
        elif q * r < L:
            recips[q] = recips.get(q, 0) + 1            # 1/(q r) - 1/L = (1/q + 1/r)/k - 1/L
            recips[r] = recips.get(r, 0) + 1
            n_delta -= 1
    if not recips:
        return Fraction(n_delta, L)
    D = math.lcm(*recips)
    num = sum(c * (D // j) for j, c in recips.items())
    return Fraction(num, D * k) + Fraction(n_delta, L)


def _obtained_float(k: int, qs: np.ndarray, L: int) -> float:
    q = qs.astype(np.float64)
    r = k - q
    delta = 1.0 / L
    right = np.minimum(1.0 / (k * r), delta)
    left_cut = np.maximum(0.0, delta - 1.0 / (k * q))
    return math.fsum(np.maximum(0.0, right - left_cut).tolist())


def f_distribution(n: int, u: int, exact: bool = True, budget: int = 10**5) -> FDistribution:
    """Exact (or float) measure of {a : F(a) = k} for every k <= nu."""
    L = n * u
    if L > budget:
        raise BudgetExceeded(f"nu = {L} exceeds the budget {budget}")
    measures: dict[int, Fraction | float] = {1: Fraction(1, L) if exact else 1.0 / L}
    for k in range(2, L + 1):
        qs = _active_units(k, L)
        if not len(qs):
            continue
        v = _obtained_exact(k, qs, L) if exact else _obtained_float(k, qs, L)
        if v:
            measures[k] = v
    return FDistribution(n, u, measures, exact)


def crowding_index(a: Fraction, n: int) -> int:
    """g(a): the smallest k >= 1 with signed_distance(k a, 1) < 1/n."""
    a = Fraction(a)
    if not 0 < a < 1:
        raise DomainError(f"multiplier must lie in (0, 1), got {a}")
    if n < 2:
        raise DomainError("need n >= 2")
    bound = Fraction(1, n)
    k = 1
    while signed_distance(k * a, 1) >= bound:
        k += 1
    return k


def crowding_distribution(n: int) -> dict[int, Fraction]:
    """Exact measure of {a in (0,1) : g(a) = k} for k = 1 .. n.

    g(a) <= j iff a lies within 1/(nj) of some c/j, so {g <= k} is a finite
    union of open intervals; the level sets are successive differences.
    """
    if n < 2:
        raise DomainError("need n >= 2")
    pieces: list[tuple[Fraction, Fraction]] = []
    prev = Fraction(0)
    out: dict[int, Fraction] = {}
    for j in range(1, n + 1):
        r = Fraction(1, n * j)
        for c in range(0, j + 1):
            centre = Fraction(c, j)
            pieces.append((max(centre - r, Fraction(0)), min(centre + r, Fraction(1))))
        cur = IntervalSet.union_of(pieces).measure
        out[j] = cur - prev
        prev = cur
        pieces = list(IntervalSet.union_of(pieces).intervals)
    return out


def residue_injectivity_check(
    X: ItemSet | Sequence[int],
    n: int,
    u: int,
    trials: int,
    seed: int,
    real_denominator: int | None = None,
) -> float:
    """Fraction of sampled multipliers a/N under which X has distinct residues mod F(a)."""
    items = as_itemset(X)
    if items.elements and items.elements[-1] >= u:
        raise DomainError("X must lie in [0, u)")
    N = real_denominator or default_real_denominator(n, u)
    rng = np.random.default_rng(seed)
    x = items.as_array()
    good = 0
    for _ in range(trials):
        a = Fraction(int(rng.integers(1, N)), N)
        k = effective_modulus_of(a, n, u)
        if len(np.unique(x % k)) == len(x):
            good += 1
    return good / trials
