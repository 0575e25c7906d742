"""
Maxload, collision and close-pair statistics.

Exact statistics sweep the whole parameter space of a family in vectorized
batches and keep integer counts, so means come out as exact fractions.  When
a sweep would exceed the work budget the caller is told so with
:class:`~linhash.errors.BudgetExceeded` and can fall back on
:func:`mc_expected_maxload`, whose trials are reproducible per index.
"""
from __future__ import annotations

import csv
import io
import json
import math
from dataclasses import dataclass, field
from enum import Enum
from fractions import Fraction
from typing import Iterable, Iterator

import numpy as np

from .errors import BudgetExceeded, DomainError
from .families import (
    FamilyConfig,
    HashParam,
    ItemSet,
    Kind,
    ParamBatch,
    as_itemset,
    assign_bins,
    bin_of,
    param_space,
    sample_batch,
)
from .numtheory import signed_distance, units_array

DEFAULT_BUDGET = 10**8
# Target number of bin evaluations per vectorized batch.
_BATCH_ELEMS = 1 << 20


class Mode(str, Enum):
    EXACT = "Exact"
    MONTE_CARLO = "MonteCarlo"


@dataclass(frozen=True)
class MaxloadDistribution:
    """Distribution of maxload over a parameter space or over MC trials.

    In exact mode ``counts[v]`` is the (weighted) number of parameters with
    maxload v; in Monte Carlo mode it is the number of trials.  Means are
    exact fractions of the counts in both modes.
    """

    mode: Mode
    counts: dict[int, int]
    total: int
    meta: dict = field(default_factory=dict, compare=False)

    @property
    def mean(self) -> Fraction:
        return Fraction(sum(v * c for v, c in self.counts.items()), self.total)

    @property
    def stderr(self) -> float:
        if self.mode is Mode.EXACT or self.total < 2:
            return 0.0
        mean = self.mean
        ss = sum(c * (v - mean) ** 2 for v, c in self.counts.items())
        return math.sqrt(float(ss / (self.total - 1)) / self.total)

    @property
    def support(self) -> list[int]:
        return sorted(v for v, c in self.counts.items() if c)

    def prob_at_least(self, k: int) -> Fraction:
        return Fraction(sum(c for v, c in self.counts.items() if v >= k), self.total)

    def merge(self, other: "MaxloadDistribution") -> "MaxloadDistribution":
        if self.mode is not other.mode:
            raise DomainError("cannot merge exact and Monte Carlo distributions")
        counts = dict(self.counts)
        for v, c in other.counts.items():
            counts[v] = counts.get(v, 0) + c
        return MaxloadDistribution(self.mode, dict(sorted(counts.items())), self.total + other.total)

    def to_dict(self) -> dict:
        mean = self.mean
        d = {
            "mode": self.mode.value,
            "total": self.total,
            "counts": {str(v): c for v, c in sorted(self.counts.items())},
            "mean_num": mean.numerator,
            "mean_den": mean.denominator,
        }
        if self.mode is Mode.MONTE_CARLO:
            d["stderr"] = self.stderr
        return d

    def to_json(self) -> str:
        return json.dumps(self.to_dict(), sort_keys=True)

    def to_csv(self) -> str:
        buf = io.StringIO()
        w = csv.writer(buf, lineterminator="\n")
        w.writerow(["value", "count"])
        for v, c in sorted(self.counts.items()):
            w.writerow([v, c])
        return buf.getvalue()


@dataclass(frozen=True)
class CollisionStats:
    expected_collisions: Fraction
    pair_probabilities: dict[tuple[int, int], Fraction] | None = None


# ---------------------------------------------------------------------------
# Single parameter


def histogram(X: ItemSet | Iterable[int], cfg: FamilyConfig, param: HashParam) -> list[int]:
    items = as_itemset(X, cfg)
    counts = [0] * cfg.bins
    for x in items:
        counts[bin_of(x, param, cfg)] += 1
    return counts


def maxload(X: ItemSet | Iterable[int], cfg: FamilyConfig, param: HashParam) -> int:
    """Items in the fullest bin; 0 for the empty set."""
    return max(histogram(X, cfg, param))


def collision_count(X: ItemSet | Iterable[int], cfg: FamilyConfig, param: HashParam) -> int:
    return sum(c * (c - 1) // 2 for c in histogram(X, cfg, param))


# ---------------------------------------------------------------------------
# Sweeps


def row_stats(bins: np.ndarray) -> tuple[np.ndarray, np.ndarray]:
    """Per-row maxload and number of same-bin pairs of a (trials, items) bin array."""
    T, n = bins.shape
    if n == 0:
        z = np.zeros(T, dtype=np.int64)
        return z, z.copy()
    s = np.sort(bins.astype(np.int64), axis=1)
    idx = np.arange(n, dtype=np.int64)
    new_run = np.ones((T, n), dtype=bool)
    new_run[:, 1:] = s[:, 1:] != s[:, :-1]
    starts = np.where(new_run, idx, 0)
    np.maximum.accumulate(starts, axis=1, out=starts)
    # position of each item inside its run = number of earlier same-bin items
    pos = idx - starts
    return pos.max(axis=1) + 1, pos.sum(axis=1)


def _check_budget(cfg: FamilyConfig, n_items: int, budget: int) -> int:
    size = param_space(cfg).size
    work = size * max(n_items, 1)
    if work > budget:
        raise BudgetExceeded(
            f"exact sweep needs {work} bin evaluations (> budget {budget}); use Monte Carlo"
        )
    return size


def sweep(
    X: ItemSet | Iterable[int], cfg: FamilyConfig, budget: int = DEFAULT_BUDGET
) -> Iterator[tuple[ParamBatch, np.ndarray]]:
    """Exhaustive sweep yielding (batch, bins) with bins of shape (len(batch), |X|)."""
    items = as_itemset(X, cfg)
    _check_budget(cfg, len(items), budget)
    x = items.as_array()
    chunk = max(1, _BATCH_ELEMS // max(len(items), 1))
    for batch in param_space(cfg).batches(chunk):
        if len(batch):
            yield batch, assign_bins(cfg, x, batch)


def _weights(batch: ParamBatch) -> np.ndarray:
    return np.ones(len(batch), dtype=np.int64) if batch.w is None else batch.w


def _tally(counts: dict[int, int], values: np.ndarray, weights: np.ndarray) -> None:
    for v in np.unique(values):
        counts[int(v)] = counts.get(int(v), 0) + int(weights[values == v].sum())


def exact_expected_maxload(
    X: ItemSet | Iterable[int], cfg: FamilyConfig, budget: int = DEFAULT_BUDGET
) -> MaxloadDistribution:
    """Distribution of maxload over the full parameter space (exact)."""
    counts: dict[int, int] = {}
    for batch, bins in sweep(X, cfg, budget):
        ml, _ = row_stats(bins)
        _tally(counts, ml, _weights(batch))
    total = param_space(cfg).total_weight
    return MaxloadDistribution(Mode.EXACT, dict(sorted(counts.items())), total)


def maxload_profile(
    X: ItemSet | Iterable[int], cfg: FamilyConfig, budget: int = DEFAULT_BUDGET
) -> tuple[list[HashParam], np.ndarray]:
    """Every parameter of the space (in enumeration order) with its maxload."""
    params: list[HashParam] = []
    loads = []
    for batch, bins in sweep(X, cfg, budget):
        params.extend(batch.params())
        loads.append(row_stats(bins)[0])
    return params, (np.concatenate(loads) if loads else np.zeros(0, dtype=np.int64))


def mc_maxloads(
    X: ItemSet | Iterable[int], cfg: FamilyConfig, trials: int, seed: int, start: int = 0
) -> np.ndarray:
    """Maxload of trials start .. start+trials-1; each is a pure function of (seed, index)."""
    items = as_itemset(X, cfg)
    x = items.as_array()
    chunk = max(1, _BATCH_ELEMS // max(len(items), 1))
    out = []
    for lo in range(0, trials, chunk):
        batch = sample_batch(cfg, seed, start + lo, min(chunk, trials - lo))
        out.append(row_stats(assign_bins(cfg, x, batch))[0])
    return np.concatenate(out) if out else np.zeros(0, dtype=np.int64)


def mc_expected_maxload(
    X: ItemSet | Iterable[int], cfg: FamilyConfig, trials: int, seed: int, start: int = 0
) -> MaxloadDistribution:
    if trials < 1:
        raise DomainError("need at least one trial")
    loads = mc_maxloads(X, cfg, trials, seed, start)
    values, freq = np.unique(loads, return_counts=True)
    counts = {int(v): int(c) for v, c in zip(values, freq)}
    return MaxloadDistribution(
        Mode.MONTE_CARLO, counts, trials, meta={"seed": seed, "start": start}
    )


def expected_maxload(
    X: ItemSet | Iterable[int],
    cfg: FamilyConfig,
    budget: int = DEFAULT_BUDGET,
    trials: int = 10_000,
    seed: int = 0,
) -> MaxloadDistribution:
    """Exact sweep when it fits the budget, otherwise Monte Carlo."""
    try:
        return exact_expected_maxload(X, cfg, budget)
    except BudgetExceeded:
        return mc_expected_maxload(X, cfg, trials, seed)


# ---------------------------------------------------------------------------
# Collisions


def pair_collision_prob(x: int, y: int, cfg: FamilyConfig, budget: int = DEFAULT_BUDGET) -> Fraction:
    """Probability over the parameter space that x and y share a bin."""
    if x == y:
        raise DomainError("need distinct x, y")
    for v in (x, y):
        if not 0 <= v < cfg.universe:
            raise DomainError(f"{v} outside universe [0, {cfg.universe})")
    _check_budget(cfg, 2, budget)
    pair = np.array([x, y], dtype=np.int64)
    hits = 0
    for batch in param_space(cfg).batches(_BATCH_ELEMS // 2):
        if len(batch):
            bins = assign_bins(cfg, pair, batch)
            hits += int(_weights(batch)[bins[:, 0] == bins[:, 1]].sum())
    return Fraction(hits, param_space(cfg).total_weight)


def expected_collisions(
    X: ItemSet | Iterable[int],
    cfg: FamilyConfig,
    budget: int = DEFAULT_BUDGET,
    with_pairs: bool = False,
) -> CollisionStats:
    """Exact expected number of same-bin pairs, optionally per pair."""
    items = as_itemset(X, cfg)
    n = len(items)
    total = param_space(cfg).total_weight
    acc = 0
    pair_hits = np.zeros((n, n), dtype=object) if with_pairs else None
    for batch, bins in sweep(items, cfg, budget):
        w = _weights(batch)
        _, coll = row_stats(bins)
        acc += int((coll.astype(object) * w.astype(object)).sum()) if len(coll) else 0
        if with_pairs:
            same = bins[:, :, None] == bins[:, None, :]
            pair_hits += np.tensordot(w.astype(object), same.astype(object), axes=1)
    pairs = None
    if with_pairs:
        els = items.elements
        pairs = {
            (els[i], els[j]): Fraction(int(pair_hits[i, j]), total)
            for i in range(n)
            for j in range(i + 1, n)
        }
    return CollisionStats(Fraction(acc, total), pairs)


# ---------------------------------------------------------------------------
# Structural diagnostics


def close_threshold(m: int, n: int, alpha) -> int:
    """floor(m / (n alpha)), the width of a tiny interval."""
    return math.floor(Fraction(m) / (n * Fraction(alpha)))


def close_pairs(X: ItemSet | Iterable[int], m: int, a: int, alpha, n: int | None = None) -> int:
    """Unordered pairs x != y of X with signed_distance(a(x - y), m) <= floor(m/(n alpha)).

    ``n`` defaults to |X|.
    """
    if Fraction(alpha) < 1:
        raise DomainError(f"alpha must be >= 1, got {alpha}")
    items = list(as_itemset(X))
    n = len(items) if n is None else n
    w = close_threshold(m, n, alpha)
    return sum(
        1
        for i, x in enumerate(items)
        for y in items[i + 1 :]
        if signed_distance(a * (x - y), m) <= w
    )


def mean_close_pairs(X: ItemSet | Iterable[int], m: int, alpha, budget: int = DEFAULT_BUDGET) -> Fraction:
    """Exact mean of close_pairs over every unit multiplier modulo m."""
    items = as_itemset(X)
    n = len(items)
    if Fraction(alpha) < 1:
        raise DomainError(f"alpha must be >= 1, got {alpha}")
    us = units_array(m)
    if len(us) * n * n > budget:
        raise BudgetExceeded("close-pair sweep over the units exceeds the budget")
    w = close_threshold(m, n, alpha)
    x = items.as_array()
    iu, ju = np.triu_indices(n, k=1)
    diffs = (x[iu] - x[ju]) % m
    total = 0
    chunk = max(1, _BATCH_ELEMS // max(len(diffs), 1))
    for lo in range(0, len(us), chunk):
        r = (us[lo : lo + chunk, None] * diffs[None, :]) % m
        total += int((np.minimum(r, m - r) <= w).sum())
    return Fraction(total, len(us))


def is_linked(x: int, y: int, m: int, n: int) -> bool:
    """gcd(x - y, m) > ceil(m / n): such pairs never share a bin under unit multipliers."""
    return math.gcd(x - y, m) > -(-m // n)


def gcd_class_probability(m: int, d: int) -> Fraction:
    """Fraction of a in [1, m-1] with gcd(a, m) = d, counted directly."""
    a = np.arange(1, m, dtype=np.int64)
    return Fraction(int((np.gcd(a, m) == d).sum()), m - 1)


def gcd_class_maxloads(X: ItemSet | Iterable[int], cfg: FamilyConfig, d: int) -> list[int]:
    """Sorted maxloads of BlockedInt over the multipliers with gcd(a, m) = d."""
    if cfg.kind is not Kind.BLOCKED_INT:
        raise DomainError("gcd classes are defined for BlockedInt")
    m = cfg.modulus
    if m % d:
        raise DomainError(f"{d} does not divide {m}")
    items = as_itemset(X, cfg)
    a = np.arange(d, m, d, dtype=np.int64)
    a = a[np.gcd(a, m) == d]
    if not len(a):
        return []
    bins = assign_bins(cfg, items.as_array(), ParamBatch(a=a))
    return sorted(int(v) for v in row_stats(bins)[0])
