"""
Structured item sets and a hill-climbing search for bad ones.
"""
from __future__ import annotations

import json
from dataclasses import dataclass, field
from enum import Enum
from fractions import Fraction
from typing import IO

import numpy as np

from .errors import DomainError
from .families import FamilyConfig, ItemSet, as_itemset, param_space
from .maxload import exact_expected_maxload, mc_expected_maxload
from .numtheory import mod_inverse


class RecipeKind(str, Enum):
    INTERVAL = "Interval"
    STRIDED = "Strided"
    ARITHMETIC = "Arithmetic"
    GEOMETRIC = "Geometric"
    RANDOM = "Random"
    INVERSE_IMAGE = "InverseImage"


# kind -> (parameter name, default); None means required
_PARAMS: dict[RecipeKind, dict[str, int | None]] = {
    RecipeKind.INTERVAL: {"start": 0},
    RecipeKind.STRIDED: {"stride": None},
    RecipeKind.ARITHMETIC: {"start": 0, "step": None},
    RecipeKind.GEOMETRIC: {"start": 1, "base": None},
    RecipeKind.RANDOM: {"low": 0},
    RecipeKind.INVERSE_IMAGE: {"c": None, "p": None},
}


@dataclass(frozen=True)
class SetRecipe:
    """How to build an item set.

    Interval: start + [n].  Strided: stride * [n].  Arithmetic: start + step * [n].
    Geometric: start * base**i.  Random: n distinct uniform draws from [low, universe).
    InverseImage: (c^{-1} j mod p) for j = 1 .. n, the set that c maps onto [1, n].
    """

    kind: RecipeKind
    params: dict[str, int] = field(default_factory=dict)
    seed: int | None = None

    def __post_init__(self) -> None:
        object.__setattr__(self, "kind", RecipeKind(self.kind))
        allowed = _PARAMS[self.kind]
        unknown = set(self.params) - set(allowed)
        if unknown:
            raise DomainError(f"{self.kind.value} takes no parameter(s) {sorted(unknown)}")
        full = {}
        for name, default in allowed.items():
            if name in self.params:
                full[name] = int(self.params[name])
            elif default is None:
                raise DomainError(f"{self.kind.value} needs parameter {name!r}")
            else:
                full[name] = default
        object.__setattr__(self, "params", full)
        if self.kind is RecipeKind.RANDOM and self.seed is None:
            raise DomainError("Random recipes need a seed")

    def to_dict(self) -> dict:
        return {"kind": self.kind.value, "params": dict(self.params), "seed": self.seed}

    def to_json(self) -> str:
        return json.dumps(self.to_dict(), sort_keys=True)

    @classmethod
    def from_dict(cls, d: dict) -> "SetRecipe":
        return cls(RecipeKind(d["kind"]), dict(d.get("params", {})), d.get("seed"))

    @classmethod
    def from_json(cls, s: str) -> "SetRecipe":
        return cls.from_dict(json.loads(s))


def _random_subset(n: int, low: int, high: int, seed: int) -> list[int]:
    # draw, drop duplicates, top up; deterministic for a fixed seed
    rng = np.random.default_rng(seed)
    chosen: set[int] = set()
    while len(chosen) < n:
        draws = rng.integers(low, high, size=n - len(chosen))
        chosen.update(int(v) for v in draws)
    return sorted(chosen)


def generate(recipe: SetRecipe, n: int, universe: int) -> ItemSet:
    """Build the n-element set described by ``recipe`` inside [0, universe)."""
    if n < 0:
        raise DomainError("n must be nonnegative")
    kind, P = recipe.kind, recipe.params
    if kind is RecipeKind.INTERVAL:
        vals = [P["start"] + i for i in range(n)]
    elif kind is RecipeKind.STRIDED:
        if P["stride"] < 1:
            raise DomainError("stride must be positive")
        vals = [P["stride"] * i for i in range(n)]
    elif kind is RecipeKind.ARITHMETIC:
        if P["step"] < 1:
            raise DomainError("step must be positive")
        vals = [P["start"] + P["step"] * i for i in range(n)]
    elif kind is RecipeKind.GEOMETRIC:
        if P["start"] < 1 or P["base"] < 2:
            raise DomainError("Geometric needs start >= 1 and base >= 2")
        vals = [P["start"] * P["base"] ** i for i in range(n)]
    elif kind is RecipeKind.RANDOM:
        low = P["low"]
        if low < 0 or universe - low < n:
            raise DomainError(f"cannot draw {n} distinct items from [{low}, {universe})")
        vals = _random_subset(n, low, universe, recipe.seed)
    else:
        c, p = P["c"], P["p"]
        if p > universe or n >= p:
            raise DomainError(f"InverseImage needs n < p <= universe, got n={n}, p={p}")
        ci = mod_inverse(c, p)
        vals = [ci * j % p for j in range(1, n + 1)]
    if vals and (min(vals) < 0 or max(vals) >= universe):
        raise DomainError(f"{kind.value} recipe does not fit in [0, {universe}) with n={n}")
    return ItemSet.of(vals)


@dataclass(frozen=True)
class SearchResult:
    items: ItemSet
    score: Fraction | float
    initial_score: Fraction | float
    scoring: str          # "exact" or "mc:<trials>"
    trace: tuple[dict, ...]


def _scorer(cfg: FamilyConfig, n_items: int, exact_budget: int, mc_trials: int, seed: int):
    exact = param_space(cfg).size * max(n_items, 1) <= exact_budget
    if exact:
        return "exact", lambda X: exact_expected_maxload(X, cfg, exact_budget).mean
    # one fixed seed for every candidate: all sets see the same sampled functions
    return f"mc:{mc_trials}", lambda X: float(mc_expected_maxload(X, cfg, mc_trials, seed).mean)


def local_search_worst(
    initial: ItemSet,
    cfg: FamilyConfig,
    budget: int,
    seed: int,
    *,
    exact_budget: int = 10**6,
    mc_trials: int = 2000,
    low: int = 0,
    trace_out: IO[str] | None = None,
) -> SearchResult:
    """Hill-climb over single swaps towards a set with large expected maxload.

    Each of the ``budget`` steps removes a random member and inserts a random
    non-member of [low, universe); the move is kept when the score does not
    drop.  Scores are exact sweeps when |params| * |X| <= exact_budget and
    otherwise Monte Carlo means over ``mc_trials`` functions.
    """
    if budget < 0:
        raise DomainError("budget must be nonnegative")
    items = as_itemset(initial, cfg)
    universe = cfg.universe
    n = len(items)
    if n and universe - low <= n and budget > 0:
        raise DomainError("no room for swaps: the set fills the universe")
    scoring, score_of = _scorer(cfg, n, exact_budget, mc_trials, seed)
    current = set(items.elements)
    score = initial_score = score_of(items)
    rng = np.random.default_rng([seed, 0x5EA4C4])
    trace = []
    for step in range(budget if n else 0):
        members = sorted(current)
        out = members[int(rng.integers(n))]
        while True:
            new = int(rng.integers(low, universe))
            if new not in current:
                break
        cand = ItemSet.of((current - {out}) | {new})
        s = score_of(cand)
        accepted = s >= score
        if accepted:
            current, score = set(cand.elements), s
        rec = {"step": step, "score": _plain(s), "accepted": accepted}
        trace.append(rec)
        if trace_out is not None:
            trace_out.write(json.dumps(rec) + "\n")
    return SearchResult(ItemSet.of(current), score, initial_score, scoring, tuple(trace))


def _plain(v: Fraction | float) -> float | list[int]:
    if isinstance(v, Fraction):
        return [v.numerator, v.denominator]
    return v
