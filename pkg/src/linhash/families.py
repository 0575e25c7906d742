"""
Linear hash families as pure bin-assignment functions.

Every family hashes an integer ``x`` by multiplying with a parameter ``a``,
reducing modulo the family's modulus and cutting the residue circle into
``bins`` pieces.  Blocked variants cut it into contiguous arcs,
``floor(r * bins / m)``; the strided variant stripes it, ``r mod bins``.
Real multipliers live on the exact grid ``a / N`` so that all arithmetic
stays in integers.

Parameter spaces are enumerable in batches (for exact sweeps) and sampleable
with a counter-based generator: the randomness of trial ``t`` comes from
Philox block ``t`` under key ``seed``, so any range of trials can be
regenerated independently of the others.
"""
from __future__ import annotations

import json
import math
from dataclasses import dataclass, field
from enum import Enum
from typing import Iterable, Iterator

import numpy as np

from .errors import DomainError
from .numtheory import is_prime, totient, units_array

MAX_MODULUS = 2**31
_INT64_LIMIT = 2**63 - 1
# Below this size SmartBlocked samples by indexing a table of units.
_UNIT_TABLE_LIMIT = 2**20


class Kind(str, Enum):
    BLOCKED_INT = "BlockedInt"
    STRIDED_INT = "StridedInt"
    SMART_BLOCKED = "SmartBlocked"
    RANDOM_MODULUS = "RandomModulus"
    REAL_BLOCKED = "RealBlocked"
    TWO_BIN_MULT = "TwoBinMult"
    TWO_BIN_AFFINE = "TwoBinAffine"


def default_real_denominator(bins: int, universe: int) -> int:
    """Smallest power of two >= bins * universe * 2**10."""
    target = bins * universe * 2**10
    return 1 << (target - 1).bit_length()


@dataclass(frozen=True)
class FamilyConfig:
    """A hash family variant plus its parameters.

    ``modulus`` is m (integer families), p (two-bin families) or the universe
    size u (RealBlocked).  ``real_denominator`` is the grid denominator N of
    RealBlocked multipliers and is None for every other kind.
    """

    kind: Kind
    modulus: int
    bins: int
    real_denominator: int | None = None
    allow_large: bool = field(default=False, compare=False, repr=False)

    def __post_init__(self) -> None:
        object.__setattr__(self, "kind", Kind(self.kind))
        m, beta = self.modulus, self.bins
        if beta < 2 or beta > m:
            raise DomainError(f"need 2 <= bins <= modulus, got bins={beta}, modulus={m}")
        if m > MAX_MODULUS and not self.allow_large:
            raise DomainError(f"modulus {m} exceeds 2**31; pass allow_large=True")
        if self.kind in (Kind.TWO_BIN_MULT, Kind.TWO_BIN_AFFINE):
            if beta != 2 or not is_prime(m):
                raise DomainError("two-bin families need a prime modulus and bins=2")
        if self.kind is Kind.RANDOM_MODULUS and beta > (m + 1) // 2:
            raise DomainError("RandomModulus needs bins <= ceil(modulus/2), the smallest drawn modulus")
        if self.kind is Kind.REAL_BLOCKED:
            if self.real_denominator is None:
                object.__setattr__(self, "real_denominator", default_real_denominator(beta, m))
            elif self.real_denominator < beta * m:
                raise DomainError(
                    f"real_denominator {self.real_denominator} < bins*universe = {beta * m}"
                )
        elif self.real_denominator is not None:
            raise DomainError("real_denominator only applies to RealBlocked")

    @property
    def universe(self) -> int:
        return self.modulus

    def to_dict(self) -> dict:
        return {
            "kind": self.kind.value,
            "modulus": self.modulus,
            "bins": self.bins,
            "real_denominator": self.real_denominator,
        }

    def to_json(self) -> str:
        return json.dumps(self.to_dict(), sort_keys=True)

    @classmethod
    def from_dict(cls, d: dict, allow_large: bool = False) -> "FamilyConfig":
        return cls(
            kind=Kind(d["kind"]),
            modulus=int(d["modulus"]),
            bins=int(d["bins"]),
            real_denominator=None if d.get("real_denominator") is None else int(d["real_denominator"]),
            allow_large=allow_large,
        )

    @classmethod
    def from_json(cls, s: str) -> "FamilyConfig":
        return cls.from_dict(json.loads(s))


@dataclass(frozen=True)
class HashParam:
    """One hash function of a family.

    ``a`` is the multiplier (the numerator over N for RealBlocked), ``b`` the
    shift (TwoBinAffine only) and ``k`` the drawn modulus (RandomModulus only).
    """

    a: int
    b: int = 0
    k: int | None = None


@dataclass(frozen=True)
class ItemSet:
    elements: tuple[int, ...]

    def __post_init__(self) -> None:
        els = tuple(int(x) for x in self.elements)
        object.__setattr__(self, "elements", els)
        if els and els[0] < 0:
            raise DomainError("items must be nonnegative")
        if any(x >= y for x, y in zip(els, els[1:])):
            raise DomainError("items must be strictly ascending")

    @classmethod
    def of(cls, values: Iterable[int]) -> "ItemSet":
        vals = sorted(int(v) for v in values)
        if len(set(vals)) != len(vals):
            raise DomainError("duplicate items")
        return cls(tuple(vals))

    def __iter__(self) -> Iterator[int]:
        return iter(self.elements)

    def __len__(self) -> int:
        return len(self.elements)

    def __contains__(self, x: object) -> bool:
        return x in self.elements

    def as_array(self) -> np.ndarray:
        return np.asarray(self.elements, dtype=np.int64)

    def check_fits(self, cfg: FamilyConfig) -> None:
        if self.elements and self.elements[-1] >= cfg.universe:
            raise DomainError(f"item {self.elements[-1]} outside universe [0, {cfg.universe})")


def as_itemset(X: ItemSet | Iterable[int], cfg: FamilyConfig | None = None) -> ItemSet:
    items = X if isinstance(X, ItemSet) else ItemSet.of(X)
    if cfg is not None:
        items.check_fits(cfg)
    return items


# ---------------------------------------------------------------------------
# Scalar bin functions


def validate_param(param: HashParam, cfg: FamilyConfig) -> None:
    kind, m = cfg.kind, cfg.modulus
    a, b = param.a, param.b
    if kind is not Kind.TWO_BIN_AFFINE and b != 0:
        raise DomainError(f"{kind.value} has no shift term")
    if kind in (Kind.BLOCKED_INT, Kind.STRIDED_INT, Kind.TWO_BIN_MULT):
        ok = 1 <= a <= m - 1
    elif kind is Kind.SMART_BLOCKED:
        ok = 1 <= a <= m - 1 and math.gcd(a, m) == 1
    elif kind is Kind.TWO_BIN_AFFINE:
        ok = 1 <= a <= m - 1 and 0 <= b <= m - 1
    elif kind is Kind.REAL_BLOCKED:
        ok = 1 <= a <= cfg.real_denominator - 1
    else:
        k = param.k
        ok = (
            k is not None
            and (m + 1) // 2 <= k <= m
            and 1 <= a <= k - 1
            and math.gcd(a, k) == 1
        )
    if not ok:
        raise DomainError(f"invalid parameter {param} for {kind.value} with modulus {m}")


def bin_blocked(x: int, param: HashParam, cfg: FamilyConfig) -> int:
    """floor((a x mod m) * bins / m); RandomModulus uses the drawn modulus k."""
    if cfg.kind not in (Kind.BLOCKED_INT, Kind.SMART_BLOCKED, Kind.RANDOM_MODULUS, Kind.TWO_BIN_MULT):
        raise DomainError(f"bin_blocked does not apply to {cfg.kind.value}")
    validate_param(param, cfg)
    m = param.k if cfg.kind is Kind.RANDOM_MODULUS else cfg.modulus
    return (param.a * x % m) * cfg.bins // m


def bin_strided(x: int, param: HashParam, cfg: FamilyConfig) -> int:
    if cfg.kind is not Kind.STRIDED_INT:
        raise DomainError(f"bin_strided does not apply to {cfg.kind.value}")
    validate_param(param, cfg)
    return (param.a * x % cfg.modulus) % cfg.bins


def bin_affine(x: int, param: HashParam, cfg: FamilyConfig) -> int:
    if cfg.kind is not Kind.TWO_BIN_AFFINE:
        raise DomainError(f"bin_affine does not apply to {cfg.kind.value}")
    validate_param(param, cfg)
    p = cfg.modulus
    return 2 * ((param.a * x + param.b) % p) // p


def bin_real(x: int, param: HashParam, cfg: FamilyConfig) -> int:
    """Bin of x under the real multiplier a/N: floor(frac(a x / N) * bins)."""
    if cfg.kind is not Kind.REAL_BLOCKED:
        raise DomainError(f"bin_real does not apply to {cfg.kind.value}")
    validate_param(param, cfg)
    N = cfg.real_denominator
    return (param.a * x % N) * cfg.bins // N


def bin_of(x: int, param: HashParam, cfg: FamilyConfig) -> int:
    kind = cfg.kind
    if kind is Kind.STRIDED_INT:
        return bin_strided(x, param, cfg)
    if kind is Kind.TWO_BIN_AFFINE:
        return bin_affine(x, param, cfg)
    if kind is Kind.REAL_BLOCKED:
        return bin_real(x, param, cfg)
    return bin_blocked(x, param, cfg)


# ---------------------------------------------------------------------------
# Batches of parameters


@dataclass
class ParamBatch:
    """Column arrays of parameters; ``w`` holds integer sampling weights."""

    a: np.ndarray
    b: np.ndarray | None = None
    k: np.ndarray | None = None
    w: np.ndarray | None = None

    def __len__(self) -> int:
        return len(self.a)

    def params(self) -> Iterator[HashParam]:
        for i in range(len(self.a)):
            yield HashParam(
                a=int(self.a[i]),
                b=0 if self.b is None else int(self.b[i]),
                k=None if self.k is None else int(self.k[i]),
            )


def _fits_int64(*bounds: int) -> bool:
    return all(bound <= _INT64_LIMIT for bound in bounds)


def assign_bins(cfg: FamilyConfig, x: np.ndarray, batch: ParamBatch) -> np.ndarray:
    """Bin of every item under every parameter in the batch, shape (len(batch), len(x))."""
    kind, beta = cfg.kind, cfg.bins
    xmax = int(x.max()) if len(x) else 0
    if kind is Kind.REAL_BLOCKED:
        mod = cfg.real_denominator
    elif kind is Kind.RANDOM_MODULUS:
        mod = int(batch.k.max()) if len(batch) else cfg.modulus
    else:
        mod = cfg.modulus
    amax = int(batch.a.max()) if len(batch) else 0
    safe = _fits_int64(amax * xmax + mod, mod * beta)
    dt = np.int64 if safe else object
    A = batch.a.astype(dt)[:, None]
    X = x.astype(dt)[None, :]
    prod = A * X
    if kind is Kind.TWO_BIN_AFFINE:
        prod = prod + batch.b.astype(dt)[:, None]
    if kind is Kind.RANDOM_MODULUS:
        K = batch.k.astype(dt)[:, None]
        return (prod % K) * beta // K
    r = prod % mod
    if kind is Kind.STRIDED_INT:
        return r % beta
    return r * beta // mod


# ---------------------------------------------------------------------------
# Parameter spaces


@dataclass(frozen=True)
class ParamSpace:
    """All parameters of a family together with their sampling weights.

    Every kind samples uniformly from its space except RandomModulus, which
    draws k uniformly first and then a unit modulo k.  Its pair (k, a) gets
    integer weight ``L / phi(k)`` where L is the lcm of the phi(k), so that
    weighted counts are exact integers summing to ``total_weight``.
    """

    cfg: FamilyConfig

    @property
    def moduli(self) -> range:
        m = self.cfg.modulus
        return range((m + 1) // 2, m + 1)

    @property
    def size(self) -> int:
        cfg = self.cfg
        kind, m = cfg.kind, cfg.modulus
        if kind in (Kind.BLOCKED_INT, Kind.STRIDED_INT, Kind.TWO_BIN_MULT):
            return m - 1
        if kind is Kind.SMART_BLOCKED:
            return totient(m)
        if kind is Kind.TWO_BIN_AFFINE:
            return m * (m - 1)
        if kind is Kind.REAL_BLOCKED:
            return cfg.real_denominator - 1
        return sum(totient(k) for k in self.moduli)

    def __len__(self) -> int:
        return self.size

    @property
    def _weight_lcm(self) -> int:
        return math.lcm(*(totient(k) for k in self.moduli))

    @property
    def total_weight(self) -> int:
        if self.cfg.kind is Kind.RANDOM_MODULUS:
            return len(self.moduli) * self._weight_lcm
        return self.size

    def batches(self, chunk: int = 1 << 14) -> Iterator[ParamBatch]:
        """Exhaustive enumeration in order, ``chunk`` candidates at a time."""
        cfg = self.cfg
        kind, m = cfg.kind, cfg.modulus
        if kind in (Kind.BLOCKED_INT, Kind.STRIDED_INT, Kind.TWO_BIN_MULT, Kind.REAL_BLOCKED):
            hi = cfg.real_denominator if kind is Kind.REAL_BLOCKED else m
            for lo in range(1, hi, chunk):
                yield ParamBatch(a=np.arange(lo, min(lo + chunk, hi), dtype=np.int64))
        elif kind is Kind.SMART_BLOCKED:
            for lo in range(1, m, chunk):
                a = np.arange(lo, min(lo + chunk, m), dtype=np.int64)
                yield ParamBatch(a=a[np.gcd(a, m) == 1])
        elif kind is Kind.TWO_BIN_AFFINE:
            total = m * (m - 1)
            for lo in range(0, total, chunk):
                idx = np.arange(lo, min(lo + chunk, total), dtype=np.int64)
                yield ParamBatch(a=1 + idx // m, b=idx % m)
        else:
            L = self._weight_lcm
            for k in self.moduli:
                wk = L // totient(k)
                for lo in range(1, k, chunk):
                    a = np.arange(lo, min(lo + chunk, k), dtype=np.int64)
                    a = a[np.gcd(a, k) == 1]
                    yield ParamBatch(
                        a=a,
                        k=np.full(len(a), k, dtype=np.int64),
                        w=np.full(len(a), wk, dtype=object if wk > _INT64_LIMIT else np.int64),
                    )

    def __iter__(self) -> Iterator[HashParam]:
        for batch in self.batches():
            yield from batch.params()


def param_space(cfg: FamilyConfig) -> ParamSpace:
    return ParamSpace(cfg)


# ---------------------------------------------------------------------------
# Counter-based sampling

_M32 = np.uint64(0xFFFFFFFF)
_S32 = np.uint64(32)


def _mulhi(w: np.ndarray, n) -> np.ndarray:
    """floor(w * n / 2**64) for uint64 words w and 0 < n < 2**63: a uniform index in [0, n).

    ``n`` may be a scalar or an array broadcasting against ``w``.
    """
    n = np.asarray(n, dtype=np.uint64)
    nlo, nhi = n & _M32, n >> _S32
    wlo, whi = w & _M32, w >> _S32
    p0 = wlo * nlo
    p1 = wlo * nhi
    p2 = whi * nlo
    p3 = whi * nhi
    mid = (p0 >> _S32) + (p1 & _M32) + (p2 & _M32)
    return (p3 + (p1 >> _S32) + (p2 >> _S32) + (mid >> _S32)).astype(np.int64)


def _uniform_index(words: np.ndarray, n: int) -> np.ndarray:
    """Uniform index in [0, n) per row, from the row's first word (first two when n is huge)."""
    if n < 2**63:
        return _mulhi(words[:, 0], n)
    return np.array(
        [((int(hi) << 64 | int(lo)) * n) >> 128 for hi, lo in words[:, :2]], dtype=object
    )


def trial_words(seed: int, start: int, count: int) -> np.ndarray:
    """Four 64-bit words per trial; row i is a pure function of (seed, start + i)."""
    gen = np.random.Philox(key=seed, counter=start)
    return gen.random_raw(4 * count).reshape(count, 4)


def _fallback_rng(seed: int, t: int) -> np.random.Generator:
    return np.random.default_rng([seed, t, 0x1DC0FFEE])


def _unit_by_rejection(words: np.ndarray, moduli: np.ndarray, seed: int, start: int) -> np.ndarray:
    """A uniform unit modulo moduli[i] for each trial, by rejection on [1, k)."""
    count = len(moduli)
    out = np.zeros(count, dtype=np.int64)
    done = np.zeros(count, dtype=bool)
    ks = moduli.astype(np.int64)
    for j in range(words.shape[1]):
        todo = ~done
        if not todo.any():
            break
        cand = 1 + _mulhi(words[todo, j], ks[todo] - 1)
        ok = np.gcd(cand, ks[todo]) == 1
        idx = np.flatnonzero(todo)[ok]
        out[idx] = cand[ok]
        done[idx] = True
    for i in np.flatnonzero(~done):
        k = int(ks[i])
        rng = _fallback_rng(seed, start + int(i))
        while True:
            c = int(rng.integers(1, k))
            if math.gcd(c, k) == 1:
                out[i] = c
                break
    return out


def sample_batch(cfg: FamilyConfig, seed: int, start: int, count: int) -> ParamBatch:
    """Parameters for trials start .. start+count-1 under key ``seed``."""
    words = trial_words(seed, start, count)
    kind, m = cfg.kind, cfg.modulus
    if kind in (Kind.BLOCKED_INT, Kind.STRIDED_INT, Kind.TWO_BIN_MULT):
        return ParamBatch(a=1 + _uniform_index(words, m - 1))
    if kind is Kind.REAL_BLOCKED:
        return ParamBatch(a=1 + _uniform_index(words, cfg.real_denominator - 1))
    if kind is Kind.TWO_BIN_AFFINE:
        idx = _uniform_index(words, m * (m - 1))
        return ParamBatch(a=1 + idx // m, b=idx % m)
    if kind is Kind.SMART_BLOCKED:
        if m <= _UNIT_TABLE_LIMIT:
            table = units_array(m)
            return ParamBatch(a=table[_uniform_index(words, len(table))])
        ks = np.full(count, m, dtype=np.int64)
        return ParamBatch(a=_unit_by_rejection(words, ks, seed, start))
    lo = (m + 1) // 2
    ks = lo + _uniform_index(words, m - lo + 1)
    return ParamBatch(a=_unit_by_rejection(words[:, 1:], ks, seed, start), k=ks)


def sample_param(cfg: FamilyConfig, seed: int, trial: int = 0) -> HashParam:
    """The parameter drawn for trial ``trial`` under ``seed`` (reproducible)."""
    return next(sample_batch(cfg, seed, trial, 1).params())
