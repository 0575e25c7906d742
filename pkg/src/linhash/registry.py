"""
Claim registry: scaled, deterministic checks of the statements the library
is built around, parameterised by ``registry.yaml``.
"""
from __future__ import annotations

import json
import math
from collections import Counter
from dataclasses import dataclass, field
from enum import Enum
from fractions import Fraction
from functools import lru_cache
from importlib import resources
from typing import Callable

import numpy as np
import yaml

from .adversarial import RecipeKind, SetRecipe, generate, local_search_worst
from .effective_modulus import (
    crowding_distribution,
    f_distribution,
    residue_injectivity_check,
)
from .errors import BudgetExceeded, DomainError
from .families import FamilyConfig, ItemSet, ParamBatch, assign_bins
from .maxload import (
    exact_expected_maxload,
    expected_collisions,
    gcd_class_maxloads,
    gcd_class_probability,
    is_linked,
    maxload_profile,
    mc_expected_maxload,
    mean_close_pairs,
    pair_collision_prob,
)
from .numtheory import (
    divisors,
    farey_arrays,
    farey_successor,
    nearest_prime,
    smallest_odd_composite_at_least,
    sqrt_upper,
    totient,
    units,
    units_array,
)
from .twobin import jensen_maxload_bound, pigeon_rep, sum_excess

SCHEMA = 1


class Status(str, Enum):
    PASS = "Pass"
    FAIL = "Fail"
    SKIPPED = "Skipped"


@dataclass(frozen=True)
class ClaimReport:
    claim_id: str
    status: Status
    measured: list[tuple[str, object]] = field(default_factory=list)
    bound: str = ""
    regime_note: str = ""

    def to_dict(self) -> dict:
        return {
            "schema": SCHEMA,
            "claim_id": self.claim_id,
            "status": self.status.value,
            "measured": [[name, _encode(v)] for name, v in self.measured],
            "bound": self.bound,
            "regime_note": self.regime_note,
        }

    def to_json(self) -> str:
        return json.dumps(self.to_dict(), sort_keys=True)


def _encode(v: object) -> object:
    if isinstance(v, Fraction):
        return str(v)
    if isinstance(v, (np.integer,)):
        return int(v)
    if isinstance(v, (np.floating,)):
        return float(v)
    if isinstance(v, (list, tuple)):
        return [_encode(x) for x in v]
    return v


@lru_cache(maxsize=1)
def load_registry() -> dict:
    text = resources.files("linhash").joinpath("registry.yaml").read_text()
    data = yaml.safe_load(text)
    if data.get("schema") != SCHEMA:
        raise DomainError(f"unsupported registry schema {data.get('schema')}")
    return data["claims"]


def claim_ids() -> list[str]:
    return list(load_registry())


# Each check returns (ok, measured, concrete bound text).
Check = Callable[[dict, dict], tuple[bool, list, str]]
_CHECKS: dict[str, Check] = {}


def _check(claim_id: str):
    def deco(fn: Check) -> Check:
        _CHECKS[claim_id] = fn
        return fn
    return deco


def verify(claim_id: str) -> ClaimReport:
    entries = load_registry()
    if claim_id not in entries:
        raise KeyError(claim_id)
    entry = entries[claim_id]
    params = entry.get("params", {})
    consts = entry.get("constants", {})
    note = entry.get("regime_note", "")
    try:
        ok, measured, bound = _CHECKS[claim_id](params, consts)
    except BudgetExceeded as exc:
        return ClaimReport(claim_id, Status.SKIPPED, [], entry["statement"], f"{note}; skipped: {exc}")
    text = f"{entry['statement']}: {bound}" if bound else entry["statement"]
    return ClaimReport(claim_id, Status.PASS if ok else Status.FAIL, measured, text, note)


def verify_all() -> list[ClaimReport]:
    return [verify(cid) for cid in claim_ids()]


# ---------------------------------------------------------------------------


@_check("blockZsucks")
def _block_z_sucks(P, C):
    n, k = P["n"], P["k"]
    cfg = FamilyConfig("StridedInt", n * k, n)
    X = generate(SetRecipe(RecipeKind.STRIDED, {"stride": n}), n, n * k)
    _, loads = maxload_profile(X, cfg)
    lo, hi = int(loads.min()), int(loads.max())
    return lo == hi == n, [("multipliers", len(loads)), ("min_maxload", lo), ("max_maxload", hi)], f"all == {n}"


@_check("blockZisok")
def _block_z_is_ok(P, C):
    m, n, factor = P["m"], P["n"], Fraction(C["factor"])
    if math.gcd(m, n) != 1:
        raise DomainError("blockZisok needs gcd(m, n) = 1")
    sets = [("interval", generate(SetRecipe(RecipeKind.INTERVAL), n, m))]
    sets += [(f"random{s}", generate(SetRecipe(RecipeKind.RANDOM, seed=s), n, m)) for s in P["random_seeds"]]
    measured, worst = [], Fraction(1)
    for name, X in sets:
        es = exact_expected_maxload(X, FamilyConfig("StridedInt", m, n)).mean
        eb = exact_expected_maxload(X, FamilyConfig("BlockedInt", m, n)).mean
        ratio = max(es / eb, eb / es)
        worst = max(worst, ratio)
        measured += [(f"{name}_strided", es), (f"{name}_blocked", eb)]
    measured.append(("worst_ratio", worst))
    return worst <= factor, measured, f"worst ratio <= {factor}"


@_check("prGd")
def _pr_gd(P, C):
    checked, worst = 0, Fraction(0)
    for m in range(2, P["m_max"] + 1):
        for d in divisors(m)[:-1]:
            pr = gcd_class_probability(m, d)
            worst = max(worst, pr * d)
            checked += 1
    return worst <= 1, [("pairs_checked", checked), ("max_d_times_pr", worst)], "max d * Pr[G_d] <= 1"


@_check("slh-conditional")
def _slh_conditional(P, C):
    m, seed = P["m"], P["seed"]
    rng = np.random.default_rng(seed)
    measured, ok = [], True
    for d in [d for d in divisors(m) if d < P["d_below"]]:
        block = m // d
        size = min(P["max_items"], block)
        beta = size
        if beta < 2:
            continue
        i = int(rng.integers(d))
        X = ItemSet.of(i * block + int(v) for v in rng.choice(block, size=size, replace=False))
        lhs = gcd_class_maxloads(X, FamilyConfig("BlockedInt", m, beta), d)
        translated = ItemSet.of(x - i * block for x in X)
        _, rhs = maxload_profile(translated, FamilyConfig("SmartBlocked", block, beta))
        same = Counter(lhs) == Counter(int(v) for v in rhs)
        ok &= same
        measured.append((f"d={d}", same))
    return ok, measured, "multisets equal for every d"


@_check("linked-never")
def _linked_never(P, C):
    pairs = violations = 0
    for m in range(3, P["m_max"] + 1):
        x = np.arange(m, dtype=np.int64)
        for beta in P["bins"]:
            if beta > m:
                continue
            bins = assign_bins(FamilyConfig("SmartBlocked", m, beta), x, ParamBatch(a=units_array(m).copy()))
            for dx in range(1, m):
                if not is_linked(0, dx, m, beta):
                    continue
                pairs += m - dx
                violations += int((bins[:, dx:] == bins[:, : m - dx]).sum())
    return violations == 0, [("linked_pairs", pairs), ("collisions", violations)], "collisions == 0"


@_check("farey-dist")
def _farey_dist(P, C):
    bad = total = 0
    num, den = farey_arrays(P["m_max"])
    for m in range(1, P["m_max"] + 1):
        keep = den <= m
        c, k = num[keep], den[keep]
        det = c[1:] * k[:-1] - c[:-1] * k[1:]
        bad += int((det != 1).sum())
        total += len(det)
    return bad == 0, [("adjacent_pairs", total), ("violations", bad)], "every adjacent determinant == 1"


@_check("farey-neighbors")
def _farey_neighbors(P, C):
    bad = 0
    for m in range(P["m_min"], P["m_max"] + 1):
        dens = Counter(farey_successor(Fraction(i, m), m).denominator for i in units(m))
        if dens != Counter(units(m)):
            bad += 1
    return bad == 0, [("moduli_checked", P["m_max"] - P["m_min"] + 1), ("violations", bad)], "violations == 0"


@_check("fdist-exact")
def _fdist_exact(P, C):
    n, u = P["n"], P["u"]
    dist = f_distribution(n, u)
    L = n * u
    ks = range(1, math.isqrt(L) + 1)
    mism = [k for k in ks if dist.measure(k) != Fraction(totient(k), L)]
    total = dist.total()
    return not mism and total == 1, [("k_checked", len(ks)), ("mismatches", len(mism)), ("total", total)], "all equal; total == 1"


@_check("fdist-upper")
def _fdist_upper(P, C):
    c = Fraction(C["C"])
    ok, measured = True, []
    for L in P["nu"]:
        k, v = f_distribution(1, L, budget=max(L, 10**5)).max_measure()
        ok &= v * v * L <= c * c
        measured += [(f"nu={L}_argmax", k), (f"nu={L}_max_times_sqrt_nu", float(v) * math.sqrt(L))]
    return ok, measured, f"max * sqrt(nu) <= {c}"


@_check("restrictQ")
def _restrict_q(P, C):
    u = P["u"]
    x = np.arange(u, dtype=np.int64)
    bad = checked = 0
    for beta in P["bins"]:
        for k in range(max(2, beta), P["k_max"] + 1):
            cs = units_array(k).copy()
            smart = assign_bins(FamilyConfig("SmartBlocked", k, beta), x, ParamBatch(a=cs))
            real_cfg = FamilyConfig("RealBlocked", u, beta, real_denominator=k * beta * u)
            real = assign_bins(real_cfg, x, ParamBatch(a=cs * beta * u))
            bad += int((smart != real).sum())
            checked += smart.size
    return bad == 0, [("evaluations", checked), ("mismatches", bad)], "mismatches == 0"


def _real_bins(a: Fraction, x: np.ndarray, n: int) -> np.ndarray:
    return (a.numerator * x % a.denominator) * n // a.denominator


@_check("approxepx")
def _approx_eps(P, C):
    n, u, grid = P["n"], P["u"], P["eps_grid"]
    L = n * u
    rng = np.random.default_rng(P["seed"])
    x = np.arange(u, dtype=np.int64)
    shift_bad, worst = 0, Fraction(1)
    done = 0
    while done < P["trials"]:
        k = int(rng.integers(2, L + 1))
        c = int(rng.integers(1, k))
        if math.gcd(c, k) != 1:
            continue
        a0 = Fraction(c, k)
        a = a0 + Fraction(int(rng.integers(grid)), L * grid)
        if a >= 1:
            continue
        done += 1
        b0, b1 = _real_bins(a0, x, n), _real_bins(a, x, n)
        shift_bad += int((~np.isin((b1 - b0) % n, (0, 1))).sum())
        X = np.sort(rng.choice(u, size=n, replace=False))
        m0 = int(np.bincount(_real_bins(a0, X, n), minlength=n).max())
        m1 = int(np.bincount(_real_bins(a, X, n), minlength=n).max())
        worst = max(worst, Fraction(max(m0, m1), min(m0, m1)))
    factor = Fraction(C["factor"])
    return shift_bad == 0 and worst <= factor, [("bad_shifts", shift_bad), ("worst_ratio", worst)], f"bad_shifts == 0; ratio <= {factor}"


@_check("nothing-collides")
def _nothing_collides(P, C):
    n = P["n"]
    u = n ** P["exponent"]
    rates = []
    for s in range(P["sets"]):
        X = generate(SetRecipe(RecipeKind.RANDOM, seed=P["seed"] + s), n, u)
        rates.append(residue_injectivity_check(X, n, u, P["trials"], P["seed"] + s))
    mean = sum(rates) / len(rates)
    total = P["trials"] * P["sets"]
    se = math.sqrt(max(mean * (1 - mean), 1 / total) / total)
    target = 1 - 1 / n
    return mean >= target - C["z"] * se, [("rate", mean), ("stderr", se), ("target", target)], f"rate >= 1 - 1/n - {C['z']} stderr"


@_check("collide-1-3")
def _collide_1_3(P, C):
    pr = pair_collision_prob(P["x"], P["y"], FamilyConfig("TwoBinMult", P["p"], 2))
    measured = [(f"p={P['p']}", pr)]
    lo, hi = P["wide_range"]
    ok = pr == Fraction(2, 3)
    for p in P["wide_primes"]:
        v = pair_collision_prob(P["x"], P["y"], FamilyConfig("TwoBinMult", p, 2))
        ok &= lo <= v <= hi
        measured.append((f"p={p}", v))
    return ok, measured, f"== 2/3 at p={P['p']}; in [{lo}, {hi}] for larger p"


@_check("pigeons")
def _pigeons(P, C):
    bad = total = 0
    for p in P["primes"]:
        for n in P["n"]:
            cap = -(-p // n)
            for x in range(1, p):
                r = pigeon_rep(x, p, n)
                total += 1
                if r.reconstruct(p) != x or not (1 <= r.m < n and 1 <= r.k <= cap):
                    bad += 1
    return bad == 0, [("reps_checked", total), ("violations", bad)], "violations == 0"


@_check("epicbound")
def _epicbound(P, C):
    c = Fraction(C["c"])
    ok, measured = True, []
    for p in P["primes"]:
        n = next(j for j in range(2, p) if j ** 3 >= p)
        ratio = sum_excess(range(1, p), p, n).max_ratio()
        ok &= ratio <= c
        measured.append((f"p={p}_max_excess_over_rhs", ratio))
    return ok, measured, f"max ratio <= {c}"


@_check("sum-excess")
def _sum_excess(P, C):
    p, n = P["p"], P["n"]
    total = sum_excess(range(1, n + 1), p).total_excess
    lhs = total / p
    rhs = Fraction(C["c"] * math.log2(n) ** 3 / n)
    return lhs <= rhs, [("sum_excess", total), ("ratio_to_p", lhs), ("rhs", rhs)], "ratio_to_p <= rhs"


def _dontneedb_check(X: ItemSet, p: int, c: Fraction) -> tuple[bool, Fraction, Fraction, Fraction]:
    cfg = FamilyConfig("TwoBinMult", p, 2)
    n = len(X)
    mean = exact_expected_maxload(X, cfg).mean
    jb = jensen_maxload_bound(expected_collisions(X, cfg).expected_collisions, n)
    # n/2 + c sqrt(n) compared exactly: (mean - n/2)^2 <= c^2 n when mean > n/2
    excess = mean - Fraction(n, 2)
    ok = (excess <= 0 or excess * excess <= c * c * n) and mean <= jb
    return ok, mean, jb, Fraction(n, 2) + c * sqrt_upper(Fraction(n))


@_check("dontneedb")
def _dontneedb(P, C):
    p, n = P["p"], P["n"]
    X = generate(SetRecipe(RecipeKind.INTERVAL, {"start": 1}), n, p)
    ok, mean, jb, bound = _dontneedb_check(X, p, Fraction(C["c"]))
    return ok, [("mean", mean), ("jensen_bound", float(jb)), ("bound", float(bound))], "mean <= bound and mean <= jensen_bound"


@_check("pairwise-2bin")
def _pairwise(P, C):
    p, n = P["p"], P["n"]
    X = generate(SetRecipe(RecipeKind.INTERVAL), n, p)
    mean = exact_expected_maxload(X, FamilyConfig("TwoBinAffine", p, 2)).mean
    excess = mean - Fraction(n, 2)
    ok = excess <= 0 or excess * excess <= Fraction(n, 2)
    return ok, [("mean", mean), ("bound", n / 2 + math.sqrt(n / 2))], "mean <= n/2 + sqrt(n/2)"


@_check("nisnice")
def _nisnice(P, C):
    n = P["n"]
    cfg = FamilyConfig("RealBlocked", n * n, n)
    X = generate(SetRecipe(RecipeKind.INTERVAL), n, n * n)
    d = mc_expected_maxload(X, cfg, P["trials"], P["seed"])
    mean = float(d.mean)
    return mean <= C["bound"], [("mean", mean), ("stderr", d.stderr)], f"mean <= {C['bound']}"


@_check("proffak")
def _proffak(P, C):
    ok, measured = True, []
    for n in P["n"]:
        dist = crowding_distribution(n)
        top = max(dist.values())
        ok &= top <= Fraction(2, n) and sum(dist.values()) == 1
        measured.append((f"n={n}_max_times_n", top * n))
    return ok, measured, "max_k Pr[g = k] * n <= 2"


@_check("random-inputs")
def _random_inputs(P, C):
    n = P["n"]
    m = smallest_odd_composite_at_least(n ** 3)
    cfg = FamilyConfig("SmartBlocked", m, n)
    means = []
    for s in range(P["sets"]):
        X = generate(SetRecipe(RecipeKind.RANDOM, seed=P["seed"] + s), n, m)
        means.append(float(mc_expected_maxload(X, cfg, P["trials_per_set"], P["seed"] + s).mean))
    mean = sum(means) / len(means)
    bound = C["c"] * math.log(n) / math.log(math.log(n))
    return mean <= bound, [("m", m), ("mean", mean), ("bound", bound)], "mean <= bound"


@_check("close-pairs")
def _close_pairs(P, C):
    n = P["n"]
    m = nearest_prime(P["m_near"])
    X = generate(SetRecipe(RecipeKind.RANDOM, seed=P["seed"]), n, m)
    ok, measured = True, []
    for alpha in P["alpha"]:
        v = mean_close_pairs(X, m, alpha)
        bound = C["c"] * n / alpha * math.log(math.log(n))
        ok &= float(v) <= bound
        measured.append((f"alpha={alpha}", float(v)))
    return ok, measured, f"mean <= {C['c']} (n/alpha) ln ln n"


@_check("zm13-consistency")
def _zm13(P, C):
    n = P["n"]
    m = nearest_prime(n ** 3)
    cfg = FamilyConfig("SmartBlocked", m, n)
    X = generate(SetRecipe(RecipeKind.INTERVAL), n, m)
    res = local_search_worst(X, cfg, P["budget"], P["seed"])
    bound = C["c"] * n ** (1 / 3) * math.log2(n)
    return float(res.score) <= bound, [("m", m), ("score", res.score), ("scoring", res.scoring), ("bound", bound)], "score <= bound"
