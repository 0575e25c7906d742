"""
Acceptance criteria, one test each.

Every test prints a single ``PASS``/``FAIL`` line with its wall time and the
runtime limit, then asserts.  A criterion passes only if its inequality or
identity holds and it finishes inside the limit.
"""
import math
import time
from collections import Counter
from fractions import Fraction

import numpy as np
import pytest

from linhash.adversarial import SetRecipe, generate, local_search_worst
from linhash.effective_modulus import f_distribution
from linhash.families import FamilyConfig, ItemSet, ParamBatch, assign_bins, param_space
from linhash.maxload import (
    exact_expected_maxload,
    gcd_class_maxloads,
    maxload_profile,
    mc_expected_maxload,
    pair_collision_prob,
)
from linhash.numtheory import (
    divisors,
    farey_arrays,
    farey_sequence,
    nearest_prime,
    smallest_odd_composite_at_least,
    totient,
    units,
)
from linhash.twobin import sum_excess


@pytest.fixture
def report(capsys):
    def emit(num: int, title: str, ok: bool, elapsed: float, limit: float | None, detail: str) -> None:
        in_time = limit is None or elapsed < limit
        status = "PASS" if ok and in_time else "FAIL"
        lim = f"limit {limit:g}s" if limit is not None else "no limit"
        with capsys.disabled():
            print(f"\n[{num:2d}] {status} {title}: {detail} ({elapsed:.2f}s, {lim})")
        assert ok, detail
        assert in_time, f"took {elapsed:.2f}s, limit {limit}s"

    return emit


def test_01_farey_exactness(report):
    t0 = time.perf_counter()
    listing = " ".join(f"{f.numerator}/{f.denominator}" for f in farey_sequence(5))
    ok_listing = listing == "0/1 1/5 1/4 1/3 2/5 1/2 3/5 2/3 3/4 4/5 1/1"

    # adjacent c/k < c'/k' differ by exactly 1/(k k'), i.e. c' k - c k' = 1
    num, den = farey_arrays(500)
    dist_bad = pairs = 0
    for m in range(1, 501):
        keep = den <= m
        c, k = num[keep], den[keep]
        dist_bad += int((c[1:] * k[:-1] - c[:-1] * k[1:] != 1).sum())
        pairs += len(c) - 1

    # successors of the m-fractions have each denominator l coprime to m exactly once
    num, den = farey_arrays(200)
    nb_bad = 0
    for m in range(2, 201):
        keep = np.flatnonzero(den <= m)
        k = den[keep]
        succ = k[1:][k[:-1] == m]
        want = [l for l in range(1, m + 1) if math.gcd(l, m) == 1]
        if sorted(succ.tolist()) != want:
            nb_bad += 1
    elapsed = time.perf_counter() - t0
    ok = ok_listing and dist_bad == 0 and nb_bad == 0
    report(1, "Farey exactness", ok, elapsed, 5,
           f"listing={'ok' if ok_listing else listing}; {pairs} adjacent pairs, {dist_bad} gap violations; "
           f"{nb_bad} neighbour violations for m<=200")


def test_02_block_z_sucks(report):
    t0 = time.perf_counter()
    n, k = 8, 9
    cfg = FamilyConfig("StridedInt", n * k, n)
    X = generate(SetRecipe("Strided", {"stride": n}), n, n * k)
    params, loads = maxload_profile(X, cfg)
    elapsed = time.perf_counter() - t0
    ok = len(params) == 71 and set(loads.tolist()) == {8}
    report(2, "blockZsucks", ok, elapsed, 1, f"{len(params)} multipliers, maxloads {sorted(set(loads.tolist()))}")


def test_03_two_bin_pair_probability(report):
    t0 = time.perf_counter()
    exact = pair_collision_prob(1, 3, FamilyConfig("TwoBinMult", 7, 2))
    vals = {p: pair_collision_prob(1, 3, FamilyConfig("TwoBinMult", p, 2)) for p in (101, 1009)}
    elapsed = time.perf_counter() - t0
    ok = exact == Fraction(2, 3) and all(Fraction(6, 10) <= v <= Fraction(7, 10) for v in vals.values())
    detail = f"p=7: {exact}; " + ", ".join(f"p={p}: {v} ~ {float(v):.4f}" for p, v in vals.items())
    report(3, "two-bin pair probability", ok, elapsed, 5, detail)


def test_04_pairwise_independent_two_bin(report):
    t0 = time.perf_counter()
    p, n = 101, 20
    cfg = FamilyConfig("TwoBinAffine", p, 2)
    sets = {
        "Interval": SetRecipe("Interval"),
        "Arithmetic(3)": SetRecipe("Arithmetic", {"step": 3}),
        "Strided(5)": SetRecipe("Strided", {"stride": 5}),
    }
    bound = n / 2 + math.sqrt(n / 2)
    means = {}
    for name, r in sets.items():
        d = exact_expected_maxload(generate(r, n, p), cfg)
        assert d.total == p * (p - 1)
        means[name] = d.mean
    elapsed = time.perf_counter() - t0
    # exact comparison: mean - n/2 <= sqrt(n/2)  <=>  (mean - n/2)^2 <= n/2 when positive
    ok = all(m - Fraction(n, 2) <= 0 or (m - Fraction(n, 2)) ** 2 <= Fraction(n, 2) for m in means.values())
    detail = ", ".join(f"{k}: {float(v):.4f}" for k, v in means.items()) + f" (bound {bound:.4f})"
    report(4, "pairwise-independent two-bin", ok, elapsed, 30, detail)


def test_05_f_distribution_exactness(report):
    t0 = time.perf_counter()
    ok, parts = True, []
    for n, u in [(2, 8), (4, 25), (8, 128)]:
        fd = f_distribution(n, u)
        L = n * u
        small = all(fd.measure(k) == Fraction(totient(k), L) for k in range(1, math.isqrt(L) + 1))
        total = fd.total() == 1
        ok &= small and total
        parts.append(f"nu={L}: small-k {'exact' if small else 'MISMATCH'}, total {'=1' if total else '!=1'}")
    elapsed = time.perf_counter() - t0
    report(5, "F-distribution exactness", ok, elapsed, 10, "; ".join(parts))


def test_06_f_distribution_upper_bound(report):
    t0 = time.perf_counter()
    ok, parts = True, []
    for nu in (10**2, 10**3, 10**4, 10**5):
        fd = f_distribution(1, nu)
        assert fd.exact
        k, v = fd.max_measure()
        # v <= 4/sqrt(nu)  <=>  v^2 nu <= 16, exactly
        ok &= v * v * nu <= 16
        parts.append(f"nu={nu}: max at k={k}, sqrt(nu)*max={float(v) * math.sqrt(nu):.3f}")
    elapsed = time.perf_counter() - t0
    report(6, "F-distribution upper bound (C=4)", ok, elapsed, 120, "; ".join(parts))


def test_07_restrict_q(report):
    t0 = time.perf_counter()
    u = 256
    x = np.arange(u, dtype=np.int64)
    checked = mismatches = 0
    for beta in (2, 4, 8):
        for k in range(max(2, beta), 65):
            cs = np.array(list(units(k)), dtype=np.int64)
            real = FamilyConfig("RealBlocked", u, beta, real_denominator=k * beta * u)
            smart = FamilyConfig("SmartBlocked", k, beta)
            a = assign_bins(real, x, ParamBatch(a=cs * beta * u))
            b = assign_bins(smart, x, ParamBatch(a=cs))
            mismatches += int((a != b).sum())
            checked += a.size
    elapsed = time.perf_counter() - t0
    report(7, "restrictQ oracle equivalence", mismatches == 0, elapsed, 10,
           f"{checked} (c/k, x) evaluations over bins 2/4/8, {mismatches} mismatches")


def test_08_slh_conditional(report):
    t0 = time.perf_counter()
    m = 120
    rng = np.random.default_rng(120)
    ok, checked = True, []
    for d in divisors(m):
        if d >= 30:
            continue
        w = m // d
        size = min(8, w)
        i = int(rng.integers(d))
        X = ItemSet.of(i * w + int(v) for v in rng.choice(w, size=size, replace=False))
        lhs = gcd_class_maxloads(X, FamilyConfig("BlockedInt", m, size), d)
        _, rhs = maxload_profile([x - i * w for x in X], FamilyConfig("SmartBlocked", w, size))
        same = Counter(lhs) == Counter(rhs.tolist())
        ok &= same
        checked.append(f"d={d}{'' if same else '(!)'}")
    elapsed = time.perf_counter() - t0
    report(8, "slh-conditional multiset equality", ok, elapsed, 5, " ".join(checked))


def test_09_two_bin_expected_maxload(report):
    t0 = time.perf_counter()
    p, n = 2053, 32
    cfg = FamilyConfig("TwoBinMult", p, 2)
    sets = {
        "Interval": SetRecipe("Interval", {"start": 1}),
        "Strided(17)": SetRecipe("Arithmetic", {"start": 17, "step": 17}),
    }
    for s in (1, 2, 3):
        sets[f"Random(seed {s})"] = SetRecipe("Random", {"low": 1}, seed=s)
    means = {name: exact_expected_maxload(generate(r, n, p), cfg).mean for name, r in sets.items()}
    elapsed = time.perf_counter() - t0
    # mean <= n/2 + 5 sqrt(n)  <=>  (mean - n/2)^2 <= 25 n when positive
    ok = all(v - Fraction(n, 2) <= 0 or (v - Fraction(n, 2)) ** 2 <= 25 * n for v in means.values())
    detail = ", ".join(f"{k}: {float(v):.3f}" for k, v in means.items()) + f" (bound {n / 2 + 5 * math.sqrt(n):.2f})"
    report(9, "two-bin expected maxload", ok, elapsed, 30, detail)


def test_10_sum_excess(report):
    t0 = time.perf_counter()
    p, n = 1009, 32
    total = sum_excess(range(1, n + 1), p).total_excess
    ratio = total / p
    rhs = Fraction(16 * 5**3, n)  # 16 (log2 32)^3 / 32
    elapsed = time.perf_counter() - t0
    report(10, "sum_excess", ratio <= rhs, elapsed, 10,
           f"sum e(x) = {total} ~ {float(total):.2f}, /p = {float(ratio):.4f} <= {float(rhs):.4f}")


def test_11_nisnice(report):
    t0 = time.perf_counter()
    means = {}
    for n in (64, 256, 1024):
        cfg = FamilyConfig("RealBlocked", n * n, n)
        X = generate(SetRecipe("Interval"), n, n * n)
        means[n] = float(mc_expected_maxload(X, cfg, 10**4, seed=n).mean)
    elapsed = time.perf_counter() - t0
    growth = means[1024] / means[64]
    ok = max(means.values()) <= 8 and growth <= 1.25
    detail = ", ".join(f"n={n}: {v:.3f}" for n, v in means.items()) + f"; growth 64->1024 = {growth:.3f}"
    report(11, "nisnice", ok, elapsed, 120, detail)


def test_12_random_inputs(report):
    t0 = time.perf_counter()
    n = 1024
    m = smallest_odd_composite_at_least(n**3)
    cfg = FamilyConfig("SmartBlocked", m, n)
    per_set = 50
    means = []
    for s in range(200):
        X = generate(SetRecipe("Random", seed=10_000 + s), n, m)
        means.append(float(mc_expected_maxload(X, cfg, per_set, seed=s).mean))
    mean = sum(means) / len(means)
    bound = 3 * math.log(n) / math.log(math.log(n))
    elapsed = time.perf_counter() - t0
    report(12, "random-inputs", mean <= bound, elapsed, 120,
           f"m={m}, 200 sets x {per_set} multipliers, mean {mean:.3f} <= {bound:.3f}")


# (kind, modulus, bins, real denominator, items); every parameter space has <= 10^4 entries
MC_GRID = [
    ("BlockedInt", 97, 4, None, [1, 2, 3, 5, 8, 13, 21, 34]),
    ("BlockedInt", 1000, 8, None, list(range(0, 1000, 37))[:12]),
    ("StridedInt", 360, 6, None, [0, 7, 12, 30, 45, 60, 91, 200]),
    ("SmartBlocked", 7, 2, None, [1, 3]),
    ("SmartBlocked", 2310, 5, None, [1, 2, 4, 8, 16, 32, 64, 128, 256, 512]),
    ("TwoBinMult", 101, 2, None, list(range(1, 21))),
    ("TwoBinAffine", 53, 2, None, list(range(0, 30, 3))),
    ("RandomModulus", 120, 4, None, [1, 5, 9, 30, 44, 59, 77, 100]),
    ("RealBlocked", 16, 4, 1024, [0, 1, 2, 3, 5, 8, 13]),
]


def test_13_monte_carlo_calibration(report):
    t0 = time.perf_counter()
    ok, parts = True, []
    for i, (kind, m, beta, N, X) in enumerate(MC_GRID):
        cfg = FamilyConfig(kind, m, beta, N)
        assert param_space(cfg).size <= 10**4
        exact = exact_expected_maxload(X, cfg).mean
        mc = mc_expected_maxload(X, cfg, 10**5, seed=1000 + i)
        z = abs(float(mc.mean - exact)) / mc.stderr if mc.stderr else (0.0 if mc.mean == exact else math.inf)
        ok &= z <= 4
        parts.append(f"{kind}({m}): z={z:.2f}")
    elapsed = time.perf_counter() - t0
    report(13, "Monte Carlo calibration", ok, elapsed, 120, "; ".join(parts))


def test_14_cube_root_bound_consistency(report):
    t0 = time.perf_counter()
    ok, parts = True, []
    for n in (16, 32, 64):
        m = nearest_prime(n**3)
        cfg = FamilyConfig("SmartBlocked", m, n)
        res = local_search_worst(generate(SetRecipe("Interval"), n, m), cfg, budget=10**3, seed=n)
        bound = 10 * n ** (1 / 3) * math.log2(n)
        ok &= float(res.score) <= bound and res.score >= res.initial_score
        parts.append(f"n={n}, m={m}: {float(res.score):.3f} [{res.scoring}] <= {bound:.1f}")
    elapsed = time.perf_counter() - t0
    report(14, "cube-root bound consistency", ok, elapsed, None, "; ".join(parts))
