import csv
import io
import json
import math
import random
from fractions import Fraction

import pytest
from hypothesis import given, settings, strategies as st

import oracles
from linhash.effective_modulus import (
    IntervalSet,
    claimed_intervals,
    crowding_distribution,
    crowding_index,
    effective_modulus_of,
    f_distribution,
    residue_injectivity_check,
)
from linhash.errors import BudgetExceeded, DomainError
from linhash.numtheory import totient


def test_interval_set_union_and_intersect():
    s = IntervalSet.union_of([(Fraction(1, 2), 1), (0, Fraction(1, 4)), (Fraction(1, 8), Fraction(1, 3))])
    assert s.intervals == ((0, Fraction(1, 3)), (Fraction(1, 2), 1))
    assert s.measure == Fraction(5, 6)
    t = IntervalSet.union_of([(Fraction(1, 4), Fraction(3, 4))])
    assert s.intersect(t).measure == Fraction(1, 12) + Fraction(1, 4)
    assert Fraction(1, 3) not in s and 0 in s


def test_claimed_intervals_examples():
    i1 = claimed_intervals(1, 2, 8)
    assert i1.measure == Fraction(1, 16)
    assert Fraction(1, 32) in i1 and Fraction(1, 16) not in i1
    i2 = claimed_intervals(2, 2, 8)
    assert i2.intervals == ((Fraction(1, 2), Fraction(9, 16)),)
    for k in range(2, 17):
        # largest window c = k-1 ends at 1 - 1/k + 1/16 <= 1 only when k <= 16
        assert claimed_intervals(k, 2, 8).measure == Fraction(totient(k), 16)
    with pytest.raises(DomainError):
        claimed_intervals(17, 2, 8)
    with pytest.raises(DomainError):
        claimed_intervals(0, 2, 8)


def test_effective_modulus_examples():
    assert effective_modulus_of(Fraction(7, 20), 2, 8) == 3
    assert effective_modulus_of(Fraction(1, 2) + Fraction(1, 32), 2, 8) == 2
    n, u = 4, 25
    for k in range(1, 11):
        for c in oracles.unit_list(k):
            if c:
                assert effective_modulus_of(Fraction(c, k), n, u) == k
    with pytest.raises(DomainError):
        effective_modulus_of(Fraction(1), 2, 8)


def test_effective_modulus_matches_oracle_on_random_rationals():
    rng = random.Random(2024)
    for _ in range(10**4):
        n = rng.randint(1, 10)
        u = rng.randint(1, 1000 // n)
        den = rng.randint(2, 10**6)
        a = Fraction(rng.randint(1, den - 1), den)
        assert effective_modulus_of(a, n, u) == oracles.effective_modulus(a, n, u)


@given(st.fractions(min_value=0, max_value=1, max_denominator=10**9), st.integers(1, 50), st.integers(1, 200))
@settings(max_examples=300)
def test_effective_modulus_properties(a, n, u):
    if not 0 < a < 1:
        return
    k = effective_modulus_of(a, n, u)
    assert 1 <= k <= n * u
    assert a in claimed_intervals(k, n, u)


def test_disjoint_below_threshold():
    for n, u in [(2, 8), (4, 25), (3, 50), (8, 128)]:
        r = math.isqrt(n * u)
        sets = {k: claimed_intervals(k, n, u) for k in range(1, r + 1)}
        for k1 in sets:
            for k2 in sets:
                if k1 < k2:
                    assert sets[k1].intersect(sets[k2]).measure == 0


def test_f_distribution_examples():
    fd = f_distribution(2, 8)
    assert fd.measure(1) == Fraction(1, 16)
    assert fd.measure(4) == Fraction(2, 16)
    assert fd.total() == 1


@pytest.mark.parametrize("n,u", [(2, 8), (1, 30), (3, 11), (4, 25), (2, 50)])
def test_f_distribution_matches_breakpoint_oracle(n, u):
    fd = f_distribution(n, u)
    want = oracles.f_distribution(n, u)
    assert {k: v for k, v in fd.measure_by_k.items() if v} == {k: v for k, v in want.items() if v}


def test_f_distribution_float_path_matches_exact():
    a, b = f_distribution(10, 300), f_distribution(10, 300, exact=False)
    assert set(a.measure_by_k) == set(b.measure_by_k)
    for k, v in a.measure_by_k.items():
        assert math.isclose(float(v), b.measure(k), rel_tol=1e-9, abs_tol=1e-15)


def test_f_distribution_small_k_formula_and_total():
    for n, u in [(2, 8), (4, 25), (7, 13), (5, 200)]:
        fd = f_distribution(n, u)
        assert fd.total() == 1
        for k in range(1, math.isqrt(n * u) + 1):
            assert fd.measure(k) == Fraction(totient(k), n * u)
        for k, v in fd.measure_by_k.items():
            assert v <= Fraction(totient(k), n * u)


def test_f_distribution_budget_and_serialisation():
    with pytest.raises(BudgetExceeded):
        f_distribution(10, 10**4 + 1)
    fd = f_distribution(2, 8)
    rows = list(csv.reader(io.StringIO(fd.to_csv())))
    assert rows[0] == ["k", "measure_num", "measure_den"]
    assert sum(Fraction(int(a), int(b)) for _, a, b in rows[1:]) == 1
    d = json.loads(fd.to_json())
    assert d["n"] == 2 and d["u"] == 8
    assert fd.to_json() == f_distribution(2, 8).to_json()


def test_f_distribution_upper_bound_small():
    for nu in (100, 1000):
        k, v = f_distribution(1, nu).max_measure()
        assert v * math.sqrt(nu) <= 4


def test_crowding_examples():
    assert crowding_index(Fraction(2, 5), 4) == 2
    assert crowding_index(Fraction(1, 2), 3) == 2
    assert crowding_index(Fraction(1, 20), 10) == 1
    with pytest.raises(DomainError):
        crowding_index(Fraction(1, 2), 1)


@given(st.fractions(min_value=0, max_value=1, max_denominator=10**6), st.integers(2, 200))
def test_crowding_at_most_n(a, n):
    if 0 < a < 1:
        k = crowding_index(a, n)
        assert 1 <= k <= n
        assert k == oracles.crowding_index(a, n)


def test_crowding_distribution_matches_oracle():
    for n in range(2, 13):
        got = {k: v for k, v in crowding_distribution(n).items() if v}
        assert got == oracles.crowding_distribution(n)


def test_crowding_probability_at_most_two_over_n():
    for n in range(2, 65):
        dist = crowding_distribution(n)
        assert sum(dist.values()) == 1
        assert max(dist.values()) <= Fraction(2, n)
        assert dist[1] == Fraction(2, n)


def test_residue_check_trivial_cases():
    # every F(a) >= 1; a set {0} never collides, and elements below the smallest F are distinct residues
    assert residue_injectivity_check([0], 4, 64, trials=50, seed=1) == 1.0
    n, u = 2, 8
    # X = {0, 1}: distinct mod k unless F(a) = 1, which happens on a set of measure 1/16
    frac = residue_injectivity_check([0, 1], n, u, trials=4000, seed=2)
    assert abs(frac - 15 / 16) < 4 * math.sqrt((1 / 16) * (15 / 16) / 4000)
    with pytest.raises(DomainError):
        residue_injectivity_check([0, 9], n, u, trials=1, seed=0)


def test_residue_check_detects_forced_collision():
    # with N = 3 the only multipliers are 1/3 and 2/3, both with F = 3
    n, u = 2, 8
    assert effective_modulus_of(Fraction(1, 3), n, u) == effective_modulus_of(Fraction(2, 3), n, u) == 3
    assert residue_injectivity_check([0, 3], n, u, trials=20, seed=0, real_denominator=3) == 0.0
    assert residue_injectivity_check([0, 1, 2], n, u, trials=20, seed=0, real_denominator=3) == 1.0


def test_residue_check_regime_n6_and_n4_shortfall():
    n = 16
    rnd = random.Random(0)
    X6 = rnd.sample(range(n**6), n)
    assert residue_injectivity_check(X6, n, n**6, trials=3000, seed=3) >= 1 - 1 / n
    # at u = n^4 the rate sits measurably below 1 - 1/n (the argument needs u >= n^6)
    X4 = rnd.sample(range(n**4), n)
    rate = residue_injectivity_check(X4, n, n**4, trials=3000, seed=3)
    assert 0.8 < rate < 1 - 1 / n
