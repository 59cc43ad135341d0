from fractions import Fraction
import math

import numpy as np
import pytest
from hypothesis import given, settings, strategies as st
from sympy import isprime, nextprime

from lolab import char_bounds as cb
from lolab.gap import Gap, volume_and_enumerate
from lolab.walks import EtaSpec, rho, rho_mod

F = Fraction
primes = st.integers(3, 400).map(lambda x: int(nextprime(x)))


def test_condition_examples():
    lazy = EtaSpec.lazy(F(1, 2))
    c = cb.max_condition_constant(lazy, 101, [1] * 5)
    assert c > 0
    assert cb.condition_check(lazy, 101, [1] * 5, c * 0.99).ok
    bern = EtaSpec.bernoulli()
    for p in (5, 101, 997):
        assert cb.condition_check(bern, p, [1], 2, halved=True).ok
    zero = EtaSpec(((0, F(1)),), "zero")
    assert not cb.condition_check(zero, 101, [1], 1e-6).ok


def test_char_bound_examples():
    prod, _ = cb.char_bound([1], 5)
    want = (1 + 2 * math.cos(math.pi / 5) + 2 * math.cos(2 * math.pi / 5)) / 5
    assert prod == pytest.approx(want, abs=1e-12)
    assert prod >= 0.5
    assert cb.char_bound([0, 0, 0], 7) == pytest.approx((1.0, 1.0))
    prod, expo = cb.char_bound([1, 2, 3], 59)
    assert prod >= 0.25 and expo >= prod


def test_heavy_level_examples():
    n, p = 10, 211
    rep = cb.heavy_level([1] * n, p, rho([1] * n)[0])
    assert rep.heavy_lhs >= rep.heavy_rhs
    # S_m of a constant multiset is the window n ||xi/p||^2 <= m
    window = sum(1 for xi in range(p) if n * min(xi, p - xi) ** 2 <= rep.m * p * p)
    assert rep.level_size == window
    z = cb.heavy_level([0, 0, 0], 11, 1)
    assert z.m == 1 and z.level_size == 11
    r = cb.heavy_level([1, 2, 3], 59, F(1, 4))
    assert r.level_size * math.exp(2 - r.m) >= 59 / 4


def test_core_select_examples():
    rep = cb.core_select(cb.heavy_level([1] * 12, 101, rho([1] * 12)[0]), epsilon=F(1, 2))
    assert len(rep.core) == 12
    V = [1] * 100 + [500]
    rep = cb.core_select(cb.heavy_level(V, 1009, rho(V)[0]), epsilon=F(1, 2))
    assert rep.exceptional == (500,)
    rep = cb.core_select(cb.heavy_level(V, 1009, rho(V)[0]), epsilon=1)
    assert len(rep.exceptional) <= len(V)


def test_dual_examples():
    rep = cb.dual_set(cb.core_select(cb.heavy_level([0, 0], 13, 1), epsilon=F(1, 2)))
    assert rep.dual_size == 1 and rep.dual_ok
    V = [1] * 20
    rep = cb.dual_set(cb.core_select(cb.heavy_level(V, 101, rho(V)[0]), epsilon=F(1, 4)))
    assert rep.dual_size * rep.level_size <= 8 * 101


def _growth(vals, k):
    p = 10007
    rep = cb.core_select(cb.heavy_level([v % p for v in vals], p, rho(vals)[0]), epsilon=1)
    return cb.growth_set(rep, k, integer_values=[v for v in vals if v % p in rep.core])


def test_growth_examples():
    assert _growth([1, 1], 3).growth_set == frozenset({0, 1, 2, 3})
    assert _growth([3, 10], 2).growth_set == frozenset({0, 3, 6, 10, 13, 20})
    vals = sorted(volume_and_enumerate(Gap.symmetric((7,), (5,)))[1])
    for k in (2, 3):
        assert _growth(vals, k).growth_size <= 2 * 5 * k + 1


@settings(max_examples=40, deadline=None)
@given(st.lists(st.integers(1, 50), min_size=1, max_size=10), primes)
def test_bound_dominance(V, p):
    V_p = [v % p for v in V]
    prod, expo = cb.char_bound(V_p, p)
    assert float(rho_mod(V_p, p)) <= prod * (1 + 1e-9)
    assert prod <= expo * (1 + 1e-9)


@settings(max_examples=30, deadline=None)
@given(primes)
def test_pointwise_chain(p):
    x = np.arange(p)
    d = np.minimum(x, p - x) / p
    c = np.abs(np.cos(np.pi * x / p))
    assert np.all(c <= 1 - 2 * d * d + 1e-12)
    assert np.all(1 - 2 * d * d <= np.exp(-2 * d * d) + 1e-12)


@settings(max_examples=40, deadline=None)
@given(st.lists(st.integers(0, 400), min_size=1, max_size=12), primes)
def test_level_sets_nested_symmetric(V, p):
    D = cb.level_sums([v % p for v in V], p)
    n = len(V)
    assert D[0] == 0
    assert np.array_equal(D[1:], D[1:][::-1])
    for m in range(1, 5):
        inner = D <= m * p * p
        assert np.all(inner <= (D <= (m + 1) * p * p))


@settings(max_examples=30, deadline=None)
@given(st.lists(st.integers(1, 60), min_size=2, max_size=10), primes)
def test_double_counting(V, p):
    V_p = [v % p for v in V]
    rep = cb.core_select(cb.heavy_level(V_p, p, rho_mod(V_p, p)), epsilon=F(1, 2))
    D = cb.level_sums(V_p, p)
    assert rep.double_count_total == int(D[rep.S_m].sum())
    assert rep.double_count_total <= rep.m * rep.level_size * p * p
    assert len(rep.exceptional) <= F(1, 2) * len(V)


@settings(max_examples=20, deadline=None)
@given(st.lists(st.integers(1, 30), min_size=3, max_size=10), primes)
def test_triangle_inequality(V, p):
    V_p = [v % p for v in V]
    rep = cb.core_select(cb.heavy_level(V_p, p, rho_mod(V_p, p)), epsilon=F(1, 2))
    rep = cb.growth_set(rep, 2)
    assert rep.triangle_ok
