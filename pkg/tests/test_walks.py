from fractions import Fraction
import math

import pytest
from hypothesis import given, settings, strategies as st

from lolab.errors import BudgetExceeded
from lolab.walks import (EtaSpec, erdos_bound, exact_distribution, halasz_count, rho, rho_bruteforce,
                         stanley_reference)

F = Fraction
BERN = EtaSpec.bernoulli()


def test_exact_distribution_examples():
    assert exact_distribution([1]).support == {-1: F(1, 2), 1: F(1, 2)}
    d = exact_distribution([1, 2, 3]).support
    assert d == {-6: F(1, 8), -4: F(1, 8), -2: F(1, 8), 0: F(2, 8), 2: F(1, 8), 4: F(1, 8), 6: F(1, 8)}
    assert exact_distribution([1], EtaSpec.lazy(F(1, 2))).support == {-1: F(1, 4), 0: F(1, 2), 1: F(1, 4)}


def test_rho_examples():
    assert rho([1, 1, 1, 1])[0] == F(6, 16)
    assert rho([1, 2, 3]) == (F(1, 4), 0)
    assert rho([-1, 0, 1]) == (F(1, 2), 0)
    assert rho_bruteforce([1, 2, 3]) == F(1, 4)
    assert rho_bruteforce([1], EtaSpec.lazy(1)) == F(1, 2)
    assert rho([2, 2]) == (F(1, 2), 0)


def test_erdos_and_stanley_examples():
    assert erdos_bound(4) == F(6, 16)
    assert erdos_bound(1) == F(1, 2)
    assert erdos_bound(5) == F(10, 32)
    V0, r = stanley_reference(3)
    assert V0.values == (-1, 0, 1) and r == F(1, 2)
    V0, r = stanley_reference(5)
    assert r == rho_bruteforce(V0.values)
    with pytest.raises(ValueError):
        stanley_reference(4)


def test_halasz_examples():
    assert halasz_count([1, 2, 3], 1)[0] == 3
    assert halasz_count([1, 1, 2], 1)[0] == 5
    assert halasz_count([1, 2, 3, 4], 2)[0] == halasz_count([1, 2, 3, 4], 2, method="direct")[0]
    with pytest.raises(BudgetExceeded):
        halasz_count(list(range(1, 40)), 3, method="direct", budget=1000)


steps = st.lists(st.integers(-10, 10), min_size=1, max_size=9)
etas = st.sampled_from([BERN, EtaSpec.lazy(F(1, 4)), EtaSpec.lazy(F(3, 4))])


@settings(max_examples=60, deadline=None)
@given(steps, etas)
def test_oracle_equivalence(V, eta):
    assert rho(V, eta)[0] == rho_bruteforce(V, eta)


@settings(max_examples=60, deadline=None)
@given(steps, etas)
def test_mass_sums_to_one(V, eta):
    assert exact_distribution(V, eta).total() == 1


@settings(max_examples=60, deadline=None)
@given(steps, st.integers(-5, 5).filter(bool))
def test_dilation_invariance(V, c):
    r, at = rho(V)
    rc, atc = rho([c * v for v in V])
    assert rc == r
    assert exact_distribution([c * v for v in V])[c * at] == r


@settings(max_examples=60, deadline=None)
@given(steps, etas, st.data())
def test_sign_invariance(V, eta, data):
    i = data.draw(st.integers(0, len(V) - 1))
    W = list(V)
    W[i] = -W[i]
    assert exact_distribution(V, eta).support == exact_distribution(W, eta).support


@settings(max_examples=60, deadline=None)
@given(st.lists(st.integers(-10, 10).filter(bool), min_size=1, max_size=12))
def test_erdos_dominance(V):
    assert rho(V)[0] <= erdos_bound(len(V))


def test_erdos_sharp_small():
    for n in range(1, 12):
        assert rho([1] * n)[0] == F(math.comb(n, n // 2), 2**n)
