from fractions import Fraction
import itertools

import pytest
from hypothesis import assume, given, settings, strategies as st

from lolab.errors import CapExceeded, PreconditionFailed
from lolab.gap import (Gap, contains, divide_containment, freiman_embed, is_proper, iterated_sumset,
                       sarkozy_cover, sarkozy_shrink, transform, volume_and_enumerate)
from lolab.walks import rho, rho_mod

Q315 = Gap.symmetric((3, 10), (2, 1))


def elems(Q):
    return volume_and_enumerate(Q)[1]


def test_enumeration_examples():
    vol, E = volume_and_enumerate(Q315)
    assert vol == 15
    assert E == {-16, -13, -10, -7, -6, -4, -3, 0, 3, 4, 6, 7, 10, 13, 16}
    assert volume_and_enumerate(Gap.symmetric((0,), (5,))) == (11, {0})
    assert volume_and_enumerate(Gap.point(7)) == (1, {7})
    with pytest.raises(CapExceeded):
        volume_and_enumerate(Gap.symmetric((1, 1000), (1000, 1000)), cap=1000)


def test_proper_examples():
    assert is_proper(Q315, 1)
    assert not is_proper(Gap.symmetric((1, 2), (2, 1)), 1)
    for N in (1, 5, 40):
        for t in (1, 2, 3):
            assert is_proper(Gap.symmetric((1,), (N,)), t)


def test_transform_examples():
    Q = Gap.symmetric((5,), (3,))
    assert transform(Q, 2) == Gap.symmetric((5,), (6,))
    assert sarkozy_shrink(Gap.symmetric((1,), (9,)), 2) == Gap.symmetric((2,), (2,))
    assert elems(transform(Q315, 1, -1)) == elems(Q315)


def test_contains_examples():
    assert contains(Q315, 13, witness=True) == (1, 1)
    assert not contains(Q315, 5)
    assert contains(Q315, 0, witness=True) == (0, 0)


def test_freiman_examples():
    assert freiman_embed([1, 2]).p == 17
    assert freiman_embed([0]).p == 2
    cert = freiman_embed([1, 2, 3], verify=True)
    assert cert.p == 59 and cert.rho_verified
    assert rho_mod(cert.values, 59) == Fraction(1, 4)


def test_divide_examples():
    Q = divide_containment({0, 1, 2, 3}, 2, Gap.symmetric((1,), (10,)))
    assert Q == Gap.symmetric((1,), (10,))
    Q = divide_containment({0, 5}, 4, Gap.symmetric((5,), (4,)))
    assert Q == Gap.symmetric((5,), (2,))
    with pytest.raises(PreconditionFailed):
        divide_containment({1, 2}, 2, Gap.symmetric((1,), (10,)))


def test_sarkozy_examples():
    Q = Gap.symmetric((1,), (10,))
    assert sarkozy_cover(elems(Q), Q, 1) == (1, 1)
    A = {-9, -6, -3, 0, 3, 6, 9}
    m, l = sarkozy_cover(A, Gap.symmetric((1,), (9,)), Fraction(1, 3))
    assert l in (1, 2, 3)
    assert elems(sarkozy_shrink(Gap.symmetric((1,), (9,)), l)) <= iterated_sumset(A, 2 * m)
    with pytest.raises(PreconditionFailed):
        sarkozy_cover({0, 1}, Q, Fraction(1, 100))


@st.composite
def small_gaps(draw):
    r = draw(st.integers(0, 3))
    gens = tuple(draw(st.integers(-30, 30)) for _ in range(r))
    lower = tuple(draw(st.integers(-6, 0)) for _ in range(r))
    upper = tuple(draw(st.integers(0, 6)) for _ in range(r))
    return Gap(gens, lower, upper, draw(st.integers(-5, 5)))


@settings(max_examples=80, deadline=None)
@given(small_gaps())
def test_size_at_most_volume_and_properness(Q):
    vol, E = volume_and_enumerate(Q)
    assert len(E) <= vol
    assert (len(E) == vol) == is_proper(Q, 1)


@settings(max_examples=60, deadline=None)
@given(small_gaps(), st.integers(1, 3), st.integers(1, 3))
def test_dilation_composes(Q, l1, l2):
    assert elems(transform(transform(Q, l1), l2)) == elems(transform(Q, l1 * l2))


@settings(max_examples=60, deadline=None)
@given(small_gaps())
def test_contains_matches_enumeration(Q):
    E = elems(Q)
    lo, hi = min(E) - 3, max(E) + 3
    for x in range(lo, hi + 1):
        assert contains(Q, x) == (x in E)


@settings(max_examples=40, deadline=None)
@given(st.lists(st.integers(-10, 10), min_size=1, max_size=10))
def test_freiman_preserves_rho(V):
    cert = freiman_embed(V, compact=True, k=len(V))
    assert rho(V)[0] == rho_mod(cert.values, cert.p)


def random_divide_instance(rng):
    """2-proper symmetric P of rank <= 2 and symmetric X with kX inside P."""
    k = int(rng.integers(2, 5))
    if rng.random() < 0.5:
        a = (int(rng.integers(1, 8)),)
        N = (int(rng.integers(k, 6 * k)),)
    else:
        a1 = int(rng.integers(1, 6))
        N1 = int(rng.integers(k, 4 * k))
        a2 = int(rng.integers(4 * a1 * N1 + 1, 8 * a1 * N1 + 2))
        a, N = (a1, a2), (N1, int(rng.integers(k, 4 * k)))
    P = Gap.symmetric(a, N)
    box = [range(-(n // k), n // k + 1) for n in N]
    pts = [sum(c * g for c, g in zip(x, a)) for x in itertools.product(*box)]
    picks = rng.choice(len(pts), size=min(len(pts), int(rng.integers(1, 6))), replace=False)
    X = {0} | {pts[i] for i in picks} | {-pts[i] for i in picks}
    return X, k, P


def test_divide_randomized_small():
    import numpy as np

    rng = np.random.default_rng(5)
    for _ in range(40):
        X, k, P = random_divide_instance(rng)
        Q = divide_containment(X, k, P)
        assert X <= elems(Q)
