from dataclasses import replace
from fractions import Fraction
import math

import numpy as np
import pytest
from hypothesis import given, settings, strategies as st

from lolab.config import calibration_constant
from lolab.corpus import planted, planted_corpus
from lolab.errors import PreconditionFailed
from lolab.gap import Gap, contains, volume_and_enumerate
from lolab.inverse import gap_fit, gap_fit_detailed, invert, invert_budget, min_budget, verify_report
from lolab.walks import rho

F = Fraction


def certs(rep):
    return {c.name: c.ok for c in verify_report(rep)}


def test_gap_fit_examples():
    Q = gap_fit({0, 7, -7, 14, -14, 21, -21}, 4)
    assert Q == Gap.symmetric((7,), (3,))
    assert gap_fit({0}, 2).rank == 0
    X = volume_and_enumerate(Gap.symmetric((3, 50), (2, 1)))[1]
    fit = gap_fit_detailed(X, 3)
    assert fit.rank == 2 and fit.volume <= 2 * 15
    assert X <= volume_and_enumerate(fit.gap)[1]


def test_invert_constant_multiset():
    rep = invert([1] * 100, F(1, 4), C=1.0)
    assert rep.rank <= 1 and len(rep.covered) == 100
    # |Q| sqrt(n) rho stays bounded
    assert rep.size * math.sqrt(100) * float(rep.rho) < 50
    assert all(certs(rep).values())


def test_invert_planted_multiples_of_five():
    rng = np.random.default_rng(3)
    V = [5 * int(x) for x in rng.integers(-50, 51, size=200)]
    rep = invert(V, F(1, 10), C=2.0)
    assert len(rep.covered) >= 0.9 * 200
    K = calibration_constant("K_inverse")
    assert rep.size <= 1.2 * K * float(1 / rep.rho) * 200 ** (-rep.rank / 2)
    assert all(c for c in certs(rep).values() if c is not None)


def test_invert_distinct_is_consistent():
    rep = invert(list(range(1, 101)), F(1, 10), C=1.5)
    assert rep.size >= len(rep.covered) >= 90


def test_budget_examples():
    inst = planted(400, 1, seed=4)
    rep = invert_budget(inst.values, 40, C=inst.C_invert)
    assert len(rep.exceptional) <= 40
    K = calibration_constant("K_budget")
    assert rep.size <= 1.2 * K * float(1 / rep.rho) * 40 ** (-rep.rank / 2)
    n = 400
    lo = min_budget(n, F(1, 4))
    assert lo == 5
    invert_budget(inst.values, lo, C=inst.C_invert)
    with pytest.raises(PreconditionFailed):
        invert_budget(inst.values, lo - 1, C=inst.C_invert)


def test_budget_full_matches_invert():
    for inst in planted_corpus([0, 1, 2]):
        a = invert(inst.values, 1, C=inst.C_invert)
        b = invert_budget(inst.values, inst.n, C=inst.C_invert)
        assert a.gap == b.gap and a.exceptional == b.exceptional


def test_verify_report_negative_controls():
    inst = planted(150, 1, seed=2)
    rep = invert(inst.values, F(1, 10), C=inst.C_invert)
    assert all(c is not False for c in certs(rep).values())
    Q = rep.gap
    shrunk = replace(rep, gap=Gap.symmetric(Q.generators, [N - 1 for N in Q.upper]))
    assert certs(shrunk)["coverage"] is False
    lopsided = replace(rep, gap=Gap(Q.generators, tuple(0 for _ in Q.lower), Q.upper))
    assert certs(lopsided)["symmetric"] is False


@pytest.mark.parametrize("c", [2, -3])
def test_dilation_equivariance(c):
    inst = planted(120, 1, seed=6)
    a = invert(inst.values, F(1, 10), C=inst.C_invert)
    b = invert([c * v for v in inst.values], F(1, 10), C=inst.C_invert)
    assert b.gap.upper == a.gap.upper
    assert [abs(g) for g in b.gap.generators] == [abs(c * g) for g in a.gap.generators]


@settings(max_examples=25, deadline=None)
@given(st.lists(st.integers(-40, 40), min_size=2, max_size=12, unique=True), st.integers(2, 4))
def test_fit_monotone_in_budget(vals, k):
    X = set(vals) | {0}
    ranks = []
    for K in (1, 2, 4, 16):
        try:
            ranks.append(gap_fit_detailed(X, k, None, r_max=3, fit_constant=K, check_growth=False).rank)
        except Exception:
            ranks.append(None)
    got = [r for r in ranks if r is not None]
    assert got == sorted(got, reverse=True)


def test_forward_inverse_consistency():
    # elements from a proper GAP of volume n^(C - r/2) concentrate at rate about n^-C
    kappas = []
    for inst in planted_corpus(range(6)):
        kappas.append(float(rho(inst.values)[0]) * inst.n ** inst.C)
    assert min(kappas) > 0.05
