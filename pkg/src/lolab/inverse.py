"""Constructive inverse theorems: long-range GAP fitting and the full pipelines.

``gap_fit`` replaces the non-constructive long-range step by a bounded-rank
search.  Over Z the input is normalised by its gcd; rank 1 is the gcd/span
GAP, rank 2 and 3 scan generator tuples drawn from small positive differences
and, for each tuple, compute the exactly minimal coefficient box.  A rank is
accepted once its best volume is at most ``fit_constant * k^-r * |k(X u -X)|``
and the smallest accepted rank wins.  Over Z^d the rank is the dimension and
the box is read off a lattice basis built from short difference vectors.
"""
from __future__ import annotations

import itertools
import math
from dataclasses import dataclass, field, replace
from fractions import Fraction
from functools import reduce

import numpy as np
from sympy import integer_nthroot

from . import char_bounds as cb
from .config import DEFAULT, Constants
from .errors import (BudgetExceeded, CapExceeded, FitFailed, GrowthHypothesisFailed,
                     LolabError, PreconditionFailed)
from .gap import Gap, contains, embedding_prime, is_proper, iterated_sumset, lift, volume_and_enumerate
from .walks import as_multiset, rho as exact_rho

POOL_FIRST = 12
POOL_SECOND = 24
POOL_RANK3 = 6
_INFEASIBLE = 2**40


@dataclass
class FitResult:
    gap: Gap
    rank: int
    volume: int
    kX_size: int
    budget: Fraction | None
    within_budget: bool
    two_proper: bool | None
    best_by_rank: dict = field(default_factory=dict)
    candidates: int = 0
    growth_ratio: float | None = None

    def to_json(self):
        return {
            "gap": self.gap.to_json(), "rank": self.rank, "volume": self.volume,
            "kX_size": self.kX_size, "budget": None if self.budget is None else float(self.budget),
            "within_budget": self.within_budget, "two_proper": self.two_proper,
            "best_by_rank": {str(r): v for r, v in self.best_by_rank.items()},
            "candidates": self.candidates, "growth_ratio": self.growth_ratio,
        }


# --------------------------------------------------------------------------
# rank-2 / rank-3 box minimisation over Z


def _min_abs_x1(x, a1, a2, N2):
    """Per element of ``x`` (2-d array), min |x1| over x1 a1 + x2 a2 = x, |x2| <= N2.

    ``N2`` broadcasts against the trailing axis added here.  Infeasible
    entries come back as a large sentinel.
    """
    big = np.int64(_INFEASIBLE)
    if a1 == 1:
        r = np.zeros_like(x)
    else:
        r = (x * pow(a2, -1, a1)) % a1
    r = np.where(r > a1 // 2, r - a1, r)
    N2 = np.asarray(N2, dtype=np.int64)
    xe, re = x[..., None], r[..., None]
    tlo = -((N2 + re) // a1)          # ceil((-N2 - r)/a1)
    thi = (N2 - re) // a1
    tf = (xe - a2 * re) // (a2 * a1)
    best = np.full(np.broadcast_shapes(xe.shape, N2.shape), big, dtype=np.int64)
    for t in (tf, tf + 1):
        tc = np.clip(t, tlo, thi)
        x1 = np.abs(xe - a2 * (re + a1 * tc)) // a1
        best = np.minimum(best, x1)
    return np.where(tlo <= thi, best, big)


def _scan_rank2(x, a1, a2, cap_vol):
    """Best proper box for generators (a1, a2); returns (vol, N1, N2) or None."""
    n2_hi = int(np.abs(x).max()) // a2 + a1 + 1
    n2_hi = min(n2_hi, (int(cap_vol) - 1) // 2) if cap_vol is not None else n2_hi
    if n2_hi < 0:
        return None
    N2 = np.arange(n2_hi + 1, dtype=np.int64)
    N1 = _min_abs_x1(x[:, None], a1, a2, N2[None, :])[:, 0, :].max(axis=0)
    vol = (2 * N1 + 1) * (2 * N2 + 1)
    proper = (a2 > 2 * N1) | (a1 > 2 * N2)
    ok = proper & (N1 < _INFEASIBLE)
    if cap_vol is not None:
        ok &= vol <= cap_vol
    if not ok.any():
        return None
    idx = np.flatnonzero(ok)
    j = idx[np.argmin(vol[idx])]
    return int(vol[j]), int(N1[j]), int(N2[j])


def _scan_rank3(x, a1, a2, a3, cap_vol):
    best = None
    n3_hi = min(int(np.abs(x).max()) // a3 + 1, (int(cap_vol) - 1) // 2)
    for N3 in range(n3_hi + 1):
        x3 = np.arange(-N3, N3 + 1, dtype=np.int64)
        shifted = x[:, None] - a3 * x3[None, :]
        n2_hi = min(int(np.abs(shifted).max()) // a2 + a1 + 1, (int(cap_vol) // (2 * N3 + 1) - 1) // 2)
        if n2_hi < 0:
            break
        N2 = np.arange(n2_hi + 1, dtype=np.int64)
        need = _min_abs_x1(shifted, a1, a2, N2[None, None, :]).min(axis=1).max(axis=0)
        vol = (2 * need + 1) * (2 * N2 + 1) * (2 * N3 + 1)
        for j in np.argsort(vol, kind="stable"):
            v = int(vol[j])
            if need[j] >= _INFEASIBLE or v > cap_vol or (best and v >= best[0]):
                break
            Q = Gap.symmetric((a1, a2, a3), (int(need[j]), int(N2[j]), N3))
            try:
                if is_proper(Q):
                    best = (v, int(need[j]), int(N2[j]), N3)
                    break
            except CapExceeded:
                continue
    return best


def _positive_differences(X):
    arr = np.array(sorted(X), dtype=np.int64)
    diffs = (arr[None, :] - arr[:, None]).ravel()
    return np.unique(diffs[diffs > 0])


# --------------------------------------------------------------------------
# fitting over Z


def _fit_rank1(Xn):
    M = max(abs(v) for v in Xn)
    return Gap.symmetric((1,), (M,)) if M else Gap.symmetric((), ())


def _fit_rank2(Xn, cap_vol, diffs):
    x = np.array(sorted(Xn), dtype=np.int64)
    best, tried = None, 0
    for a1 in diffs[:POOL_FIRST].tolist():
        seconds = [d for d in diffs.tolist() if d > a1 and d % a1 and math.gcd(a1, d) == 1][:POOL_SECOND]
        for a2 in seconds:
            tried += 1
            cap = cap_vol
            if best is not None:
                cap = best[0] - 1 if cap is None else min(cap, best[0] - 1)
            res = _scan_rank2(x, a1, a2, cap)
            if res and (best is None or res[0] < best[0]):
                best = (res[0], (a1, a2), (res[1], res[2]))
    return best, tried


def _fit_rank3(Xn, cap_vol, diffs):
    x = np.array(sorted(Xn), dtype=np.int64)
    best, tried = None, 0
    small = diffs[:POOL_RANK3 * 3].tolist()
    for a1, a2, a3 in itertools.combinations(small, 3):
        if a2 % a1 == 0 or a3 % a1 == 0 or math.gcd(a1, a2, a3) != 1:
            continue
        tried += 1
        if tried > 200:
            break
        cap = cap_vol if best is None else min(cap_vol, best[0] - 1)
        res = _scan_rank3(x, a1, a2, a3, cap)
        if res and (best is None or res[0] < best[0]):
            best = (res[0], (a1, a2, a3), res[1:])
    return best, tried


def _budget(X, k, r, fit_constant, kX_sym_size):
    return Fraction(fit_constant).limit_denominator(10**6) * Fraction(kX_sym_size, k**r)


def gap_fit_detailed(X, k: int, gamma: float | None = None, r_max: int = 2,
                     fit_constant: float | None = DEFAULT.fit_constant, check_growth: bool = True,
                     min_rank: int = 0, sumset_cap: int = DEFAULT.sumset_cap) -> FitResult:
    """Proper symmetric GAP containing X with the smallest admissible rank."""
    X = set(X)
    if not X:
        raise ValueError("X must be non-empty")
    vec = isinstance(next(iter(X)), tuple)
    zero = tuple(0 for _ in next(iter(X))) if vec else 0
    if zero not in X:
        raise PreconditionFailed("0 must lie in X", stage="gap_fit")
    if r_max > 4:
        raise ValueError("r_max <= 4")
    if k < 1:
        raise ValueError("k >= 1")
    kX = None
    growth = None
    if check_growth or fit_constant is not None:
        if vec:
            kX = iterated_sumset(X, k)
            neg = {tuple(-c for c in v) for v in X}
        else:
            lo, hi = min(X), max(X)
            if k * (hi - lo + 1) > 50 * sumset_cap:
                raise BudgetExceeded("kX too wide to enumerate", projected=k * (hi - lo + 1), stage="gap_fit")
            kX = iterated_sumset(X, k)
            neg = {-v for v in X}
        growth = len(kX) / len(X)
        if check_growth and gamma is not None and len(kX) > k**gamma * len(X) * (1 + 1e-12):
            raise GrowthHypothesisFailed(f"|kX| = {len(kX)} > k^gamma |X| = {k**gamma * len(X):.4g}", stage="gap_fit")
        sym = X | neg
        kX_sym = len(kX) if sym == X else len(iterated_sumset(sym, k))
    if vec:
        return _fit_lattice(X, k, kX, min_rank, growth)

    if X == {0}:
        Q = Gap.symmetric((), ())
        return FitResult(Q, 0, 1, 1, None, True, True, {0: 1}, 0, growth)
    g = reduce(math.gcd, (abs(v) for v in X))
    Xn = {v // g for v in X}
    budget = (lambda r: _budget(X, k, r, fit_constant, kX_sym)) if fit_constant is not None else (lambda r: None)
    best_by_rank, tried = {}, 0
    diffs = _positive_differences(Xn) if r_max >= 2 else None

    chosen = None
    for r in range(max(1, min_rank), r_max + 1):
        cap = budget(r)
        cap_int = None if cap is None else math.floor(cap)
        if r == 1:
            Q = _fit_rank1(Xn)
            vol = Q.volume
        elif r == 2:
            res, t = _fit_rank2(Xn, cap_int, diffs)
            tried += t
            if res is None:
                continue
            vol, gens, bounds = res
            Q = Gap.symmetric(gens, bounds)
        elif r == 3:
            res, t = _fit_rank3(Xn, cap_int if cap_int is not None else 10**6, diffs)
            tried += t
            if res is None:
                continue
            vol, gens, bounds = res
            Q = Gap.symmetric(gens, bounds)
        else:
            continue
        best_by_rank[r] = vol
        if cap is None or vol <= cap:
            chosen = (r, Q, vol, cap)
            break
    if chosen is None:
        raise FitFailed(f"no proper symmetric GAP of rank <= {r_max} within budget "
                        f"(best by rank: {best_by_rank})", stage="gap_fit")
    r, Qn, vol, cap = chosen
    Q = Gap.symmetric(tuple(g * a for a in Qn.generators), Qn.upper)
    two = _two_proper(Qn)
    return FitResult(Q, r, vol, len(kX) if kX is not None else None, cap, True, two, best_by_rank, tried, growth)


def _two_proper(Q: Gap):
    if Q.rank <= 1:
        return Q.rank == 0 or Q.generators[0] != 0
    if Q.rank == 2:
        a1, a2 = Q.generators
        N1, N2 = Q.upper
        gg = math.gcd(a1, a2)
        return abs(a2 // gg) > 4 * N1 or abs(a1 // gg) > 4 * N2
    try:
        return is_proper(Q, 2)
    except CapExceeded:
        return None


def gap_fit(X, k: int, gamma: float | None = None, r_max: int = 2, **kw) -> Gap:
    return gap_fit_detailed(X, k, gamma, r_max, **kw).gap


# --------------------------------------------------------------------------
# fitting over Z^d


def _solve_int(B, pts):
    """Integer coordinates of ``pts`` in basis columns of B, or None."""
    Binv = np.linalg.inv(B.astype(float))
    coords = pts @ Binv.T
    rounded = np.rint(coords).astype(np.int64)
    if np.any(np.abs(coords - rounded) > 1e-6) or np.any(rounded @ B.T != pts):
        return None
    return rounded


def _fit_lattice(X, k, kX, min_rank, growth):
    pts = np.array(sorted(X), dtype=np.int64)
    d = pts.shape[1]
    diffs = (pts[None, :, :] - pts[:, None, :]).reshape(-1, d)
    diffs = np.unique(diffs, axis=0)
    # one representative per +- pair, shortest first
    keep = [v for v in diffs if any(v) and tuple(v) > tuple(-v)]
    keep.sort(key=lambda v: (int((v * v).sum()), tuple(v)))
    pool = [np.array(v) for v in keep[:12]]
    bases = [np.eye(d, dtype=np.int64)]
    for combo in itertools.combinations(pool, d):
        B = np.array(combo, dtype=np.int64).T
        if round(abs(np.linalg.det(B))) != 0:
            bases.append(B)
    best = None
    for B in bases:
        C = _solve_int(B, pts)
        if C is None:
            continue
        N = np.abs(C).max(axis=0)
        vol = int(np.prod(2 * N + 1))
        if best is None or vol < best[0]:
            best = (vol, B, N)
    if best is None:
        raise FitFailed("no lattice basis represents X", stage="gap_fit")
    vol, B, N = best
    gens = tuple(tuple(int(c) for c in B[:, i]) for i in range(d))
    Q = Gap.symmetric(gens, [int(b) for b in N])
    if min_rank and min_rank > d:
        raise FitFailed("rank above the ambient dimension requested", stage="gap_fit")
    return FitResult(Q, d, vol, len(kX) if kX else None, None, True, True, {d: vol}, len(bases), growth)


# --------------------------------------------------------------------------
# pipelines


@dataclass
class StructureReport:
    values: tuple
    n: int
    rho: Fraction
    rho_source: str
    epsilon: Fraction | None
    n_prime: int | None
    C: float
    gap: Gap | None
    rank: int | None
    covered: tuple
    exceptional: tuple
    size: int | None
    target: float | None
    ratio: float | None
    trace: cb.LevelSetReport | None = None
    fit: FitResult | None = None
    scale: int = 1
    prime_mode: str = "compact"
    notes: list = field(default_factory=list)

    @property
    def exceptional_budget(self):
        return self.n_prime if self.n_prime is not None else self.epsilon * self.n

    def to_json(self, constants: Constants = DEFAULT):
        from . import __version__

        def big(v):
            return str(v) if abs(v) > 2**53 else v

        return {
            "version": __version__,
            "n": self.n,
            "rho": str(self.rho),
            "rho_source": self.rho_source,
            "epsilon": None if self.epsilon is None else str(self.epsilon),
            "n_prime": self.n_prime,
            "C": self.C,
            "gap": None if self.gap is None else self.gap.to_json(),
            "rank": self.rank,
            "size": self.size,
            "target": self.target,
            "ratio": self.ratio,
            "covered_count": len(self.covered),
            "exceptional": [big(v) for v in self.exceptional],
            "scale": self.scale,
            "prime_mode": self.prime_mode,
            "trace": None if self.trace is None else self.trace.to_json(constants),
            "fit": None if self.fit is None else self.fit.to_json(),
            "notes": list(self.notes),
            "constants": constants.to_json(),
        }


def min_budget(n: int, eps) -> int:
    """``ceil(n^eps)`` for rational eps, in exact integer arithmetic."""
    eps = Fraction(eps)
    root, exact = integer_nthroot(n**eps.numerator, eps.denominator)
    return int(root) if exact else int(root) + 1


def _pipeline(V, C, epsilon=None, n_prime=None, rho=None, constants: Constants = DEFAULT,
              prime_mode="compact", r_max=2, dual=True) -> StructureReport:
    V = as_multiset(V)
    n = V.n
    if rho is None:
        rho_val, source = exact_rho(V)[0], "exact"
    else:
        rho_val, source = Fraction(rho), "supplied"
    if float(rho_val) < n ** (-float(C)) * (1 - 1e-12):
        raise PreconditionFailed(f"rho = {float(rho_val):.3g} < n^-C = {n ** (-float(C)):.3g}", stage="precondition")
    notes = []
    g = reduce(math.gcd, (abs(v) for v in V.values))
    if g == 0:
        Q = Gap.symmetric((), ())
        return StructureReport(V.values, n, rho_val, source, None if n_prime else Fraction(epsilon), n_prime, C, Q, 0,
                               V.values, (), 1, float(1 / rho_val), float(rho_val), scale=0, notes=["all steps are zero"])
    Vn = [v // g for v in V.values]
    budget_n = n_prime if n_prime is not None else n
    k_hint = max(2, math.floor(constants.c1 * math.sqrt(budget_n)))
    if prime_mode == "full":
        p = embedding_prime(Vn)
        if p > constants.char_cap:
            raise BudgetExceeded(f"full-size prime {p} beyond the character-sum cap", projected=p, stage="embedding")
    else:
        p = embedding_prime(Vn, compact=True, k=k_hint)
    V_p = [v % p for v in Vn]

    rep = cb.heavy_level(V_p, p, rho_val, constants)
    rep = cb.core_select(rep, epsilon=epsilon, n_prime=n_prime)
    if dual:
        try:
            rep = cb.dual_set(rep, cap=constants.dual_scan_cap, dual_constant=constants.dual_constant)
        except BudgetExceeded as exc:
            rep = replace(rep, dual_note=f"skipped: {exc}")
    k = max(2, math.floor(constants.c1 * math.sqrt(budget_n / rep.m)))
    if constants.c1 * math.sqrt(budget_n / rep.m) < 2:
        notes.append(f"c1 sqrt(n/m) = {constants.c1 * math.sqrt(budget_n / rep.m):.3f} < 2; k raised to 2")
    core_int = [lift(v, p) for v in rep.core]
    rep = cb.growth_set(rep, k, cap=constants.sumset_cap, c1=constants.c1, integer_values=core_int,
                        dual_constant=constants.dual_constant)
    if not rep.inclusion_ok:
        notes.append(f"dual-set inclusion failed for {rep.inclusion_failures}/{rep.inclusion_checked} sampled sums")

    X = set(core_int) | {0}
    gamma = 2 * float(C) + 2
    try:
        fit = gap_fit_detailed(X, k, gamma, r_max, fit_constant=constants.fit_constant)
    except LolabError as exc:
        exc.stage = exc.stage or "gap_fit"
        raise
    Qn = fit.gap
    Q = Gap.symmetric(tuple(g * a for a in Qn.generators), Qn.upper)
    covered, exc_vals = [], []
    level = rep.level_sums_by_value
    for v in V.values:
        (covered if contains(Q, v) else exc_vals).append(v)
    exc_vals.sort(key=lambda v: (-level[(v // g) % p], v))
    r = fit.rank
    nn = budget_n
    target = float(1 / rho_val) * nn ** (-r / 2)
    size = Q.volume  # Q is proper, so |Q| = Vol(Q)
    return StructureReport(V.values, n, rho_val, source, None if n_prime is not None else Fraction(epsilon), n_prime,
                           C, Q, r, tuple(covered), tuple(exc_vals), size, target, size / target, rep, fit, g,
                           prime_mode, notes)


def invert(V, epsilon=DEFAULT.epsilon, C: float = 2.0, rho=None, constants: Constants = DEFAULT,
           **kw) -> StructureReport:
    """Discrete inverse pipeline: all but about eps n steps lie in a small proper GAP."""
    epsilon = Fraction(epsilon).limit_denominator(10**6) if not isinstance(epsilon, Fraction) else epsilon
    if not 0 < epsilon <= 1:
        raise PreconditionFailed("need 0 < epsilon <= 1", stage="precondition")
    return _pipeline(V, C, epsilon=epsilon, rho=rho, constants=constants, **kw)


def invert_budget(V, n_prime: int, C: float = 2.0, eps=Fraction(1, 4), rho=None,
                  constants: Constants = DEFAULT, **kw) -> StructureReport:
    """Budget variant: at most ``n_prime`` exceptional steps, target ``rho^-1 n'^-r/2``."""
    n = as_multiset(V).n
    lo = min_budget(n, eps)
    if not lo <= n_prime <= n:
        raise PreconditionFailed(f"need ceil(n^eps) = {lo} <= n' <= n = {n}, got {n_prime}", stage="precondition")
    return _pipeline(V, C, n_prime=int(n_prime), rho=rho, constants=constants, **kw)


# --------------------------------------------------------------------------
# independent re-verification


@dataclass(frozen=True)
class Certificate:
    name: str
    ok: bool | None
    detail: str = ""


def verify_report(report: StructureReport, cap: int = DEFAULT.enum_cap) -> list:
    out = []
    Q = report.gap
    out.append(Certificate("symmetric", Q.is_symmetric))
    try:
        out.append(Certificate("proper", is_proper(Q, 1, cap)))
        vol, elems = volume_and_enumerate(Q, cap)
        out.append(Certificate("size", len(elems) == report.size, f"|Q| = {len(elems)}, reported {report.size}"))
    except CapExceeded as exc:
        out.append(Certificate("proper", None, str(exc)))
        out.append(Certificate("size", None, str(exc)))
    miss = [v for v in report.covered if not contains(Q, v)]
    out.append(Certificate("coverage", not miss and len(report.covered) + len(report.exceptional) == report.n,
                           f"{len(miss)} covered elements outside Q"))
    budget = report.exceptional_budget
    out.append(Certificate("exceptional", len(report.exceptional) <= budget,
                           f"{len(report.exceptional)} exceptional vs budget {float(budget):.3g}"))
    t = report.trace
    if t is not None:
        out.append(Certificate("heavy_level", t.heavy_lhs >= t.heavy_rhs * (1 - DEFAULT.slack)))
        out.append(Certificate("dual1", t.dual_ok if t.dual_scanned else None, t.dual_note or ""))
        out.append(Certificate("dual2", t.growth_ratio is not None and math.isfinite(t.growth_ratio),
                               f"|kV''| / (rho^-1 e^(2-m)) = {t.growth_ratio}"))
        out.append(Certificate("triangle", t.triangle_ok))
    return out
