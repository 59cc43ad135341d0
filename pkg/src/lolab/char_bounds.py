"""Character-sum bounds, level sets, core selection and dual sets over F_p.

Distances to the nearest integer are kept as exact integers: for a residue
``r`` we store ``d = min(r, p - r)`` so that ``||r/p||^2 = d^2 / p^2``.  Every
level-set or threshold comparison is done on these integers; floating point is
only used for the exponential and cosine sums that feed the certificates.
"""
from __future__ import annotations

import math
from collections import Counter
from dataclasses import dataclass, field, replace
from fractions import Fraction
from typing import Sequence

import numpy as np

from .config import DEFAULT, Constants
from .errors import BudgetExceeded, NoHeavyLevel, PreconditionFailed
from .walks import EtaSpec, as_multiset

_CHUNK = 1 << 22  # entries per (distinct values x residues) block


def _grouped(V_p, p):
    cnt = Counter(int(v) % p for v in V_p)
    vals = np.array(sorted(cnt), dtype=np.int64)
    mult = np.array([cnt[v] for v in sorted(cnt)], dtype=np.int64)
    return vals, mult


def _dist(x, p):
    r = x % p
    return np.minimum(r, p - r)


def level_sums(V_p, p: int, xi=None) -> np.ndarray:
    """``D(xi) = sum_i d(v_i xi)^2`` as int64, so ``sum_i ||v_i xi/p||^2 = D / p^2``."""
    vals, mult = _grouped(V_p, p)
    xi = np.arange(p, dtype=np.int64) if xi is None else np.asarray(xi, dtype=np.int64)
    if p > 3 * 10**9 or len(V_p) * (p // 2) ** 2 >= 2**63:
        raise BudgetExceeded(f"p = {p} too large for exact int64 level sums", projected=p)
    out = np.zeros(len(xi), dtype=np.int64)
    step = max(1, _CHUNK // max(1, len(vals)))
    for s in range(0, len(xi), step):
        blk = xi[s:s + step]
        d = _dist(vals[:, None] * blk[None, :], p)
        out[s:s + step] = (mult[:, None] * d * d).sum(axis=0)
    return out


def element_sum(a: int, S: np.ndarray, p: int) -> int:
    """Exact ``sum_{xi in S} d(a xi)^2`` (the integer behind ``sum ||a xi/p||^2``)."""
    total = 0
    step = 1 << 18
    for s in range(0, len(S), step):
        d = _dist((a % p) * S[s:s + step], p)
        total += int((d * d).sum())
    return total


def element_sums(values, S: np.ndarray, p: int) -> dict:
    vals = np.array(sorted({int(v) % p for v in values}), dtype=np.int64)
    out = dict.fromkeys(vals.tolist(), 0)
    if len(vals) == 0:
        return out
    step = max(1, _CHUNK // max(1, len(vals)))
    acc = [0] * len(vals)
    sub = max(1, (2**62) // max(1, (p // 2) ** 2) // 2)
    step = min(step, sub)
    for s in range(0, len(S), step):
        d = _dist(vals[:, None] * S[None, s:s + step], p)
        part = (d * d).sum(axis=1)
        for i, x in enumerate(part.tolist()):
            acc[i] += x
    return dict(zip(vals.tolist(), acc))


# --------------------------------------------------------------------------
# the condition on eta


@dataclass(frozen=True)
class ConditionResult:
    ok: bool
    worst_t: int
    worst_slack: float  # min over t of  rhs - lhs  in log space
    mu_bounded: bool | None = None


def _log_char_product(eta_list, V_p, p, t, halved):
    t = np.asarray(t, dtype=np.int64)
    inv2 = pow(2, -1, p) if halved else 1
    out = np.zeros(len(t))
    groups = Counter((eta, int(v) % p) for eta, v in zip(eta_list, V_p))
    with np.errstate(divide="ignore"):
        for (eta, v), c in groups.items():
            x = (v * inv2 % p) * t % p
            out += c * np.log(np.abs(eta.characteristic(x, p)))
    return out


def _as_eta_list(eta_list, n):
    if isinstance(eta_list, EtaSpec):
        return [eta_list] * n
    eta_list = list(eta_list)
    if len(eta_list) == 1:
        return eta_list * n
    if len(eta_list) != n:
        raise ValueError("need one EtaSpec per step or a single shared one")
    return eta_list


def condition_check(eta_list, p: int, V_p, c: float, halved: bool = False,
                    mu: float | None = None, slack: float = DEFAULT.slack) -> ConditionResult:
    """Check ``prod_i |E e_p(eta_i v_i t)| <= exp(-c sum_i ||v_i t/p||^2)`` for all t.

    ``halved`` evaluates the left side at ``t/2`` in F_p (the substitution that
    turns Bernoulli's ``|cos(2 pi x/p)|`` into ``|cos(pi x/p)|``).  With ``mu``
    also test ``|E e_p(eta_i x)| <= (1 - mu) + mu cos(2 pi x/p)`` for every x.
    """
    V_p = list(V_p)
    etas = _as_eta_list(eta_list, len(V_p))
    t = np.arange(p, dtype=np.int64)
    lhs = _log_char_product(etas, V_p, p, t, halved)
    rhs = -c * level_sums(V_p, p, t) / float(p * p)
    gap = rhs - lhs
    gap = np.where(np.isneginf(lhs), np.inf, gap)
    worst = int(np.argmin(gap))
    ok = bool(gap[worst] >= -slack)
    mu_ok = None
    if mu is not None:
        x = np.arange(p, dtype=np.int64)
        bound = (1 - mu) + mu * np.cos(2 * np.pi * x / p)
        mu_ok = all(bool(np.all(np.abs(e.characteristic(x, p)) <= bound + slack)) for e in set(etas))
    return ConditionResult(ok, worst, float(gap[worst]), mu_ok)


def max_condition_constant(eta_list, p: int, V_p, halved: bool = False) -> float:
    """Largest c for which ``condition_check`` passes (0 if none does)."""
    V_p = list(V_p)
    etas = _as_eta_list(eta_list, len(V_p))
    t = np.arange(p, dtype=np.int64)
    lhs = _log_char_product(etas, V_p, p, t, halved)
    D = level_sums(V_p, p, t) / float(p * p)
    if np.any((D == 0) & (lhs > 1e-12)):
        return 0.0
    mask = D > 0
    with np.errstate(divide="ignore", invalid="ignore"):
        ratio = np.where(np.isneginf(lhs[mask]), np.inf, -lhs[mask] / D[mask])
    return float(max(0.0, ratio.min())) if ratio.size else math.inf


# --------------------------------------------------------------------------
# key inequality


def char_bound(V_p, p: int, cap: int = DEFAULT.char_cap):
    """``(1/p) sum_xi prod_i |cos(pi v_i xi/p)|`` and ``(1/p) sum_xi exp(-2 sum ||v_i xi/p||^2)``."""
    if p > cap:
        raise BudgetExceeded(f"p = {p} beyond character-sum cap {cap}", projected=p)
    vals, mult = _grouped(V_p, p)
    step = max(1, _CHUNK // max(1, len(vals)))
    prod_total = 0.0
    exp_total = 0.0
    for s in range(0, p, step):
        xi = np.arange(s, min(p, s + step), dtype=np.int64)
        x = vals[:, None] * xi[None, :] % p
        with np.errstate(divide="ignore"):
            logc = (mult[:, None] * np.log(np.abs(np.cos(np.pi * x / p)))).sum(axis=0)
        prod_total += float(np.exp(logc).sum())
        d = np.minimum(x, p - x)
        exp_total += float(np.exp(-2.0 * (mult[:, None] * d * d).sum(axis=0) / (p * p)).sum())
    return prod_total / p, exp_total / p


# --------------------------------------------------------------------------
# level-set pipeline


@dataclass
class LevelSetReport:
    p: int
    V_p: tuple
    n: int
    rho: Fraction
    m: int | None = None
    level_size: int | None = None
    heavy_lhs: float | None = None  # |S_m| exp(-m + 2)
    heavy_rhs: float | None = None  # rho p
    S_m: np.ndarray | None = field(default=None, repr=False)
    # core selection
    epsilon: Fraction | None = None
    n_prime: int | None = None
    C0: Fraction | None = None
    core: tuple | None = None
    exceptional: tuple | None = None
    level_sums_by_value: dict | None = field(default=None, repr=False)
    double_count_total: int | None = None
    # dual set
    dual_constant: int = DEFAULT.dual_constant
    dual_scanned: bool = False
    dual_size: int | None = None
    dual_bound: float | None = None
    dual_ok: bool | None = None
    Ta_min_ok: bool | None = None
    Ta_energy: float | None = None
    Ta_energy_ok: bool | None = None
    dual_note: str | None = None
    # growth
    k: int | None = None
    c1: float | None = None
    growth_set: frozenset | None = field(default=None, repr=False)
    growth_size: int | None = None
    growth_ratio: float | None = None
    triangle_ok: bool | None = None
    inclusion_ok: bool | None = None
    inclusion_premise: bool | None = None
    inclusion_failures: int | None = None
    inclusion_checked: int | None = None

    def to_json(self, constants: Constants = DEFAULT):
        def fr(q):
            return None if q is None else str(q)

        def big(x):
            return str(x) if isinstance(x, int) and abs(x) > 2**53 else x

        return {
            "p": big(self.p),
            "n": self.n,
            "rho": fr(self.rho),
            "m": self.m,
            "level_size": self.level_size,
            "heavy_certificate": {"lhs": self.heavy_lhs, "rhs": self.heavy_rhs,
                                  "holds": None if self.heavy_lhs is None else self.heavy_lhs >= self.heavy_rhs * (1 - constants.slack)},
            "epsilon": fr(self.epsilon),
            "n_prime": self.n_prime,
            "C0": fr(self.C0),
            "core_size": None if self.core is None else len(self.core),
            "exceptional": None if self.exceptional is None else [big(v) for v in self.exceptional],
            "double_count_total": big(self.double_count_total),
            "dual": {"scanned": self.dual_scanned, "size": self.dual_size, "bound": self.dual_bound,
                     "holds": self.dual_ok, "Ta_lower_ok": self.Ta_min_ok, "Ta_energy": self.Ta_energy,
                     "Ta_energy_ok": self.Ta_energy_ok, "note": self.dual_note},
            "growth": {"k": self.k, "size": self.growth_size, "ratio": self.growth_ratio,
                       "triangle_ok": self.triangle_ok, "inclusion_premise": self.inclusion_premise,
                       "inclusion_ok": self.inclusion_ok, "inclusion_checked": self.inclusion_checked,
                       "inclusion_failures": self.inclusion_failures},
            "constants": {"A": constants.A, "c1": self.c1 if self.c1 is not None else constants.c1,
                          "dual_constant": self.dual_constant, "slack": constants.slack},
        }


def m_range(n: int, A: float = DEFAULT.A) -> int:
    return max(1, math.ceil(A * math.log(n))) if n > 1 else 1


def heavy_level(V_p, p: int, rho, constants: Constants = DEFAULT) -> LevelSetReport:
    """Smallest m with ``|S_m| exp(-m + 2) >= rho p``."""
    V_p = tuple(int(v) % p for v in V_p)
    rho = Fraction(rho)
    n = len(V_p)
    D = level_sums(V_p, p)
    Ds = np.sort(D)
    target = float(rho) * p
    for m in range(1, m_range(n, constants.A) + 1):
        size = int(np.searchsorted(Ds, m * p * p, side="right"))
        lhs = size * math.exp(2 - m)
        if lhs >= target * (1 - constants.slack):
            S = np.flatnonzero(D <= m * p * p).astype(np.int64)
            return LevelSetReport(p, V_p, n, rho, m, size, lhs, target, S)
    raise NoHeavyLevel(f"no m <= {m_range(n, constants.A)} with |S_m| e^(2-m) >= rho p; "
                       "is the supplied rho larger than the true one?", stage="heavy_level")


def core_select(report: LevelSetReport, epsilon=None, n_prime: int | None = None) -> LevelSetReport:
    """Keep the steps whose level sum is at most ``eps^-1 (m/n)|S_m|`` (or ``(m/n')|S_m|``)."""
    if report.m is None:
        raise PreconditionFailed("run heavy_level first", stage="core_select")
    p, m, n, size = report.p, report.m, report.n, report.level_size
    W = element_sums(report.V_p, report.S_m, p)
    # exact:  W / p^2 <= C0 (m/n) |S_m|  <=>  W * n <= C0 * m * |S_m| * p^2
    if n_prime is not None:
        thr_num, thr_den = m * size * p * p, n_prime
        C0 = None
    else:
        eps = Fraction(epsilon)
        if eps <= 0:
            raise ValueError("epsilon > 0")
        C0 = 1 / eps
        thr_num, thr_den = C0.numerator * m * size * p * p, C0.denominator * n
    keep = {v: W[v] * thr_den <= thr_num for v in W}
    core = tuple(v for v in report.V_p if keep[v])
    exc = sorted((v for v in report.V_p if not keep[v]), key=lambda v: (-W[v], v))
    total = sum(W[v] for v in report.V_p)
    return replace(report, epsilon=None if n_prime is not None else Fraction(epsilon), n_prime=n_prime,
                   C0=C0, core=core, exceptional=tuple(exc), level_sums_by_value=W, double_count_total=total)


def dual_set(report: LevelSetReport, cap: int = DEFAULT.dual_scan_cap,
             dual_constant: int = DEFAULT.dual_constant) -> LevelSetReport:
    """Full scan of ``S_m^* = {a : sum_{xi in S_m} ||a xi/p||^2 <= |S_m|/200}``."""
    p, S = report.p, report.S_m
    work = p * len(S)
    if work > cap:
        raise BudgetExceeded(f"dual scan needs {work} products (cap {cap})", projected=work, stage="dual_set")
    a_all = np.arange(p, dtype=np.int64)
    W = np.zeros(p, dtype=np.int64)
    T = np.zeros(p)
    step = max(1, _CHUNK // max(1, len(S)))
    for s in range(0, p, step):
        a = a_all[s:s + step]
        x = a[:, None] * S[None, :] % p
        d = np.minimum(x, p - x)
        W[s:s + step] = (d * d).sum(axis=1)
        T[s:s + step] = np.cos(2 * np.pi * x / p).sum(axis=1)
    size = len(S)
    # sum d^2 / p^2 <= |S| / c  <=>  c * sum d^2 <= |S| p^2
    dual = np.flatnonzero(dual_constant * W <= size * p * p)
    bound = 8 * p / size
    energy = float((T * T).sum())
    return replace(report, dual_constant=dual_constant, dual_scanned=True, dual_size=int(len(dual)),
                   dual_bound=bound, dual_ok=len(dual) <= bound * (1 + DEFAULT.slack),
                   Ta_min_ok=bool(np.all(T[dual] >= size / 2 - 1e-6 * size)),
                   Ta_energy=energy, Ta_energy_ok=energy <= 2 * p * size * (1 + 1e-9))


def growth_set(report: LevelSetReport, k: int, cap: int = DEFAULT.sumset_cap, c1: float | None = None,
               sample: int = 100, seed: int = 0, integer_values: Sequence[int] | None = None,
               dual_constant: int = DEFAULT.dual_constant) -> LevelSetReport:
    """Explicit ``kV''`` with ``V'' = distinct(V') + {0}`` and the inclusion checks.

    ``integer_values`` gives the integer lifts of the core (same order as
    ``report.core``) when the caller wants ``kV''`` in Z; otherwise the
    sumset is taken in F_p.
    """
    from .gap import iterated_sumset

    if report.core is None:
        raise PreconditionFailed("run core_select first", stage="growth_set")
    p, S, m, n = report.p, report.S_m, report.m, report.n
    core = report.core if integer_values is None else tuple(integer_values)
    X = set(core) | {0}
    width = len(X) ** min(k, 3)
    if integer_values is not None:
        lo, hi = min(X), max(X)
        width = min(width, k * (hi - lo) + 1)
    if width > cap * 50:
        raise BudgetExceeded(f"kV'' projected size {width} too large", projected=width, stage="growth_set")
    kX = iterated_sumset(X, k, None if integer_values is not None else p)
    if len(kX) > cap:
        raise BudgetExceeded(f"|kV''| = {len(kX)} exceeds cap {cap}", projected=len(kX), stage="growth_set")
    ratio = len(kX) / (float(1 / report.rho) * math.exp(2 - m))

    # triangle inequality and inclusion  U_{l<=k} lV' in S_m^*  on a sample of kV'' \ {0}
    rng = np.random.default_rng(seed)
    pool = sorted(kX - {0})
    chosen = pool if len(pool) <= sample else [pool[i] for i in rng.choice(len(pool), sample, replace=False)]
    sums = element_sums(chosen, S, p) if chosen else {}
    size = report.level_size
    C0 = report.C0 if report.C0 is not None else Fraction(n, report.n_prime)
    # premise k^2 C0 m / n <= 1/200 makes the inclusion automatic
    premise = k * k * C0 * m / n <= Fraction(1, dual_constant)
    tri_num = k * k * C0.numerator * m * size * p * p
    tri_den = C0.denominator * n
    tri_ok = all(sums[a % p] * tri_den <= tri_num for a in chosen)
    fails = sum(1 for a in chosen if dual_constant * sums[a % p] > size * p * p)
    return replace(report, k=k, c1=c1, growth_set=frozenset(kX), growth_size=len(kX), growth_ratio=ratio,
                   triangle_ok=tri_ok, inclusion_ok=fails == 0, inclusion_premise=bool(premise),
                   inclusion_failures=fails, inclusion_checked=len(chosen))
