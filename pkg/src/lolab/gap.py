"""Generalized arithmetic progressions over Z, Z^d and F_p.

A GAP is the image of the integer box ``prod [lower_i, upper_i]`` under
``x -> offset + sum x_i * generators[i]``.  Scalar ambients (Z, F_p) use plain
ints; Z^d uses tuples of ints.  Enumeration-based checks refuse to run past a
volume cap instead of approximating.
"""
from __future__ import annotations

import itertools
import math
from dataclasses import dataclass
from fractions import Fraction
from typing import Iterable

import numpy as np
from sympy import nextprime

from .errors import CapExceeded, PreconditionFailed, RankTooLarge, SearchBudgetExceeded

DEFAULT_CAP = 10**6
MAX_MEMBERSHIP_RANK = 4


def _is_vec(x):
    return isinstance(x, (tuple, list, np.ndarray))


@dataclass(frozen=True)
class Gap:
    generators: tuple
    lower: tuple
    upper: tuple
    offset: object = 0
    modulus: int | None = None

    def __post_init__(self):
        gens = tuple(tuple(int(c) for c in g) if _is_vec(g) else int(g) for g in self.generators)
        off = tuple(int(c) for c in self.offset) if _is_vec(self.offset) else int(self.offset)
        lo = tuple(int(m) for m in self.lower)
        hi = tuple(int(m) for m in self.upper)
        if not len(gens) == len(lo) == len(hi):
            raise ValueError("rank must equal the number of generators and bounds")
        if any(a > b for a, b in zip(lo, hi)):
            raise ValueError("need lower_i <= upper_i")
        if self.modulus is not None:
            if _is_vec(off) or any(_is_vec(g) for g in gens):
                raise ValueError("F_p GAPs are scalar")
            off %= self.modulus
            gens = tuple(g % self.modulus for g in gens)
        if gens and _is_vec(off) != _is_vec(gens[0]):
            if off == 0:
                off = tuple(0 for _ in gens[0])
            else:
                raise ValueError("offset and generators live in different groups")
        object.__setattr__(self, "generators", gens)
        object.__setattr__(self, "offset", off)
        object.__setattr__(self, "lower", lo)
        object.__setattr__(self, "upper", hi)

    # construction helpers
    @classmethod
    def symmetric(cls, generators, bounds, modulus=None):
        gens = tuple(generators)
        off = tuple(0 for _ in gens[0]) if gens and _is_vec(gens[0]) else 0
        return cls(gens, tuple(-int(b) for b in bounds), tuple(int(b) for b in bounds), off, modulus)

    @classmethod
    def point(cls, x, modulus=None):
        return cls((), (), (), x, modulus)

    @property
    def rank(self):
        return len(self.generators)

    @property
    def dim(self):
        return len(self.offset) if _is_vec(self.offset) else None

    @property
    def volume(self):
        return math.prod(b - a + 1 for a, b in zip(self.lower, self.upper))

    @property
    def is_symmetric(self):
        zero = self.offset == (tuple(0 for _ in self.offset) if self.dim else 0)
        return zero and all(a == -b for a, b in zip(self.lower, self.upper))

    @property
    def bounds(self):
        """Symmetric bounds N_i (only meaningful for symmetric GAPs)."""
        return self.upper

    def element(self, coeffs):
        if self.dim:
            out = list(self.offset)
            for x, g in zip(coeffs, self.generators):
                for j in range(self.dim):
                    out[j] += x * g[j]
            return tuple(out)
        s = self.offset + sum(x * g for x, g in zip(coeffs, self.generators))
        return s % self.modulus if self.modulus else s

    # JSON
    def to_json(self):
        def enc(x):
            if _is_vec(x):
                return [enc(c) for c in x]
            return str(x) if abs(x) > 2**53 else x

        return {
            "offset": enc(self.offset),
            "generators": [enc(g) for g in self.generators],
            "lower": [enc(m) for m in self.lower],
            "upper": [enc(m) for m in self.upper],
            "modulus": None if self.modulus is None else enc(self.modulus),
        }

    @classmethod
    def from_json(cls, obj):
        def dec(x):
            if isinstance(x, list):
                return tuple(dec(c) for c in x)
            return int(x)

        mod = obj.get("modulus")
        return cls(
            tuple(dec(g) for g in obj["generators"]),
            tuple(int(m) for m in obj["lower"]),
            tuple(int(m) for m in obj["upper"]),
            dec(obj.get("offset", 0)),
            None if mod is None else int(mod),
        )


# --------------------------------------------------------------------------
# enumeration


def _image_array(Q: Gap, lower, upper):
    """All images of the box as an array (1-d for scalars, (N, d) for vectors)."""
    big = abs_bound(Q, lower, upper) >= 2**62
    dtype = object if big else np.int64
    if Q.dim:
        pts = np.array([Q.offset], dtype=dtype)
        for g, a, b in zip(Q.generators, lower, upper):
            xs = np.arange(a, b + 1, dtype=dtype)
            step = xs[:, None] * np.array(g, dtype=dtype)[None, :]
            pts = (pts[:, None, :] + step[None, :, :]).reshape(-1, Q.dim)
        return pts
    vals = np.array([Q.offset], dtype=dtype)
    for g, a, b in zip(Q.generators, lower, upper):
        xs = np.arange(a, b + 1, dtype=dtype)
        vals = (vals[:, None] + xs[None, :] * g).ravel()
        if Q.modulus:
            vals %= Q.modulus
    return vals


def abs_bound(Q: Gap, lower=None, upper=None):
    lower = Q.lower if lower is None else lower
    upper = Q.upper if upper is None else upper
    if Q.modulus:
        return Q.modulus
    if Q.dim:
        return max(abs(c) for c in Q.offset) + sum(
            max(abs(a), abs(b)) * max(abs(c) for c in g) for g, a, b in zip(Q.generators, lower, upper)
        )
    return abs(Q.offset) + sum(max(abs(a), abs(b)) * abs(g) for g, a, b in zip(Q.generators, lower, upper))


def _to_python(arr, vec):
    if vec:
        return {tuple(int(c) for c in row) for row in arr}
    return {int(x) for x in arr}


def volume_and_enumerate(Q: Gap, cap: int = DEFAULT_CAP):
    """Return ``(Vol(Q), set of elements)``; refuse when Vol(Q) > cap."""
    vol = Q.volume
    if vol > cap:
        raise CapExceeded(f"Vol(Q) = {vol} exceeds cap {cap}", projected=vol)
    return vol, _to_python(_image_array(Q, Q.lower, Q.upper), bool(Q.dim))


def _independent(Q: Gap) -> bool:
    """Generators linearly independent over Q (torsion-free ambient only)."""
    if Q.modulus:
        return False
    if Q.rank == 0:
        return True
    if Q.dim:
        G = np.array(Q.generators, dtype=object).T
        return _rational_rank(G) == Q.rank
    return Q.rank == 1 and Q.generators[0] != 0


def _rational_rank(M) -> int:
    rows = [[Fraction(int(x)) for x in row] for row in np.asarray(M)]
    rank, ncols = 0, len(rows[0]) if rows else 0
    for c in range(ncols):
        piv = next((r for r in range(rank, len(rows)) if rows[r][c] != 0), None)
        if piv is None:
            continue
        rows[rank], rows[piv] = rows[piv], rows[rank]
        for r in range(len(rows)):
            if r != rank and rows[r][c] != 0:
                f = rows[r][c] / rows[rank][c]
                rows[r] = [a - f * b for a, b in zip(rows[r], rows[rank])]
        rank += 1
    return rank


def is_proper(Q: Gap, t: int = 1, cap: int = DEFAULT_CAP) -> bool:
    """Injectivity of the coefficient map on the t-dilated box."""
    if t < 1:
        raise ValueError("t >= 1")
    for g, a, b in zip(Q.generators, Q.lower, Q.upper):
        if b > a and not (any(g) if _is_vec(g) else g):
            return False
    if _independent(Q):
        return True
    lower = tuple(t * a for a in Q.lower)
    upper = tuple(t * b for b in Q.upper)
    vol = math.prod(b - a + 1 for a, b in zip(lower, upper))
    if vol > cap:
        raise CapExceeded(f"Vol({t}Q) = {vol} exceeds cap {cap}", projected=vol)
    img = _image_array(Q, lower, upper)
    if Q.dim:
        distinct = len(np.unique(img, axis=0)) if img.dtype != object else len(_to_python(img, True))
    else:
        distinct = len(np.unique(img)) if img.dtype != object else len(set(img.tolist()))
    return distinct == vol


def transform(Q: Gap, dilate_l: int = 1, scale_c: int = 1) -> Gap:
    """Generators times ``scale_c``; every dimension bound times ``dilate_l``."""
    if scale_c == 0:
        raise ValueError("scale_c must be nonzero")
    gens = tuple(tuple(scale_c * c for c in g) if _is_vec(g) else scale_c * g for g in Q.generators)
    off = tuple(scale_c * c for c in Q.offset) if Q.dim else scale_c * Q.offset
    return Gap(gens, tuple(dilate_l * a for a in Q.lower), tuple(dilate_l * b for b in Q.upper), off, Q.modulus)


def sarkozy_shrink(Q: Gap, l: int) -> Gap:
    """``Q_l = {l a_1 x_1 + ... : |x_i| <= M_i / l^2}`` for symmetric Q."""
    if not Q.is_symmetric:
        raise PreconditionFailed("Q_l is defined for symmetric GAPs")
    gens = tuple(tuple(l * c for c in g) if _is_vec(g) else l * g for g in Q.generators)
    return Gap.symmetric(gens, [N // (l * l) for N in Q.upper], Q.modulus) if gens else Q


# --------------------------------------------------------------------------
# membership


def _solve_independent(Q: Gap, x):
    """Unique rational coefficients for independent generators, or None."""
    target = np.array(x if Q.dim else (x,), dtype=object) - np.array(Q.offset if Q.dim else (Q.offset,), dtype=object)
    G = [list(g) if Q.dim else [g] for g in Q.generators]
    d, r = len(target), Q.rank
    if r == 0:
        return () if not any(target) else None
    # augmented row reduction over Q
    rows = [[Fraction(int(G[j][i])) for j in range(r)] + [Fraction(int(target[i]))] for i in range(d)]
    piv_cols, rank = [], 0
    for c in range(r):
        piv = next((i for i in range(rank, d) if rows[i][c] != 0), None)
        if piv is None:
            continue
        rows[rank], rows[piv] = rows[piv], rows[rank]
        pv = rows[rank][c]
        rows[rank] = [v / pv for v in rows[rank]]
        for i in range(d):
            if i != rank and rows[i][c] != 0:
                f = rows[i][c]
                rows[i] = [a - f * b for a, b in zip(rows[i], rows[rank])]
        piv_cols.append(c)
        rank += 1
    if any(rows[i][r] != 0 for i in range(rank, d)):
        return None
    sol = [Fraction(0)] * r
    for i, c in enumerate(piv_cols):
        sol[c] = rows[i][r]
    return tuple(sol)


def contains(Q: Gap, x, max_rank: int = MAX_MEMBERSHIP_RANK, witness: bool = False):
    """Exact membership; with ``witness=True`` returns coefficients or None."""
    if Q.rank > max_rank:
        raise RankTooLarge(f"membership search configured for rank <= {max_rank}")
    if Q.modulus:
        w = _search_mod(Q, int(x) % Q.modulus)
    elif _independent(Q):
        sol = _solve_independent(Q, x)
        w = None
        if sol is not None and all(s.denominator == 1 for s in sol):
            coeffs = tuple(int(s) for s in sol)
            if all(a <= c <= b for c, a, b in zip(coeffs, Q.lower, Q.upper)):
                w = coeffs
    else:
        w = _search_z(Q, x)
    return w if witness else w is not None


def _ranges(Q: Gap, i, coord=None):
    """Min/max of sum_{j<i} x_j a_j (coordinate ``coord`` for vectors)."""
    lo = hi = 0
    for j in range(i):
        g = Q.generators[j] if coord is None else Q.generators[j][coord]
        a, b = Q.lower[j] * g, Q.upper[j] * g
        lo += min(a, b)
        hi += max(a, b)
    return lo, hi


def _search_z(Q: Gap, x):
    vec = bool(Q.dim)
    d = Q.dim or 1
    gens = [tuple(g) if vec else (g,) for g in Q.generators]
    target = tuple(a - b for a, b in zip(x, Q.offset)) if vec else (x - Q.offset,)
    r = Q.rank
    ranges = [[_ranges(Q, i, c if vec else None) for c in range(d)] for i in range(r + 1)]

    def solve_last(t):
        g = gens[0]
        nz = [c for c in range(d) if g[c] != 0]
        if not nz:
            if any(t):
                return None
            return 0 if Q.lower[0] <= 0 <= Q.upper[0] else Q.lower[0]
        c = nz[0]
        if t[c] % g[c]:
            return None
        k = t[c] // g[c]
        if any(t[j] != k * g[j] for j in range(d)):
            return None
        return k if Q.lower[0] <= k <= Q.upper[0] else None

    def rec(i, t):
        if i == 0:
            return () if not any(t) else None
        if i == 1:
            k = solve_last(t)
            return None if k is None else (k,)
        g = gens[i - 1]
        lo_x, hi_x = Q.lower[i - 1], Q.upper[i - 1]
        # narrow x_{i-1} so the residual stays inside the range of the rest
        for c in range(d):
            if g[c] == 0:
                lo_r, hi_r = ranges[i - 1][c]
                if not lo_r <= t[c] <= hi_r:
                    return None
                continue
            lo_r, hi_r = ranges[i - 1][c]
            a, b = (t[c] - hi_r), (t[c] - lo_r)
            if g[c] > 0:
                lo_x = max(lo_x, _ceil_div(a, g[c]))
                hi_x = min(hi_x, b // g[c])
            else:
                lo_x = max(lo_x, _ceil_div(b, g[c]))
                hi_x = min(hi_x, a // g[c])
        for xi in _outward(lo_x, hi_x):
            res = rec(i - 1, tuple(t[c] - xi * g[c] for c in range(d)))
            if res is not None:
                return res + (xi,)
        return None

    return rec(r, target)


def _ceil_div(a, b):
    return -((-a) // b)


def _outward(lo, hi):
    """Integers in [lo, hi], nearest to zero first (deterministic order)."""
    if lo > hi:
        return []
    start = min(max(0, lo), hi)
    out = [start]
    k = 1
    while start - k >= lo or start + k <= hi:
        if start - k >= lo:
            out.append(start - k)
        if start + k <= hi:
            out.append(start + k)
        k += 1
    return out


def _search_mod(Q: Gap, x):
    p = Q.modulus
    t0 = (x - Q.offset) % p
    r = Q.rank
    if r == 0:
        return () if t0 == 0 else None
    outer = [range(a, b + 1) for a, b in zip(Q.lower[1:], Q.upper[1:])]
    g0 = Q.generators[0]
    for combo in itertools.product(*outer):
        t = (t0 - sum(c * g for c, g in zip(combo, Q.generators[1:]))) % p
        if g0 == 0:
            if t == 0:
                k = 0 if Q.lower[0] <= 0 <= Q.upper[0] else Q.lower[0]
                return (k,) + combo
            continue
        k = (t * pow(g0, -1, p)) % p
        # smallest representative >= lower bound
        k = Q.lower[0] + ((k - Q.lower[0]) % p)
        if k <= Q.upper[0]:
            return (k,) + combo
    return None


# --------------------------------------------------------------------------
# sumsets


def iterated_sumset(values: Iterable, k: int, modulus: int | None = None) -> set:
    """``kX = {x_1 + ... + x_k}`` with repetition, computed explicitly."""
    X = sorted(set(values))
    if k < 1:
        raise ValueError("k >= 1")
    if X and _is_vec(X[0]):
        cur = set(X)
        for _ in range(k - 1):
            cur = {tuple(a + b for a, b in zip(u, v)) for u in cur for v in X}
        return cur
    if modulus:
        mask = np.zeros(modulus, dtype=bool)
        base = np.zeros(modulus, dtype=bool)
        base[[x % modulus for x in X]] = True
        mask[:] = base
        for _ in range(k - 1):
            nxt = np.zeros(modulus, dtype=bool)
            for x in np.flatnonzero(base):
                nxt |= np.roll(mask, int(x))
            mask = nxt
        return {int(x) for x in np.flatnonzero(mask)}
    lo, hi = min(X), max(X)
    arr = np.zeros(hi - lo + 1, dtype=bool)
    arr[[x - lo for x in X]] = True
    cur, cur_lo = arr, lo
    for _ in range(k - 1):
        cur = np.convolve(cur.astype(np.int64), arr.astype(np.int64)) > 0
        cur_lo += lo
    return {int(i) + cur_lo for i in np.flatnonzero(cur)}


# --------------------------------------------------------------------------
# Freiman embedding


@dataclass(frozen=True)
class EmbeddingCertificate:
    p: int
    values: tuple  # V mod p, same order as the sorted input
    order: int
    rho_verified: bool | None = None
    relation_verified: bool | None = None


def embedding_prime(V, compact: bool = False, k: int | None = None) -> int:
    vals = [int(v) for v in V]
    if compact:
        # enough for S to be injective mod p and for order-k sums to stay apart
        k = k or 1
        bound = max(4 * sum(abs(v) for v in vals) + 1, 2 * k * max(abs(v) for v in vals) + 1, 17)
    else:
        bound = 2 ** len(vals) * (sum(abs(v) for v in vals) + 1)
    return int(nextprime(bound - 1))


def flatten_vectors(V):
    """Map Z^d vectors to Z by a base large enough that all n-fold sums stay apart."""
    V = [tuple(int(c) for c in v) for v in V]
    n = len(V)
    base = 2 * n * max((abs(c) for v in V for c in v), default=0) + 1
    return [sum(c * base**j for j, c in enumerate(v)) for v in V]


def check_freiman_relation(V, p: int, k: int, cap: int = 2 * 10**6) -> bool:
    """Relation (sums of up to k elements agree in Z iff they agree mod p)."""
    X = sorted(set(int(v) for v in V))
    union, cur = set(X), set(X)
    for _ in range(k - 1):
        cur = {a + b for a in cur for b in X}
        union |= cur
        if len(union) > cap:
            raise CapExceeded("sumset union too large to verify", projected=len(union))
    return len({u % p for u in union}) == len(union)


def freiman_embed(V, k: int | None = None, compact: bool = False, verify: bool = False,
                  bruteforce_cap: int = 14) -> EmbeddingCertificate:
    """Embed an integer multiset into F_p without changing its concentration."""
    from .walks import as_multiset, rho, rho_mod

    V = as_multiset(V)
    k = V.n if k is None else k
    p = embedding_prime(V.values, compact=compact, k=k)
    vals = tuple(v % p for v in V.values)
    rho_ok = rel_ok = None
    if verify and V.n <= bruteforce_cap:
        rho_ok = rho(V)[0] == rho_mod(vals, p)
        rel_ok = check_freiman_relation(V.values, p, k)
    return EmbeddingCertificate(p, vals, k, rho_ok, rel_ok)


def lift(residue: int, p: int) -> int:
    """Symmetric representative in (-p/2, p/2]."""
    r = residue % p
    return r - p if r > p // 2 else r


# --------------------------------------------------------------------------
# structural checks


def divide_containment(X, k: int, P: Gap, cap: int = DEFAULT_CAP) -> Gap:
    """Divide ``kX ⊆ P`` into ``X ⊆ {sum x_i a_i : |x_i| <= 2 N_i / k}``."""
    X = set(X)
    zero = tuple(0 for _ in P.offset) if P.dim else 0
    if zero not in X:
        raise PreconditionFailed("0 must lie in X", stage="0 in X")
    if not P.is_symmetric:
        raise PreconditionFailed("P must be symmetric", stage="symmetry")
    if not is_proper(P, 2, cap):
        raise PreconditionFailed("P must be 2-proper", stage="2-properness")
    kX = iterated_sumset(X, k, P.modulus)
    missing = [x for x in kX if not contains(P, x)]
    if missing:
        raise PreconditionFailed(f"kX not inside P (e.g. {missing[0]})", stage="containment")
    Q = Gap.symmetric(P.generators, [2 * N // k for N in P.upper], P.modulus)
    bad = [x for x in X if not contains(Q, x)]
    assert not bad, f"dividing property violated at {bad[0]}"
    return Q


def sarkozy_cover(A, Q: Gap, delta, budget: int = 12, cap: int = DEFAULT_CAP):
    """Smallest (m, l), ordered by m + l then m, with ``Q_l ⊆ 2m A``."""
    A = set(A)
    delta = Fraction(delta)
    neg = (lambda a: tuple(-c for c in a)) if Q.dim else (lambda a: (-a) % Q.modulus if Q.modulus else -a)
    if any(neg(a) not in A for a in A):
        raise PreconditionFailed("A must be symmetric", stage="symmetry")
    if not Q.is_symmetric:
        raise PreconditionFailed("Q must be symmetric", stage="symmetry")
    vol, elems = volume_and_enumerate(Q, cap)
    if not A <= elems:
        raise PreconditionFailed("A must lie in Q", stage="containment")
    if vol != len(elems):
        raise PreconditionFailed("Q must be proper", stage="properness")
    if len(A) < delta * len(elems):
        raise PreconditionFailed("|A| < delta |Q|", stage="density")
    sums = {}
    for s in range(2, 2 * budget + 1):
        for m in range(1, s):
            l = s - m
            if m > budget or l > budget:
                continue
            if m not in sums:
                sums[m] = iterated_sumset(A, 2 * m, Q.modulus)
            _, Ql = volume_and_enumerate(sarkozy_shrink(Q, l), cap)
            if Ql <= sums[m]:
                return m, l
    raise SearchBudgetExceeded(f"no (m, l) with m, l <= {budget}")
