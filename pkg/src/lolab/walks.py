"""Exact distributions of signed and lazy random walks.

The walk is ``S = sum_i v_i * eta_i`` with iid steps ``eta_i`` drawn from a
finite atom list with rational probabilities.  Distributions are computed by
iterated convolution over a dense integer-indexed table.  Counts are integers
over the common denominator ``L**n``; when they no longer fit in int64 the
table is carried modulo several 62/63-bit primes and reconstructed by CRT.
"""
from __future__ import annotations

import itertools
import math
from collections import Counter
from dataclasses import dataclass, field
from fractions import Fraction
from functools import lru_cache
from typing import Iterable, Mapping, Sequence

import numpy as np
from sympy import prevprime

from .errors import BudgetExceeded

DEFAULT_TABLE_BUDGET = 2 * 10**8  # width * number of moduli
BRUTEFORCE_BUDGET = 10**7
_INT64_SAFE = 2**62


# --------------------------------------------------------------------------
# domain types


@dataclass(frozen=True)
class EtaSpec:
    """Finite-atom step distribution.  ``atoms`` is a tuple of (value, prob)."""

    atoms: tuple
    label: str = "custom"

    def __post_init__(self):
        atoms = tuple((int(v), Fraction(p)) for v, p in self.atoms)
        merged = Counter()
        for v, p in atoms:
            if p <= 0:
                raise ValueError(f"atom {v} has non-positive probability {p}")
            merged[v] += p
        if sum(merged.values()) != 1:
            raise ValueError(f"probabilities sum to {sum(merged.values())}, not 1")
        object.__setattr__(self, "atoms", tuple(sorted(merged.items())))

    @classmethod
    def bernoulli(cls):
        return cls(((-1, Fraction(1, 2)), (1, Fraction(1, 2))), "bernoulli")

    @classmethod
    def lazy(cls, mu):
        mu = Fraction(mu)
        if not 0 < mu <= 1:
            raise ValueError("lazy walk needs 0 < mu <= 1")
        atoms = [(-1, mu / 2), (1, mu / 2)]
        if mu < 1:
            atoms.append((0, 1 - mu))
        return cls(tuple(atoms), f"lazy({mu})")

    @property
    def values(self):
        return [v for v, _ in self.atoms]

    @property
    def probabilities(self):
        return [p for _, p in self.atoms]

    def is_symmetric(self):
        d = dict(self.atoms)
        return all(d.get(-v) == p for v, p in d.items())

    def characteristic(self, x, p):
        """``E e_p(eta * x)`` for integer array ``x`` (complex array)."""
        x = np.asarray(x, dtype=np.int64)
        out = np.zeros(x.shape, dtype=complex)
        for v, prob in self.atoms:
            out += float(prob) * np.exp(2j * np.pi * ((v * x) % p) / p)
        return out

    def to_json(self):
        return {
            "label": self.label,
            "atoms": [[v, f"{p.numerator}/{p.denominator}"] for v, p in self.atoms],
        }

    @classmethod
    def from_json(cls, obj: Mapping):
        label = obj.get("label", "custom")
        if label == "bernoulli" and "atoms" not in obj:
            return cls.bernoulli()
        if label.startswith("lazy") and "atoms" not in obj:
            return cls.lazy(Fraction(str(obj["mu"])))
        atoms = tuple((int(v), Fraction(str(p))) for v, p in obj["atoms"])
        return cls(atoms, label)


@dataclass(frozen=True)
class StepMultiset:
    """Integer multiset, canonicalised as a sorted tuple."""

    values: tuple

    def __post_init__(self):
        vals = tuple(sorted(int(v) for v in self.values))
        if not vals:
            raise ValueError("a step multiset needs n >= 1")
        object.__setattr__(self, "values", vals)

    @property
    def n(self):
        return len(self.values)

    @property
    def multiplicities(self):
        return dict(sorted(Counter(self.values).items()))

    def __iter__(self):
        return iter(self.values)

    def __len__(self):
        return len(self.values)

    def scaled(self, c):
        return StepMultiset(tuple(c * v for v in self.values))


def as_multiset(V) -> StepMultiset:
    return V if isinstance(V, StepMultiset) else StepMultiset(tuple(V))


@dataclass(frozen=True)
class WalkDistribution:
    support: dict
    n: int
    steps: StepMultiset
    eta: EtaSpec = field(repr=False)

    def __getitem__(self, x):
        return self.support.get(x, Fraction(0))

    def total(self):
        return sum(self.support.values(), Fraction(0))

    def max_mass(self):
        best = max(self.support.values())
        return best, min(x for x, q in self.support.items() if q == best)


# --------------------------------------------------------------------------
# DP engine


@lru_cache(maxsize=None)
def _primes_below(limit: int, count: int) -> tuple:
    out, p = [], limit
    for _ in range(count):
        p = prevprime(p)
        out.append(p)
    return tuple(out)


def _reduced_atoms(eta: EtaSpec):
    """Shift atoms to start at 0 and divide out their gcd; integer weights."""
    L = math.lcm(*(p.denominator for p in eta.probabilities))
    base = min(eta.values)
    g = math.gcd(*(v - base for v in eta.values)) or 1
    atoms = [((v - base) // g, int(p * L)) for v, p in eta.atoms]
    return base, g, atoms, L


class _Table:
    """Counts of the reduced walk ``T = sum v_i b_i`` on a dense index range."""

    def __init__(self, V: StepMultiset, eta: EtaSpec, budget=DEFAULT_TABLE_BUDGET, with_float=True):
        self.base, self.gap, self.atoms, self.L = _reduced_atoms(eta)
        self.n = V.n
        self.shift = self.base * sum(V.values)
        self.steps = sorted(V.values, key=abs)
        offsets = [[v * b for b, _ in self.atoms] for v in self.steps]
        self.lo = sum(min(o) for o in offsets)
        self.width = sum(max(o) - min(o) for o in offsets) + 1
        self.denominator = self.L**self.n
        weight_sum = sum(w for _, w in self.atoms)
        if self.denominator < _INT64_SAFE:
            self.moduli = [None]
        else:
            limit = (2**64 - 1) // weight_sum
            bits = limit.bit_length() - 1
            count = self.denominator.bit_length() // bits + 1
            self.moduli = list(_primes_below(limit, count))
            while math.prod(self.moduli) <= self.denominator:
                count += 1
                self.moduli = list(_primes_below(limit, count))
        projected = self.width * (len(self.moduli) + (1 if with_float else 0))
        if projected > budget:
            raise BudgetExceeded(
                f"DP table of {self.width} values x {len(self.moduli)} moduli exceeds budget {budget}",
                projected=projected,
            )
        self.offsets = offsets
        self.residues = [self._run(p) for p in self.moduli]
        self.probs = self._run_float() if with_float else None

    def _run(self, p):
        exact = p is None
        dtype = np.int64 if exact else np.uint64
        cur = np.zeros(self.width, dtype=dtype)
        cur[0] = 1
        w = 1
        weights = [w_ for _, w_ in self.atoms]
        P = None if exact else np.uint64(p)
        simple = len(self.atoms) == 2 and weights == [1, 1]
        for o in self.offsets:
            shifts = [x - min(o) for x in o]
            span = max(shifts)
            if simple and span > 0:
                s = max(shifts)
                seg = cur[:w].copy()
                tgt = cur[s:s + w]
                tgt += seg
                if not exact:
                    np.minimum(tgt, tgt - P, out=tgt)
            else:
                acc = np.zeros(w + span, dtype=dtype)
                for s, wt in zip(shifts, weights):
                    acc[s:s + w] += cur[:w] * dtype(wt)
                if not exact:
                    acc %= P
                cur[:w + span] = acc
            w += span
        return cur

    def _run_float(self):
        cur = np.zeros(self.width)
        cur[0] = 1.0
        w = 1
        probs = [wt / self.L for _, wt in self.atoms]
        for o in self.offsets:
            shifts = [x - min(o) for x in o]
            span = max(shifts)
            acc = np.zeros(w + span)
            for s, q in zip(shifts, probs):
                acc[s:s + w] += q * cur[:w]
            cur[:w + span] = acc
            w += span
        return cur

    def value_at(self, idx):
        return self.shift + self.gap * (self.lo + idx)

    def count_at(self, idx):
        if self.moduli == [None]:
            return int(self.residues[0][idx])
        return _crt([int(r[idx]) for r in self.residues], self.moduli)

    def nonzero_indices(self):
        mask = np.zeros(self.width, dtype=bool)
        for r in self.residues:
            mask |= r != 0
        return np.flatnonzero(mask)


def _crt(residues, moduli):
    x, m = 0, 1
    for r, p in zip(residues, moduli):
        t = ((r - x) * pow(m, -1, p)) % p
        x += m * t
        m *= p
    return x


# --------------------------------------------------------------------------
# public operations


def exact_distribution(V, eta: EtaSpec | None = None, budget=DEFAULT_TABLE_BUDGET) -> WalkDistribution:
    """Exact law of ``sum v_i eta_i`` as a value -> Fraction map."""
    V = as_multiset(V)
    eta = eta or EtaSpec.bernoulli()
    table = _Table(V, eta, budget, with_float=False)
    support = {}
    for idx in table.nonzero_indices():
        support[table.value_at(int(idx))] = Fraction(table.count_at(int(idx)), table.denominator)
    return WalkDistribution(dict(sorted(support.items())), V.n, V, eta)


def rho(V, eta: EtaSpec | None = None, budget=DEFAULT_TABLE_BUDGET):
    """Concentration probability and the smallest value attaining it."""
    V = as_multiset(V)
    eta = eta or EtaSpec.bernoulli()
    table = _Table(V, eta, budget, with_float=True)
    if table.moduli == [None]:
        counts = table.residues[0]
        idx = int(np.argmax(counts))
        return Fraction(int(counts[idx]), table.denominator), table.value_at(idx)
    # locate candidates in floating point, then compare them exactly
    f = table.probs
    cand = np.flatnonzero(f >= f.max() * (1 - 1e-6))
    best, best_idx = -1, None
    for idx in cand:
        c = table.count_at(int(idx))
        if c > best:
            best, best_idx = c, int(idx)
    return Fraction(best, table.denominator), table.value_at(best_idx)


def rho_bruteforce(V, eta: EtaSpec | None = None, budget=BRUTEFORCE_BUDGET) -> Fraction:
    """Concentration probability by enumerating every atom assignment."""
    V = as_multiset(V)
    eta = eta or EtaSpec.bernoulli()
    k = len(eta.atoms)
    if k**V.n > budget:
        raise BudgetExceeded(f"{k}^{V.n} assignments exceed {budget}", projected=k**V.n)
    L = math.lcm(*(p.denominator for p in eta.probabilities))
    atom_vals = np.array(eta.values, dtype=np.int64)
    atom_w = [int(p * L) for p in eta.probabilities]
    exact_int = L**V.n < _INT64_SAFE
    atom_w = np.array(atom_w, dtype=np.int64 if exact_int else object)
    sums = np.zeros(1, dtype=np.int64)
    weights = np.ones(1, dtype=atom_w.dtype)
    for v in V.values:
        sums = (sums[:, None] + v * atom_vals[None, :]).ravel()
        weights = (weights[:, None] * atom_w[None, :]).ravel()
    keys, inv = np.unique(sums, return_inverse=True)
    totals = np.zeros(len(keys), dtype=weights.dtype)
    np.add.at(totals, inv, weights)
    return Fraction(int(max(totals)), L**V.n)


def exact_distribution_mod(V, p: int, eta: EtaSpec | None = None) -> dict:
    """Law of the walk read in ``F_p``: residue -> Fraction (cyclic DP)."""
    V = as_multiset(V)
    eta = eta or EtaSpec.bernoulli()
    L = math.lcm(*(q.denominator for q in eta.probabilities))
    dtype = np.int64 if L**V.n < _INT64_SAFE else object
    cur = np.zeros(p, dtype=dtype)
    cur[0] = 1
    for v in V.values:
        acc = np.zeros(p, dtype=dtype)
        for a, q in eta.atoms:
            acc += np.roll(cur, (a * v) % p) * int(q * L)
        cur = acc
    den = L**V.n
    return {r: Fraction(int(c), den) for r, c in enumerate(cur) if c}


def rho_mod(V, p: int, eta: EtaSpec | None = None) -> Fraction:
    return max(exact_distribution_mod(V, p, eta).values())


def erdos_bound(n: int) -> Fraction:
    if n < 1:
        raise ValueError("n >= 1")
    return Fraction(math.comb(n, n // 2), 2**n)


def stanley_reference(n: int, budget=DEFAULT_TABLE_BUDGET):
    """``V0 = {-floor(n/2), ..., floor(n/2)}`` and its exact concentration."""
    if n < 1 or n % 2 == 0:
        raise ValueError("stanley_reference needs odd n")
    h = n // 2
    V0 = StepMultiset(tuple(range(-h, h + 1)))
    r, _ = rho(V0, EtaSpec.bernoulli(), budget)
    return V0, r


def _ordered_sum_counts(values: Sequence[int], l: int) -> Counter:
    base = Counter(values)
    out = Counter({0: 1})
    for _ in range(l):
        nxt = Counter()
        for s, c in out.items():
            for v, m in base.items():
                nxt[s + v] += c * m
        out = nxt
    return out


def halasz_count(V, l: int, method="mitm", budget=10**8):
    """Number ``R_l`` of ordered solutions of v_i1+..+v_il = v_j1+..+v_jl.

    Returns ``(R_l, n**(-2l-1/2) * R_l)``; the second entry is the bare
    Halasz expression with no constant applied.
    """
    V = as_multiset(V)
    n = V.n
    if method == "mitm":
        R = sum(c * c for c in _ordered_sum_counts(V.values, l).values())
    elif method == "direct":
        if n ** (2 * l) > budget:
            raise BudgetExceeded(f"n^(2l) = {n ** (2 * l)} tuples", projected=n ** (2 * l))
        vals = V.values
        R = 0
        for idx in itertools.product(range(n), repeat=2 * l):
            if sum(vals[i] for i in idx[:l]) == sum(vals[j] for j in idx[l:]):
                R += 1
    else:
        raise ValueError(method)
    return R, R * n ** (-2 * l - 0.5)


def halasz_ratio(V, l: int, eta: EtaSpec | None = None) -> float:
    """Measured ``rho / (n^(-2l-1/2) R_l)``; the theorem only says O(1)."""
    r, _ = rho(V, eta)
    _, expr = halasz_count(V, l)
    return float(r) / expr


def distribution_from_json(obj: Mapping):
    V = StepMultiset(tuple(int(v) for v in obj["values"]))
    eta = EtaSpec.from_json(obj.get("eta", {"label": "bernoulli"}))
    return V, eta


def fraction_str(q: Fraction) -> str:
    return f"{q.numerator}/{q.denominator}"
