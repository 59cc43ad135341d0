"""Continuous small-ball machinery: z-norms, Monte-Carlo small-ball estimates,
the Fourier upper bound, the discretised continuous inverse pipeline, minimal
rank-1 covers and beta-net counting.

Every stochastic routine takes an explicit seed and builds its own
``numpy.random.Generator``; nothing touches global RNG state.
"""
from __future__ import annotations

import itertools
import math
from dataclasses import dataclass, field
from fractions import Fraction

import numpy as np
import sympy
from scipy.special import erf
from scipy.optimize import brentq
from scipy.spatial import cKDTree
from sympy import integer_nthroot, nextprime

from .config import DEFAULT, Constants, calibration_constant
from .errors import (BudgetExceeded, HypothesisViolated, MCTooNoisy, NoHeavyLevel, NoWindow,
                     PreconditionFailed)
from .gap import Gap, contains
from .inverse import gap_fit_detailed, min_budget


# --------------------------------------------------------------------------
# domain types


@dataclass(frozen=True)
class VectorMultiset:
    """n vectors in R^d (d <= 4) with sum of squared norms equal to 1."""

    vectors: np.ndarray

    def __post_init__(self):
        arr = np.atleast_2d(np.asarray(self.vectors, dtype=float))
        if arr.ndim != 2 or arr.shape[0] == 0:
            raise ValueError("need an (n, d) array")
        if arr.shape[1] > 4:
            raise ValueError("d <= 4")
        total = float((arr * arr).sum())
        if total == 0:
            raise ValueError("all vectors are zero")
        if abs(total - 1) > 1e-12:
            raise ValueError(f"sum of squared norms is {total}, not 1; use VectorMultiset.normalized")
        arr.setflags(write=False)
        object.__setattr__(self, "vectors", arr)

    @classmethod
    def normalized(cls, vectors):
        arr = np.atleast_2d(np.asarray(vectors, dtype=float))
        if arr.shape[0] == 1 and arr.shape[1] > 4:
            arr = arr.T
        return cls(arr / math.sqrt(float((arr * arr).sum())))

    @property
    def n(self):
        return self.vectors.shape[0]

    @property
    def d(self):
        return self.vectors.shape[1]

    def rescaled(self, beta):
        """``V_beta = beta^-1 V`` as a plain array (no normalisation)."""
        return self.vectors / beta


def _as_vectors(V):
    if isinstance(V, VectorMultiset):
        return V.vectors
    arr = np.asarray(V, dtype=float)
    return arr[:, None] if arr.ndim == 1 else arr


@dataclass(frozen=True)
class RealEta:
    """Real step distribution: finite atoms or a centred Gaussian."""

    kind: str
    atoms: tuple = ()
    sigma: float = 1.0
    C_z: float | None = None

    @classmethod
    def bernoulli(cls):
        return cls("atoms", ((-1.0, 0.5), (1.0, 0.5)), C_z=2.0)

    @classmethod
    def gaussian(cls, sigma=2.0):
        return cls("gaussian", sigma=float(sigma))

    @classmethod
    def from_atoms(cls, atoms):
        atoms = tuple((float(v), float(Fraction(str(p)))) for v, p in atoms)
        if abs(sum(p for _, p in atoms) - 1) > 1e-12 or any(p <= 0 for _, p in atoms):
            raise ValueError("atom probabilities must be positive and sum to 1")
        return cls("atoms", atoms)

    @property
    def exact(self):
        return self.kind == "atoms"

    def sample(self, shape, rng):
        if self.kind == "gaussian":
            return rng.normal(0.0, self.sigma, size=shape)
        vals = np.array([v for v, _ in self.atoms])
        probs = np.array([p for _, p in self.atoms])
        if len(vals) == 2 and probs[0] == probs[1]:
            return np.where(rng.random(shape) < 0.5, vals[0], vals[1])
        return rng.choice(vals, size=shape, p=probs)

    def difference_atoms(self):
        """Law of ``y = z1 - z2`` for atom lists, as (values, probs)."""
        acc = {}
        for (a, p), (b, q) in itertools.product(self.atoms, self.atoms):
            acc[a - b] = acc.get(a - b, 0.0) + p * q
        ys = np.array(sorted(acc))
        return ys, np.array([acc[y] for y in ys])

    def with_cz(self):
        return RealEta(self.kind, self.atoms, self.sigma, cz_window(self))

    def to_json(self):
        if self.kind == "gaussian":
            return {"kind": "gaussian", "sigma": self.sigma, "C_z": self.C_z}
        if self.atoms == ((-1.0, 0.5), (1.0, 0.5)):
            return {"kind": "bernoulli", "C_z": self.C_z}
        return {"kind": "atoms", "atoms": [[v, p] for v, p in self.atoms], "C_z": self.C_z}

    @classmethod
    def from_json(cls, obj):
        kind = obj["kind"]
        if kind == "bernoulli":
            return cls.bernoulli()
        if kind == "gaussian":
            return cls("gaussian", sigma=float(obj.get("sigma", 1.0)), C_z=obj.get("C_z"))
        if kind == "atoms":
            z = cls.from_atoms(obj["atoms"])
            return RealEta(z.kind, z.atoms, C_z=obj.get("C_z"))
        raise ValueError(f"unknown z kind {kind!r}")


# --------------------------------------------------------------------------
# z-norm


def _frac_dist(t):
    return np.abs(t - np.rint(t))


def z_norm_sq(w, z: RealEta):
    """``E ||w (z1 - z2)||^2`` for an array of reals w (exact for atoms and Gaussians)."""
    w = np.asarray(w, dtype=float)
    if z.kind == "atoms":
        ys, ps = z.difference_atoms()
        mass = {}
        for y, p in zip(np.abs(ys), ps):  # ||-t|| = ||t||
            if y != 0:
                mass[y] = mass.get(y, 0.0) + p
        out = np.zeros(w.shape)
        for y, p in mass.items():
            t = w * y
            t -= np.rint(t)
            out += p * (t * t)
        return out
    # y ~ N(0, 2 sigma^2);  ||t||^2 = 1/12 + sum_k (-1)^k cos(2 pi k t) / (pi k)^2
    s2 = 2.0 * z.sigma**2
    aw = np.abs(w)
    out = np.empty(w.shape)
    small = aw * math.sqrt(s2) < 1 / 16  # P(|w y| > 1/2) below 1e-27 here
    out[small] = s2 * aw[small] ** 2
    big = ~small
    if big.any():
        wb = aw[big]
        acc = np.full(wb.shape, 1.0 / 12.0)
        for k in range(1, 40):
            term = np.exp(-2 * math.pi**2 * k * k * s2 * wb * wb) / (math.pi * k) ** 2
            acc += term if k % 2 == 0 else -term
        out[big] = acc
    return out


@dataclass(frozen=True)
class ZNorm:
    value: float
    low: float
    high: float
    exact: bool


def z_norm(w: float, z: RealEta, trials: int = 100_000, seed: int = 0, sampled: bool = False) -> ZNorm:
    """``(E ||w (z1 - z2)||^2)^(1/2)``; closed form unless ``sampled`` is set."""
    if not sampled:
        v = math.sqrt(float(z_norm_sq(np.array([w]), z)[0]))
        return ZNorm(v, v, v, True)
    rng = np.random.default_rng(seed)
    y = z.sample(trials, rng) - z.sample(trials, rng)
    vals = _frac_dist(w * y) ** 2
    m, se = float(vals.mean()), float(vals.std(ddof=1) / math.sqrt(trials))
    return ZNorm(math.sqrt(m), math.sqrt(max(0.0, m - 3 * se)), math.sqrt(m + 3 * se), False)


def cz_window(z: RealEta, cap: float = 1e6) -> float:
    """Smallest C with ``P(1 <= |z1 - z2| <= C) >= 1/2``."""
    if z.kind == "atoms":
        ys, ps = z.difference_atoms()
        mass = {}
        for y, p in zip(np.abs(ys), ps):
            if y >= 1 - 1e-12:
                mass[y] = mass.get(y, 0.0) + p
        acc = 0.0
        for y in sorted(mass):
            acc += mass[y]
            if acc >= 0.5 - 1e-12 and y <= cap:
                return float(y)
        raise NoWindow("P(|z1 - z2| >= 1) < 1/2: z fails the second-moment window")
    # |y| half-normal with scale s = sqrt(2) sigma
    s = math.sqrt(2.0) * z.sigma

    def window(C):
        return float(erf(C / (s * math.sqrt(2))) - erf(1 / (s * math.sqrt(2))))

    if window(cap) < 0.5:
        raise NoWindow(f"sup_C P(1 <= |z1 - z2| <= C) = {window(cap):.4f} < 1/2")
    return float(brentq(lambda C: window(C) - 0.5, 1.0, cap, xtol=1e-12))


def cz_verify_mc(z: RealEta, C: float, trials: int = 10**6, seed: int = 0):
    """Monte-Carlo ``P(1 <= |y| <= C)`` and its standard error."""
    rng = np.random.default_rng(seed)
    y = np.abs(z.sample(trials, rng) - z.sample(trials, rng))
    hit = (y >= 1) & (y <= C)
    p = float(hit.mean())
    return p, math.sqrt(p * (1 - p) / trials)


# --------------------------------------------------------------------------
# small-ball probability


@dataclass(frozen=True)
class SmallBallEstimate:
    rho: float
    se: float
    center: tuple
    trials: int  # samples used for the estimate (the other half chose the centre)

    @property
    def low(self):
        return max(0.0, self.rho - 3 * self.se)

    @property
    def high(self):
        return min(1.0, self.rho + 3 * self.se)

    def to_json(self):
        return {"rho": self.rho, "se": self.se, "ci3": [self.low, self.high],
                "center": list(self.center), "trials": self.trials, "kind": "lower estimate of the sup"}


def sample_sums(V, z: RealEta, trials: int, rng, chunk: int = 1 << 14) -> np.ndarray:
    V = _as_vectors(V)
    out = np.empty((trials, V.shape[1]))
    for s in range(0, trials, chunk):
        c = min(chunk, trials - s)
        out[s:s + c] = z.sample((c, V.shape[0]), rng) @ V
    return out


def _pick_center(S, beta, extra):
    if S.shape[1] == 1:
        s = np.sort(S[:, 0])
        hi = np.searchsorted(s, s + 2 * beta * (1 - 1e-12), side="right")
        cnt = hi - np.arange(len(s))
        i = int(np.argmax(cnt))
        best_c, best = np.array([(s[i] + s[hi[i] - 1]) / 2]), int(cnt[i])
    else:
        tree = cKDTree(S)
        cand = S[:: max(1, len(S) // 5000)]
        cnt = tree.query_ball_point(cand, beta, return_length=True)
        i = int(np.argmax(cnt))
        best_c, best = cand[i], int(cnt[i])
    for c in extra:
        c = np.atleast_1d(np.asarray(c, dtype=float))
        k = int((((S - c) ** 2).sum(axis=1) <= beta * beta).sum())
        if k > best:
            best_c, best = c, k
    return best_c


def small_ball_mc(V, beta: float, z: RealEta, trials: int = 100_000, centers=(), seed: int = 0,
                  min_trials: int = 10_000) -> SmallBallEstimate:
    """Split-sample estimate of ``sup_x P(sum z_i v_i in B(x, beta))``.

    One half of the samples chooses the centre (densest empirical ball plus
    any supplied centres); the other half estimates the probability at that
    centre, so the result is an unbiased estimate of a lower bound on the sup.
    """
    if trials < min_trials:
        raise ValueError(f"trials >= {min_trials}")
    rng = np.random.default_rng(seed)
    S = sample_sums(V, z, trials, rng)
    half = trials // 2
    c = _pick_center(S[:half], beta, centers)
    est = S[half:]
    hits = int((((est - c) ** 2).sum(axis=1) <= beta * beta * (1 + 1e-12)).sum())
    m = len(est)
    p = hits / m
    return SmallBallEstimate(p, math.sqrt(max(p * (1 - p), 1.0 / m) / m), tuple(float(x) for x in c), m)


@dataclass(frozen=True)
class BoundEstimate:
    value: float
    se: float

    @property
    def high(self):
        return self.value + 3 * self.se


def small_ball_bound(V, r: float, z: RealEta, mc_points: int = 20_000, seed: int = 0,
                     chunk: int = 4096) -> BoundEstimate:
    """``exp(pi r^2) * int exp(-sum ||<v_i, xi>||_z^2 / 2 - pi |xi|^2) d xi`` by importance sampling.

    ``exp(-pi |xi|^2)`` is the density of ``N(0, I / (2 pi))``, so the integral
    is the expectation of ``exp(-sum ||<v_i, xi>||_z^2 / 2)`` under it.
    """
    V = _as_vectors(V)
    rng = np.random.default_rng(seed)
    vals = np.empty(mc_points)
    for s in range(0, mc_points, chunk):
        c = min(chunk, mc_points - s)
        xi = rng.normal(0.0, 1 / math.sqrt(2 * math.pi), size=(c, V.shape[1]))
        F = z_norm_sq(xi @ V.T, z).sum(axis=1)
        vals[s:s + c] = np.exp(-F / 2)
    scale = math.exp(math.pi * r * r)
    return BoundEstimate(scale * float(vals.mean()), scale * float(vals.std(ddof=1)) / math.sqrt(mc_points))


def level_function(Vb: np.ndarray, xi: np.ndarray, z: RealEta, chunk: int = 8192) -> np.ndarray:
    """``sum_v ||<v, xi>||_z^2`` for each row of xi."""
    out = np.empty(len(xi))
    for s in range(0, len(xi), chunk):
        out[s:s + chunk] = z_norm_sq(xi[s:s + chunk] @ Vb.T, z).sum(axis=1)
    return out


# --------------------------------------------------------------------------
# continuous inverse pipeline


@dataclass
class ContinuousReport:
    n: int
    d: int
    beta: float
    n_prime: int
    C: float
    rho: SmallBallEstimate
    M: int
    m: int
    level_measure: float
    N: int
    grid_hits: int
    S_size: int
    S_certificate: bool
    y0: float
    C_z: float
    double_count_ok: bool
    bad: tuple
    k: float
    D: int
    p: int
    magnitude_ratio: float
    P: Gap
    rank: int
    generators: tuple  # real generators of Q = (beta / p) P
    size: int
    ratio: float
    bullets: dict
    close_count: int
    max_distance: float
    refined: Gap | None = None
    notes: list = field(default_factory=list)

    @property
    def ok(self):
        return all(self.bullets.values())

    def to_json(self, constants: Constants = DEFAULT):
        from . import __version__

        return {
            "version": __version__, "n": self.n, "d": self.d, "beta": self.beta, "n_prime": self.n_prime,
            "C": self.C, "rho": self.rho.to_json(), "M": self.M, "m": self.m, "level_measure": self.level_measure,
            "N": self.N, "grid_hits": self.grid_hits, "S_size": self.S_size, "S_certificate": self.S_certificate,
            "y0": self.y0, "C_z": self.C_z, "double_count_ok": self.double_count_ok, "bad": list(self.bad),
            "k": self.k, "D": self.D, "p": self.p, "magnitude_ratio": self.magnitude_ratio,
            "P": self.P.to_json(), "rank": self.rank, "Q_generators": [list(g) for g in self.generators],
            "size": self.size, "ratio": self.ratio, "bullets": dict(self.bullets),
            "close_count": self.close_count, "max_distance": self.max_distance,
            "refined": None if self.refined is None else self.refined.to_json(),
            "notes": list(self.notes), "constants": constants.to_json(),
        }


def _ball_uniform(rng, count, d, radius):
    g = rng.normal(size=(count, d))
    g /= np.linalg.norm(g, axis=1, keepdims=True)
    return g * (radius * rng.random(count) ** (1.0 / d))[:, None]


def small_generator_bound(d: int, C_z: float) -> float:
    """Ceiling on ``p / sqrt(n')`` implied by p = round(D k), D <= 1024 d C_z + 1, m >= 1."""
    return (1024 * d * C_z + 1) / (8 * math.pi) + 1


def continuous_invert(V, beta: float, z: RealEta, n_prime: int, C: float, seed: int = 0,
                      trials: int = 200_000, level_points: int = 100_000, grid_cap: int = 200_000,
                      s_cap: int = 4096, eps: Fraction = Fraction(1, 4), K: float | None = None,
                      constants: Constants = DEFAULT, rho_estimate: SmallBallEstimate | None = None,
                      refine: bool = True) -> ContinuousReport:
    """Discretised continuous inverse pipeline with the four structural checks."""
    V = V if isinstance(V, VectorMultiset) else VectorMultiset.normalized(V)
    n, d = V.n, V.d
    notes = []
    if not min_budget(n, eps) <= n_prime <= n:
        raise PreconditionFailed(f"need ceil(n^eps) <= n' <= n, got n' = {n_prime}", stage="precondition")
    C_z = z.C_z if z.C_z is not None else cz_window(z)
    rng = np.random.default_rng([seed, 1])

    # 1. small-ball probability
    est = rho_estimate or small_ball_mc(V, beta, z, trials, seed=seed)
    floor = n ** (-C)
    if est.low < floor <= est.high:
        raise MCTooNoisy(f"rho estimate {est.rho:.3g} +- {3 * est.se:.2g} straddles n^-C = {floor:.3g}", stage="small_ball")
    if est.high < floor:
        raise PreconditionFailed(f"rho estimate {est.rho:.3g} below n^-C = {floor:.3g}", stage="small_ball")
    rho = est.rho

    # 2. level sets S_m = {xi : F(xi) + |xi|^2 <= m} inside B(0, sqrt(M))
    Vb = V.rescaled(beta)
    M = max(1, math.ceil(2 * constants.A * math.log(n)))
    xi = _ball_uniform(rng, level_points, d, math.sqrt(M))
    vals = level_function(Vb, xi, z) + (xi * xi).sum(axis=1)
    ball_vol = math.pi ** (d / 2) / math.gamma(d / 2 + 1) * M ** (d / 2)
    m = None
    for mm in range(1, M + 1):
        hits = int((vals <= mm).sum())
        meas = ball_vol * hits / level_points
        if hits >= 10 and meas >= rho * math.exp(mm / 4 - 2):
            m, level_measure = mm, meas
            break
    if m is None:
        raise NoHeavyLevel("no m <= M with mu(S_m) >= rho exp(m/4 - 2)", stage="level_sets")

    # 3. T = {xi in B(0,1) : F(xi) <= 4m} on a shifted grid (1/N) Z^d
    vmax = float(np.linalg.norm(Vb, axis=1).max())
    N = int(nextprime(max(31, math.ceil(4 * vmax)) - 1))
    while (2 * N + 1) ** d > grid_cap and N > 7:
        N = int(sympy.prevprime(N))
        if (2 * N + 1) ** d <= grid_cap:
            notes.append(f"grid prime capped at N = {N}")
    axes = np.arange(-N, N + 1) / N
    B0 = np.array(list(itertools.product(axes, repeat=d))) if d > 1 else axes[:, None]
    B0 = B0[(B0 * B0).sum(axis=1) <= 1 + 1.0 / N]
    best = None
    for t in range(4):
        x0 = np.zeros(d) if t == 0 else rng.random(d) / N
        pts = B0 + x0
        pts = pts[(pts * pts).sum(axis=1) <= 1]
        F = level_function(Vb, pts, z)
        inT = pts[F <= 4 * m]
        if best is None or len(inT) > len(best[0]):
            best = (inT, F[F <= 4 * m])
    inT, FT = best
    grid_hits = len(inT)
    xi0 = inT[int(np.argmin(FT))]
    S = xi0 - inT
    if len(S) > s_cap:
        S = S[np.sort(rng.choice(len(S), s_cap, replace=False))]
        notes.append(f"S subsampled to {s_cap} points")
    FS = level_function(Vb, S, z)
    S_cert = bool(np.all(FS <= 16 * m * (1 + 1e-9)))

    # 4. y0 on a 64-point grid of [1, C_z]; bad vectors by Markov
    proj = S @ Vb.T  # |S| x n
    ys = np.linspace(1.0, C_z, 64)
    G = np.array([(_frac_dist(y * proj) ** 2).sum() for y in ys])
    y0 = float(ys[int(np.argmin(G))])
    double_ok = bool(G.min() <= 32 * m * len(S))
    per_v = (_frac_dist(y0 * proj) ** 2).sum(axis=0)
    bad_mask = per_v >= 32 * m * len(S) / n_prime
    bad = tuple(int(i) for i in np.flatnonzero(bad_mask))
    if len(bad) > n_prime:
        notes.append(f"{len(bad)} bad vectors exceed n' = {n_prime}")

    # 5. rounding to (Z / (D k))^d
    k = math.sqrt(n_prime / (64 * math.pi**2 * m))
    D = math.ceil(1024 * d * abs(y0))
    p = max(1, int(round(D * k)))
    good = Vb[~bad_mask]
    A = np.rint(p * good).astype(np.int64)
    magnitude = float((A * A).sum()) / (k * k / beta**2) if k > 0 else math.inf
    cube = np.array(list(itertools.product((-1, 0, 1), repeat=d)), dtype=np.int64)
    pts = {tuple(int(c) for c in a + u) for a in np.vstack([A, np.zeros((1, d), dtype=np.int64)]) for u in cube}
    if d == 1:
        X = {q[0] for q in pts}
        fit = gap_fit_detailed(X, 2, None, r_max=1, fit_constant=None, check_growth=False)
    else:
        fit = gap_fit_detailed(pts, 2, None, r_max=d, fit_constant=None, check_growth=False, min_rank=d)
    P = fit.gap
    r = P.rank

    def as_vec(g):
        return tuple(g) if isinstance(g, tuple) else (g,)

    gens = tuple(tuple(beta * c / p for c in as_vec(g)) for g in P.generators)
    size = P.volume
    target = (1 / rho) * n_prime ** ((d - r) / 2)
    ratio = size / target

    # the four checks
    def member(q):
        return contains(P, q if d > 1 else q[0])

    full = all(member(tuple(D * c for c in u)) for u in itertools.product((0, 1), repeat=d))
    Aall = np.rint(p * Vb).astype(np.int64)
    dist = np.linalg.norm(V.vectors - beta * Aall / p, axis=1)
    tol = beta * math.sqrt(d) / (2 * p) * (1 + 1e-9)
    close = [i for i in range(n) if dist[i] <= tol and member(tuple(int(c) for c in Aall[i]))]
    if K is None:
        try:
            K = calibration_constant(f"K_continuous_d{d}")
        except KeyError:
            K = None
    card_ok = d <= r <= 4 and (K is None or ratio <= 1.2 * K)
    gen_ok = (p >= 1 and p / math.sqrt(n_prime) <= small_generator_bound(d, C_z)
              and all(abs(c) <= max(1.0, math.sqrt(n_prime) / beta) for g in P.generators for c in as_vec(g)))
    bullets = {"full_dimension": bool(full), "approximation": len(close) >= n - n_prime,
               "rank_cardinality": bool(card_ok), "small_generators": bool(gen_ok)}
    if K is None:
        notes.append("no pinned K_continuous: cardinality checked for rank only")

    refined = None
    if refine and r == d:
        kk = math.floor(k)
        if kk >= 2:
            gens_int = np.array([as_vec(g) for g in P.generators]).T
            if round(abs(np.linalg.det(gens_int))) == 1:
                refined = Gap.symmetric(tuple(tuple(kk * c for c in as_vec(g)) if d > 1 else kk * g
                                              for g in P.generators), [N_ // kk for N_ in P.upper])
            else:
                notes.append("refine skipped: generators not unimodular")
        else:
            notes.append(f"refine skipped: floor(k) = {kk} < 2 at this scale")
    elif refine:
        refined = P  # rank above d: P itself serves

    return ContinuousReport(n, d, beta, n_prime, C, est, M, m, level_measure, N, grid_hits, len(S), S_cert, y0,
                            C_z, double_ok, bad, k, D, p, magnitude, P, r, gens, size, ratio, bullets, len(close),
                            float(dist.max()), refined, notes)


# --------------------------------------------------------------------------
# minimal rank-1 covers (optimality example)


def _covered_count(points, delta, L):
    """Best number of points within ``delta`` of ``{x g : |x| <= L}`` over g > 0, and that g."""
    a = np.abs(np.asarray(points, dtype=float))
    free = int((a <= delta).sum())
    a = a[a > delta]
    if L == 0 or len(a) == 0:
        return free, 1.0
    x = np.arange(L, 0, -1, dtype=float)  # descending x: interval ends ascend along each row
    lo = np.maximum((a[:, None] - delta) / x[None, :], 0.0)
    hi = (a[:, None] + delta) / x[None, :]
    # merge overlapping intervals of the same point so it is counted once
    start = np.ones(lo.shape, dtype=bool)
    start[:, 1:] = lo[:, 1:] > hi[:, :-1]
    stop = np.ones(lo.shape, dtype=bool)
    stop[:, :-1] = start[:, 1:]
    seg_lo, seg_hi = lo[start], hi[stop]
    ev = np.concatenate([seg_lo, seg_hi])
    kind = np.concatenate([np.ones(len(seg_lo)), -np.ones(len(seg_hi))])
    order = np.lexsort((-kind, ev))  # openings before closings at equal coordinates
    run = np.cumsum(kind[order])
    j = int(np.argmax(run))
    return free + int(run[j]), float(ev[order][j])


def min_rank1_cover(points, delta: float, keep: int, L_max: int = 10**6):
    """Smallest L (and a witness g) such that some ``{x g : |x| <= L}`` is delta-close to ``keep`` points.

    Each (point, coefficient) pair contributes the interval of g values
    that put ``x g`` within delta of the point; the best g for a given L is
    found by a sweep, and L by binary search (coverage is monotone in L).
    """
    points = list(points)
    if keep > len(points):
        raise ValueError("keep <= number of points")
    if _covered_count(points, delta, 0)[0] >= keep:
        return 0, 1.0
    lo, hi = 0, 1
    while _covered_count(points, delta, hi)[0] < keep:
        lo, hi = hi, hi * 2
        if hi > L_max:
            raise BudgetExceeded("rank-1 cover needs L beyond L_max", projected=hi)
    while hi - lo > 1:
        mid = (lo + hi) // 2
        if _covered_count(points, delta, mid)[0] >= keep:
            hi = mid
        else:
            lo = mid
    return hi, _covered_count(points, delta, hi)[1]


# --------------------------------------------------------------------------
# beta-net counting


def _ceil_root(num: int, den: int, k: int) -> int:
    """``ceil((num/den)^(1/k))`` for positive integers."""
    # smallest integer c with c^k den >= num
    r, exact = integer_nthroot(num // den, k)
    c = int(r)
    while c**k * den < num:
        c += 1
    while c > 0 and (c - 1) ** k * den >= num:
        c -= 1
    return c


def _ceil_frac(q: Fraction) -> int:
    return -((-q.numerator) // q.denominator)


@dataclass(frozen=True)
class NetCount:
    n: int
    n_prime: int
    beta: Fraction
    rho: Fraction
    epsilon: Fraction
    gap_family_count: int
    multiset_term: int
    exceptional_count: int
    dominating_term: sympy.Expr
    total_bound: int
    constants: dict

    def to_json(self):
        return {
            "n": self.n, "n_prime": self.n_prime, "beta": str(self.beta), "rho": str(self.rho),
            "epsilon": str(self.epsilon), "gap_family_count": str(self.gap_family_count),
            "multiset_term": str(self.multiset_term), "exceptional_count": str(self.exceptional_count),
            "dominating_term": str(self.dominating_term), "total_bound": str(self.total_bound),
            "constants": self.constants,
        }


def net_count(n: int, beta, rho, epsilon, c_gen: int = 1, c_dim: int = 1, c_exc: int = 1,
              c_total: int = 1) -> NetCount:
    """Exact counting expressions of the beta-net argument.

    With ``n' = ceil(n^(1 - 3 eps/2))``:
      * gap family   ``ceil( ((beta^-1 sqrt n') sqrt n')^c_gen * (rho^-1 / sqrt n')^c_dim )``
      * multisets    ``ceil( (rho^-1 / sqrt n')^n )``
      * exceptional  ``sum_{i <= n'} ceil(c_exc / beta)^i``
      * dominating   ``(c_total n^(-1/2 + eps) rho^-1)^n`` kept as an exact sympy number
      * total        ``ceil(dominating) + gap family * exceptional``
    """
    beta, rho, eps = Fraction(beta), Fraction(rho), Fraction(epsilon)
    if not 0 < rho <= 1:
        raise HypothesisViolated("need 0 < rho <= 1")
    if not 0 < eps <= Fraction(1, 3):
        raise HypothesisViolated("need 0 < eps <= 1/3")
    if not 0 < beta:
        raise HypothesisViolated("need beta > 0")
    # beta >= exp(-n^eps)  <=>  log(1/beta) <= n^eps
    if beta < 1 and math.log(1 / beta) > float(n) ** float(eps):
        raise HypothesisViolated("need beta >= exp(-n^eps)")
    expo = 1 - 3 * eps / 2
    n_prime = min_budget(n, expo)
    # ((n'/beta)^c_gen) * (rho^-1)^c_dim * n'^(-c_dim/2): square, take an exact ceiling root
    sq = Fraction(n_prime, 1) ** (2 * c_gen) / beta ** (2 * c_gen) * (1 / rho) ** (2 * c_dim) / Fraction(n_prime) ** c_dim
    gap_family = _ceil_root(sq.numerator, sq.denominator, 2)
    ms = (1 / rho) ** (2 * n) / Fraction(n_prime) ** n
    multiset = _ceil_root(ms.numerator, ms.denominator, 2)
    base = _ceil_frac(c_exc / beta)
    exceptional = sum(base**i for i in range(n_prime + 1))
    dom = (sympy.Integer(c_total) * sympy.Integer(n) ** (sympy.Rational(-1, 2) + sympy.Rational(eps.numerator, eps.denominator))
           * sympy.Rational(rho.denominator, rho.numerator)) ** n
    total = int(sympy.ceiling(dom)) + gap_family * exceptional
    return NetCount(n, n_prime, beta, rho, eps, gap_family, multiset, exceptional, dom, total,
                    {"c_gen": c_gen, "c_dim": c_dim, "c_exc": c_exc, "c_total": c_total})


def closed_form_dominating(n: int, rho, epsilon) -> sympy.Expr:
    """``rho^-n n^(-n (1/2 - eps))`` written directly."""
    rho, eps = Fraction(rho), Fraction(epsilon)
    return (sympy.Rational(rho.denominator, rho.numerator) ** n
            * sympy.Integer(n) ** (-n * (sympy.Rational(1, 2) - sympy.Rational(eps.numerator, eps.denominator))))
