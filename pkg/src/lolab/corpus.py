"""Seeded planted instances: steps sampled from a known proper symmetric GAP."""
from __future__ import annotations

import math
from dataclasses import dataclass

import numpy as np

from .gap import Gap, is_proper

# the acceptance corpus and the calibration corpus use disjoint seed ranges
ACCEPTANCE_SEEDS = tuple(range(50))
CALIBRATION_SEEDS = tuple(range(10_000, 10_030))


@dataclass(frozen=True)
class PlantedInstance:
    seed: int
    n: int
    rank: int
    C: float  # rho is about n^-C for this construction
    gap: Gap
    values: tuple

    @property
    def C_invert(self) -> float:
        """Exponent handed to ``invert``: half a unit of room over the construction."""
        return self.C + 0.5


def _split_volume(N: float, rank: int, rng) -> tuple:
    if rank == 1:
        return (max(1, int((N - 1) // 2)),)
    # roughly balanced box with (2M1+1)(2M2+1) close to N
    side = math.sqrt(N)
    skew = rng.uniform(0.7, 1.4)
    m1 = max(1, int(round((side * skew - 1) / 2)))
    m2 = max(1, int(round((N / (2 * m1 + 1) - 1) / 2)))
    return (m1, m2)


def planted(n: int, rank: int, seed: int, vol_exponent: float = 0.75) -> PlantedInstance:
    """Planted instance with Vol(Q) about ``n^vol_exponent``.

    With volume ``n^(C - r/2)`` the concentration is about ``n^-C``, so the
    construction sits at ``C = r/2 + vol_exponent``.
    """
    if rank not in (1, 2):
        raise ValueError("planted corpus supports rank 1 and 2")
    rng = np.random.default_rng([seed, n, rank])
    N = n**vol_exponent
    bounds = _split_volume(N, rank, rng)
    a1 = int(rng.integers(1, 8))
    if rank == 1:
        gens = (a1,)
    else:
        lo = 4 * a1 * bounds[0] + 1
        a2 = int(rng.integers(lo, 2 * lo))
        gens = (a1, a2)
    Q = Gap.symmetric(gens, bounds)
    assert is_proper(Q, 2)
    coeffs = [rng.integers(-M, M + 1, size=n) for M in bounds]
    vals = sum(int(g) * c for g, c in zip(gens, coeffs))
    return PlantedInstance(seed, n, rank, rank / 2 + vol_exponent, Q, tuple(int(v) for v in vals))


def planted_corpus(seeds=ACCEPTANCE_SEEDS, n_range=(100, 400)) -> list:
    """Rank alternates with the seed; n is drawn from ``n_range``."""
    out = []
    for s in seeds:
        rng = np.random.default_rng([s, 7])
        n = int(rng.integers(n_range[0], n_range[1] + 1))
        out.append(planted(n, 1 + s % 2, s))
    return out


@dataclass(frozen=True)
class PlantedVectors:
    """Vectors ``scale * G x_i`` with integer x_i in a box, normalised."""

    seed: int
    n: int
    d: int
    basis: np.ndarray  # columns are the lattice generators before scaling
    bounds: tuple
    coeffs: np.ndarray  # n x d integers
    scale: float
    beta: float

    @property
    def vectors(self):
        return self.scale * self.coeffs @ self.basis.T

    def exact_rho(self):
        """Bernoulli small-ball probability; exact because the ball holds one lattice value."""
        from .gap import flatten_vectors
        from .walks import EtaSpec, rho

        if self.d == 1:
            ints = [int(c) for c in self.coeffs[:, 0]]
        else:
            ints = flatten_vectors([tuple(int(c) for c in row) for row in self.coeffs])
        return rho(ints, EtaSpec.bernoulli())[0]


def planted_vectors(n: int, d: int, seed: int, vol_exponent: float = 0.75, beta_frac: float = 0.1) -> PlantedVectors:
    """Continuous planted instance in R^d.

    Bernoulli sums lie on a coset of ``2 scale G Z^d``, so any ball of radius
    below ``scale * lambda_min(G)`` meets at most one value; beta is set to
    ``beta_frac`` of that.
    """
    rng = np.random.default_rng([seed, n, d, 13])
    if d == 1:
        G = np.ones((1, 1))
        bounds = (max(1, int((n**vol_exponent - 1) // 2)),)
    else:
        th = rng.uniform(0, math.pi)
        R = np.array([[math.cos(th), -math.sin(th)], [math.sin(th), math.cos(th)]])
        G = R @ np.diag([1.0, rng.uniform(1.0, 1.5)])
        bounds = _split_volume(n**vol_exponent, 2, rng)
    coeffs = np.column_stack([rng.integers(-M, M + 1, size=n) for M in bounds])
    for row in range(n):  # no zero vectors
        while not coeffs[row].any():
            coeffs[row] = [rng.integers(-M, M + 1) for M in bounds]
    raw = coeffs @ G.T
    scale = 1 / math.sqrt(float((raw * raw).sum()))
    lam = float(np.linalg.svd(G, compute_uv=False).min()) if d > 1 else 1.0
    return PlantedVectors(seed, n, d, G, bounds, coeffs, scale, beta_frac * scale * lam)


def optimality_sample(n: int, seed: int) -> np.ndarray:
    """n reals uniform on ``[-2n, -n] u [n, 2n]``."""
    rng = np.random.default_rng([seed, n, 11])
    mag = rng.uniform(n, 2 * n, size=n)
    sign = rng.choice([-1.0, 1.0], size=n)
    return sign * mag
