"""Per-instance measurements behind the pinned constants and the acceptance suite.

The calibration corpus (``CALIBRATION_SEEDS``) is disjoint from the acceptance
corpus, so pinned constants are never fitted to the instances they judge.
"""
from __future__ import annotations

import json
import math
from fractions import Fraction

from .config import DEFAULT, Constants
from .continuous import RealEta, VectorMultiset, continuous_invert, min_rank1_cover
from .corpus import CALIBRATION_SEEDS, optimality_sample, planted_corpus, planted_vectors
from .inverse import invert, invert_budget, verify_report
from .runner import parallel_map

EPS_ACCEPT = Fraction(1, 10)
BUDGET_DIVISOR = 10
OPTIMALITY_N = 200
OPTIMALITY_DELTA = 0.1
OPTIMALITY_EXPONENT = 1.3  # 3/2 - 0.2
CONT_N = 200


def measure_inverse(inst, budget: bool = False, constants: Constants = DEFAULT) -> dict:
    if budget:
        rep = invert_budget(inst.values, inst.n // BUDGET_DIVISOR, C=inst.C_invert, constants=constants)
    else:
        rep = invert(inst.values, EPS_ACCEPT, C=inst.C_invert, constants=constants)
    certs = verify_report(rep)
    return {"seed": inst.seed, "n": inst.n, "planted_rank": inst.rank, "rank": rep.rank, "ratio": rep.ratio,
            "covered": len(rep.covered), "exceptional": len(rep.exceptional),
            "budget": float(rep.exceptional_budget),
            "certificates": all(c.ok is not False for c in certs)}


def continuous_instance(seed: int):
    return planted_vectors(CONT_N, 1 + seed % 2, seed)


def measure_continuous(seed: int, K: float | None = None) -> dict:
    pv = continuous_instance(seed)
    C = pv.d / 2 + 0.75 + 0.5
    rep = continuous_invert(VectorMultiset.normalized(pv.vectors), pv.beta, RealEta.bernoulli(), pv.n // 2, C,
                            seed=seed, K=K)
    return {"seed": seed, "d": pv.d, "rank": rep.rank, "ratio": rep.ratio, "bullets": rep.bullets,
            "rho": rep.rho.rho}


def measure_optimality(seed: int) -> dict:
    n = OPTIMALITY_N
    pts = optimality_sample(n, seed)
    L, g = min_rank1_cover(pts, math.log(n) / math.sqrt(n), math.ceil((1 - OPTIMALITY_DELTA) * n))
    return {"seed": seed, "L": L, "g": g, "volume": 2 * L + 1, "ratio": (2 * L + 1) / n**OPTIMALITY_EXPONENT}


def _inv(seed):
    return measure_inverse(planted_corpus([seed])[0])


def _bud(seed):
    return measure_inverse(planted_corpus([seed])[0], budget=True)


def _cont(seed):
    return measure_continuous(seed, K=math.inf)


def calibrate(seeds=CALIBRATION_SEEDS) -> dict:
    """Measure every pinned constant on the calibration corpus."""
    seeds = list(seeds)
    inv = parallel_map(_inv, seeds)
    bud = parallel_map(_bud, seeds)
    cont = parallel_map(_cont, seeds)
    opt = parallel_map(measure_optimality, seeds)

    def entry(value, how, rows):
        return {"value": value, "method": how, "seeds": [seeds[0], seeds[-1]],
                "observed": [round(r["ratio"], 6) for r in rows]}

    return {
        "K_inverse": entry(max(r["ratio"] for r in inv), "max |Q| rho n^(r/2) over the corpus, eps = 1/10", inv),
        "K_budget": entry(max(r["ratio"] for r in bud), "max |Q| rho n'^(r/2) over the corpus, n' = n // 10", bud),
        **{f"K_continuous_d{d}": entry(max(r["ratio"] for r in cont if r["d"] == d),
                                       f"max |Q| rho n'^((r-d)/2) over d = {d} instances, n' = n // 2",
                                       [r for r in cont if r["d"] == d]) for d in (1, 2)},
        "optimality_c": entry(min(r["ratio"] for r in opt) / 1.2, "min (2L+1) / n^1.3 over the corpus, over 1.2", opt),
    }


def write_calibration(path, seeds=CALIBRATION_SEEDS) -> dict:
    cal = calibrate(seeds)
    with open(path, "w") as fh:
        json.dump(cal, fh, indent=2, sort_keys=True)
        fh.write("\n")
    return cal
