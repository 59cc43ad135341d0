"""Continuous planted experiment and the rank-1 optimality example, as CSV.

    python scripts/run_continuous.py [--seeds 0:20] > continuous.csv
"""
import argparse
import csv
import sys

from lolab.calibration import measure_optimality, measure_continuous
from lolab.runner import parallel_map

if __name__ == "__main__":
    ap = argparse.ArgumentParser()
    ap.add_argument("--seeds", default="0:20")
    args = ap.parse_args()
    lo, hi = map(int, args.seeds.split(":"))
    seeds = list(range(lo, hi))
    cont = parallel_map(measure_continuous, seeds)
    opt = parallel_map(measure_optimality, seeds)
    w = csv.writer(sys.stdout, lineterminator="\n")
    w.writerow(["seed", "d", "rank", "ratio", "bullets_ok", "rho_hat", "cover_L", "cover_volume", "cover_ratio"])
    for c, a in zip(cont, opt):
        w.writerow([c["seed"], c["d"], c["rank"], repr(c["ratio"]), int(all(c["bullets"].values())), repr(c["rho"]),
                    a["L"], a["volume"], repr(a["ratio"])])
