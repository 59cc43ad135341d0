"""Planted-corpus inverse experiment: one CSV row per instance.

    python scripts/run_inverse.py [--budget] [--seeds 0:50] > inverse.csv
"""
import argparse
import csv
import sys

from lolab.calibration import measure_inverse
from lolab.corpus import planted_corpus
from lolab.runner import parallel_map


def _one(args):
    seed, budget = args
    return measure_inverse(planted_corpus([seed])[0], budget=budget)


if __name__ == "__main__":
    ap = argparse.ArgumentParser()
    ap.add_argument("--budget", action="store_true", help="n' = n // 10 instead of eps = 1/10")
    ap.add_argument("--seeds", default="0:50")
    args = ap.parse_args()
    lo, hi = map(int, args.seeds.split(":"))
    rows = parallel_map(_one, [(s, args.budget) for s in range(lo, hi)])
    w = csv.DictWriter(sys.stdout, fieldnames=list(rows[0]), lineterminator="\n")
    w.writeheader()
    w.writerows(rows)
