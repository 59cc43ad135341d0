"""Forward-theorem suites: exact comparisons against the Erdos and Stanley extremisers."""
from __future__ import annotations

import csv
import io
import itertools
from fractions import Fraction

import numpy as np

from .walks import EtaSpec, erdos_bound, fraction_str, halasz_ratio, rho, stanley_reference

FIELDS = ("suite", "instance", "rho", "bound", "margin", "ok")


def _row(suite, instance, r, bound, ok=None):
    margin = bound - r if isinstance(bound, Fraction) else bound
    return {"suite": suite, "instance": instance, "rho": r, "bound": bound, "margin": margin,
            "ok": (r <= bound) if ok is None else ok}


def stanley_suite(n_values=(3, 5, 7), lo=-6, hi=6) -> list:
    """Every distinct n-subset of [lo, hi] against the symmetric interval."""
    rows = []
    for n in n_values:
        _, ref = stanley_reference(n)
        for V in itertools.combinations(range(lo, hi + 1), n):
            r = rho(V, EtaSpec.bernoulli())[0]
            rows.append(_row("stanley", " ".join(map(str, V)), r, ref))
    return rows


def erdos_suite(count=500, seed=0, n_max=14, v_max=10) -> list:
    rng = np.random.default_rng([seed, 21])
    rows = []
    for i in range(count):
        n = int(rng.integers(1, n_max + 1))
        mags = rng.integers(1, v_max + 1, size=n)
        V = [int(m * s) for m, s in zip(mags, rng.choice([-1, 1], size=n))]
        rows.append(_row("erdos", " ".join(map(str, V)), rho(V)[0], erdos_bound(n)))
    return rows


def halasz_suite(count=50, seed=0, n_range=(8, 16), v_max=20, l=2) -> list:
    """Measured ``rho / (n^(-2l-1/2) R_l)``; informational, no pass/fail."""
    rng = np.random.default_rng([seed, 22])
    rows = []
    for i in range(count):
        n = int(rng.integers(n_range[0], n_range[1] + 1))
        V = [int(v) for v in rng.choice(np.arange(1, v_max + 1), size=n, replace=False)]
        r = rho(V)[0]
        rows.append(_row("halasz", " ".join(map(str, V)), r, halasz_ratio(V, l), ok=True))
    return rows


SUITES = {"stanley": stanley_suite, "erdos": erdos_suite, "halasz": halasz_suite}


def run_suites(names, seed=0) -> list:
    rows = []
    for name in names:
        fn = SUITES[name]
        rows.extend(fn() if name == "stanley" else fn(seed=seed))
    return rows


def rows_to_csv(rows) -> str:
    buf = io.StringIO()
    w = csv.DictWriter(buf, fieldnames=FIELDS, lineterminator="\n")
    w.writeheader()
    for r in rows:
        out = dict(r)
        for key in ("rho", "bound", "margin"):
            v = out[key]
            out[key] = fraction_str(v) if isinstance(v, Fraction) else repr(float(v))
        out["ok"] = int(bool(out["ok"]))
        w.writerow(out)
    return buf.getvalue()
