"""Command-line front end.

Exit codes: 0 success, 1 property violation found, 2 usage or parse error,
3 budget or Monte-Carlo noise.  Errors are written to stderr as one JSON object.
"""
from __future__ import annotations

import argparse
import json
import sys
from fractions import Fraction

import jsonschema
import numpy as np

from . import __version__
from .config import DEFAULT, ExperimentConfig
from .errors import BudgetExceeded, HypothesisViolated, LolabError, MCTooNoisy, NoWindow, PreconditionFailed
from .schema import validate

EXIT_OK, EXIT_VIOLATION, EXIT_USAGE, EXIT_BUDGET = 0, 1, 2, 3


class UsageError(Exception):
    pass


def _load_json(path):
    with open(path) as fh:
        return json.load(fh)


def _emit(obj, output=None):
    text = json.dumps(obj, indent=2, sort_keys=True, default=str) + "\n"
    if output:
        with open(output, "w") as fh:
            fh.write(text)
    sys.stdout.write(text)


def _stamp(obj, constants=DEFAULT):
    obj.setdefault("version", __version__)
    obj.setdefault("constants", constants.to_json())
    return obj


def _instance(path):
    obj = _load_json(path)
    validate(obj, "instance")
    from .walks import distribution_from_json

    return obj, *distribution_from_json(obj)


# --------------------------------------------------------------------------
# subcommands


def cmd_rho(args):
    from .walks import exact_distribution, fraction_str, rho

    _, V, eta = _instance(args.instance)
    r, at = rho(V, eta)
    out = {"n": V.n, "rho": fraction_str(r), "rho_decimal": float(r), "argmax": at}
    if args.distribution:
        dist = exact_distribution(V, eta)
        out["distribution"] = {str(x): fraction_str(q) for x, q in dist.support.items()}
    else:
        lo, hi = min(V.values), max(V.values)
        out["summary"] = {"min_step": lo, "max_step": hi, "sum_abs": sum(abs(v) for v in V.values)}
    _emit(_stamp(out), args.output)
    return EXIT_OK


def cmd_bound(args):
    from .char_bounds import char_bound
    from .gap import embedding_prime
    from .walks import fraction_str, rho_mod

    _, V, eta = _instance(args.instance)
    if eta.label != "bernoulli":
        raise UsageError("the Fourier bound is stated for Bernoulli steps")
    p = args.p or embedding_prime(V.values, compact=True)
    V_p = [v % p for v in V.values]
    r = rho_mod(V_p, p, eta)
    prod, expo = char_bound(V_p, p)
    slack = DEFAULT.slack
    ok = float(r) <= prod * (1 + slack) and prod <= expo * (1 + slack)
    _emit(_stamp({"n": V.n, "p": p, "rho_mod_p": fraction_str(r), "product_bound": prod, "exp_bound": expo,
                  "dominance_ok": ok}), args.output)
    return EXIT_OK if ok else EXIT_VIOLATION


def cmd_invert(args):
    from .inverse import invert, invert_budget, verify_report

    obj, V, eta = _instance(args.instance)
    if eta.label != "bernoulli":
        raise UsageError("invert expects Bernoulli steps")
    rho = Fraction(obj["rho"]) if "rho" in obj else None
    if args.n_prime is not None:
        rep = invert_budget(V.values, args.n_prime, C=args.C, rho=rho)
    else:
        eps = Fraction(args.epsilon if args.epsilon is not None else str(DEFAULT.epsilon)).limit_denominator(10**6)
        rep = invert(V.values, eps, C=args.C, rho=rho)
    out = rep.to_json()
    certs = verify_report(rep)
    out["certificates"] = {c.name: {"ok": c.ok, "detail": c.detail} for c in certs}
    _emit(out, args.output)
    return EXIT_VIOLATION if any(c.ok is False for c in certs) else EXIT_OK


def cmd_smallball(args):
    from .continuous import RealEta, VectorMultiset, continuous_invert, small_ball_bound, small_ball_mc

    obj = _load_json(args.instance)
    validate(obj, "smallball")
    V = VectorMultiset.normalized(np.array(obj["vectors"], dtype=float))
    z = RealEta.from_json(obj.get("z", {"kind": "bernoulli"}))
    seed, trials, beta = obj["seed"], obj.get("trials", 100_000), obj["beta"]
    est = small_ball_mc(V, beta, z, trials, seed=seed)
    out = {"n": V.n, "d": V.d, "beta": beta, "seed": seed, "estimate": est.to_json()}
    code = EXIT_OK
    if args.bound:
        b = small_ball_bound(V, beta, z, seed=seed)
        ok = b.high >= est.low
        out["bound"] = {"value": b.value, "se": b.se, "dominates_estimate": ok}
        code = EXIT_OK if ok else EXIT_VIOLATION
    if args.invert:
        n_prime = obj.get("n_prime", V.n)
        rep = continuous_invert(V, beta, z, n_prime, obj.get("C", 2.0), seed=seed, trials=trials, rho_estimate=est)
        out["inverse"] = rep.to_json()
        if not rep.ok:
            code = EXIT_VIOLATION
    _emit(_stamp(out), args.output)
    return code


def cmd_verify_forward(args):
    from .forward import rows_to_csv, run_suites

    cfg = ExperimentConfig.from_dict(_load_json(args.config))
    rows = run_suites(cfg.suites, seed=cfg.seed)
    text = rows_to_csv(rows)
    path = args.csv or cfg.output
    if path:
        with open(path, "w") as fh:
            fh.write(text)
    failed = [r for r in rows if not r["ok"]]
    summary = {}
    for r in rows:
        s = summary.setdefault(r["suite"], {"instances": 0, "failures": 0})
        s["instances"] += 1
        s["failures"] += 0 if r["ok"] else 1
    _emit(_stamp({"name": cfg.name, "suites": summary, "csv": path}, cfg.constants))
    return EXIT_VIOLATION if failed else EXIT_OK


def cmd_net_count(args):
    from .continuous import net_count

    nc = net_count(args.n, Fraction(args.beta), Fraction(args.rho), Fraction(args.epsilon))
    _emit(_stamp(nc.to_json()), args.output)
    return EXIT_OK


def cmd_calibrate(args):
    from .calibration import calibrate
    from .corpus import CALIBRATION_SEEDS

    seeds = CALIBRATION_SEEDS
    if args.config:
        cfg = ExperimentConfig.from_dict(_load_json(args.config))
        seeds = range(cfg.seed, cfg.seed + cfg.instances)
    cal = calibrate(seeds)
    if args.output:
        with open(args.output, "w") as fh:
            json.dump(cal, fh, indent=2, sort_keys=True)
            fh.write("\n")
    _emit(_stamp({"calibration": cal}))
    return EXIT_OK


# --------------------------------------------------------------------------


def build_parser():
    ap = argparse.ArgumentParser(prog="lolab", description="Littlewood-Offord toolkit")
    ap.add_argument("--version", action="version", version=__version__)
    sub = ap.add_subparsers(dest="command", required=True)

    p = sub.add_parser("rho", help="exact concentration probability")
    p.add_argument("instance")
    p.add_argument("--distribution", action="store_true", help="emit the full law")
    p.add_argument("--output")
    p.set_defaults(fn=cmd_rho)

    p = sub.add_parser("bound", help="Fourier upper bound on rho mod p")
    p.add_argument("instance")
    p.add_argument("--p", type=int)
    p.add_argument("--output")
    p.set_defaults(fn=cmd_bound)

    p = sub.add_parser("invert", help="inverse structure report")
    p.add_argument("instance")
    g = p.add_mutually_exclusive_group()
    g.add_argument("--epsilon", type=str)
    g.add_argument("--n-prime", type=int)
    p.add_argument("--C", type=float, default=2.0)
    p.add_argument("--output")
    p.set_defaults(fn=cmd_invert)

    p = sub.add_parser("smallball", help="continuous small-ball estimate")
    p.add_argument("instance")
    p.add_argument("--bound", action="store_true")
    p.add_argument("--invert", action="store_true")
    p.add_argument("--output")
    p.set_defaults(fn=cmd_smallball)

    p = sub.add_parser("verify-forward", help="forward-theorem suites")
    p.add_argument("config")
    p.add_argument("--csv")
    p.set_defaults(fn=cmd_verify_forward)

    p = sub.add_parser("net-count", help="exact beta-net counts")
    p.add_argument("--n", type=int, required=True)
    p.add_argument("--beta", required=True)
    p.add_argument("--rho", required=True)
    p.add_argument("--epsilon", required=True)
    p.add_argument("--output")
    p.set_defaults(fn=cmd_net_count)

    p = sub.add_parser("calibrate", help="re-measure the pinned constants")
    p.add_argument("config", nargs="?")
    p.add_argument("--output")
    p.set_defaults(fn=cmd_calibrate)
    return ap


def _fail(code, exc, stage=None):
    err = {"error": type(exc).__name__, "message": getattr(exc, "message", None) or str(exc), "exit_code": code}
    stage = stage or getattr(exc, "stage", None)
    if stage:
        err["stage"] = stage
    if isinstance(exc, BudgetExceeded) and exc.projected is not None:
        err["projected"] = str(exc.projected)
    sys.stderr.write(json.dumps(err, sort_keys=True) + "\n")
    return code


def main(argv=None):
    args = build_parser().parse_args(argv)
    try:
        return args.fn(args)
    except (BudgetExceeded, MCTooNoisy) as exc:
        return _fail(EXIT_BUDGET, exc)
    except (PreconditionFailed, HypothesisViolated, NoWindow) as exc:
        return _fail(EXIT_USAGE, exc)
    except LolabError as exc:
        return _fail(EXIT_VIOLATION, exc)
    except (UsageError, json.JSONDecodeError, jsonschema.ValidationError, OSError, ValueError, KeyError,
            ZeroDivisionError) as exc:
        return _fail(EXIT_USAGE, exc, "parse")


if __name__ == "__main__":
    sys.exit(main())
