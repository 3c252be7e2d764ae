"""Command-line front end.

Exit codes: 0 success / all checks passed, 1 some verification failed,
2 input or configuration error.
"""

from __future__ import annotations

import argparse
import io
import json
import math
import os
import sys
import tempfile

import numpy as np

from . import __version__
from .beta import BetaParams, beta_ball, beta_cube, scale_profile
from .curvature import BudgetExceeded, CurvatureParams, curvature_exact, curvature_mc, m_p_functional
from .inequalities import (
    MultiscaleParams,
    verify_corollary_lw11,
    verify_lemma1,
    verify_lemma2,
    verify_pointwise_bounds,
)
from .measure import DyadicCube, InputError, dyadic_cubes_touching, load_csv
from .suite import run_suite
from .synth import synthesize

COMMANDS = (
    "info", "beta", "profile", "curvature", "mp",
    "verify-lemma1", "verify-lemma2", "verify-corollary", "verify-bounds", "suite",
)


def jsonable(obj):
    """Plain JSON types; non-finite floats become the strings "inf", "-inf", "nan"."""
    if isinstance(obj, dict):
        return {str(k): jsonable(v) for k, v in obj.items()}
    if isinstance(obj, (list, tuple)):
        return [jsonable(v) for v in obj]
    if isinstance(obj, np.ndarray):
        return jsonable(obj.tolist())
    if isinstance(obj, (bool, np.bool_)):
        return bool(obj)
    if isinstance(obj, (int, np.integer)):
        return int(obj)
    if isinstance(obj, (float, np.floating)):
        v = float(obj)
        if math.isfinite(v):
            return v
        return "nan" if math.isnan(v) else ("inf" if v > 0 else "-inf")
    return obj


def _vector(text: str) -> np.ndarray:
    try:
        return np.array([float(v) for v in text.split(",")])
    except ValueError:
        raise argparse.ArgumentTypeError(f"expected comma-separated numbers, got {text!r}") from None


def _ints(text: str) -> tuple[int, ...]:
    try:
        return tuple(int(v) for v in text.split(","))
    except ValueError:
        raise argparse.ArgumentTypeError(f"expected comma-separated integers, got {text!r}") from None


def _gen_spec(text: str):
    kind, _, rest = text.partition(":")
    params = {}
    for item in filter(None, rest.split(",")):
        key, eq, val = item.partition("=")
        if not eq:
            raise argparse.ArgumentTypeError(f"generator parameter {item!r} is not key=value")
        params[key.strip()] = val.strip() if key.strip() == "base" else float(val)
    return kind, params


def build_parser() -> argparse.ArgumentParser:
    ap = argparse.ArgumentParser(prog="betacurv", description=__doc__.splitlines()[0])
    ap.add_argument("command", choices=COMMANDS)
    src = ap.add_mutually_exclusive_group()
    src.add_argument("--input", help="CSV file with header x0,...,x{n-1}[,w]")
    src.add_argument("--gen", type=_gen_spec, help="generator, e.g. circle:samples=50,radius=1")
    ap.add_argument("--seed", type=int, default=0)
    ap.add_argument("--m", type=int, default=1)
    ap.add_argument("--p", type=float, default=2.0)
    ap.add_argument("--q", type=float, default=None)
    ap.add_argument("--alpha", type=float, default=0.0)
    ap.add_argument("--gamma", type=float, default=None)
    ap.add_argument("--r", type=float, default=None, help="ball radius for beta")
    ap.add_argument("--R", type=float, default=math.inf, help="curvature radius; 'inf' allowed")
    ap.add_argument("--rho", type=float, default=None, help="upper scale; 'inf' allowed")
    ap.add_argument("--center", type=_vector, default=None)
    ap.add_argument("--centred", action="store_true")
    ap.add_argument("--level", type=int, default=None)
    ap.add_argument("--corner", type=_ints, default=None)
    ap.add_argument("--mode", choices=("exact", "mc"), default="exact")
    ap.add_argument("--samples", type=int, default=10000)
    ap.add_argument("--budget", type=int, default=10**8)
    ap.add_argument("--size", choices=("smoke", "full"), default="smoke")
    ap.add_argument("--output", default=None, help="output path (default stdout)")
    ap.add_argument("--format", choices=("json", "csv"), default="json")
    return ap


class ConfigError(InputError):
    pass


def _need(cond, msg):
    if not cond:
        raise ConfigError(msg)


def _load(args):
    if args.input:
        try:
            with open(args.input, encoding="utf-8") as fh:
                return load_csv(fh)
        except OSError as exc:
            raise InputError(f"cannot read {args.input}: {exc}") from None
    if args.gen:
        kind, params = args.gen
        return synthesize(kind, params, args.seed)
    return None


def _params_record(args) -> dict:
    keys = ("input", "gen", "m", "p", "q", "alpha", "gamma", "r", "R", "rho", "center", "centred",
            "level", "corner", "mode", "samples", "budget", "size", "format")
    rec = {k: getattr(args, k) for k in keys}
    if rec["gen"] is not None:
        rec["gen"] = {"kind": rec["gen"][0], "params": rec["gen"][1]}
    return rec


def _cubes(args, mu):
    _need(args.level is not None, "--level is required")
    if args.corner is not None:
        _need(len(args.corner) == mu.ambient_dim, "--corner must have n entries")
        return [DyadicCube(args.level, args.corner)]
    return dyadic_cubes_touching(mu, args.level)


def _centers(args, mu):
    if args.center is not None:
        _need(args.center.shape[0] == mu.ambient_dim, "--center must have n entries")
        return [args.center]
    return list(mu.positions)


def _execute(args):
    """Returns (results list, all_passed flag or None, optional csv text)."""
    cmd = args.command
    if cmd == "verify-bounds":
        _need(args.samples >= 1, "--samples must be positive")
        rep = verify_pointwise_bounds(args.samples, args.seed)
        return [rep.to_dict()], rep.passed, None
    if cmd == "suite":
        agg = run_suite(args.seed, args.size)
        return [agg], agg["failed"] == 0, None

    mu = _load(args)
    _need(mu is not None, "one of --input or --gen is required")
    n, m = mu.ambient_dim, args.m
    if cmd != "info":
        _need(0 < m < n, f"need 0 < m < n (m={m}, n={n})")
        _need(1 <= args.p < math.inf, "--p must lie in [1, inf)")
        _need(0 <= args.alpha <= 1, "--alpha must lie in [0, 1]")

    if cmd == "info":
        lo = mu.positions.min(axis=0) if len(mu) else []
        hi = mu.positions.max(axis=0) if len(mu) else []
        return [{"atoms": len(mu), "ambient_dim": n, "total_mass": mu.total_mass, "bbox_lo": lo, "bbox_hi": hi}], None, None

    if cmd == "beta":
        bp = BetaParams(m, args.p, args.centred)
        if args.level is not None:
            out = []
            for q in _cubes(args, mu):
                val, exact, plane = beta_cube(mu, q, bp)
                out.append({"level": q.level, "corner": list(q.corner), "value": val, "exact": exact,
                            "plane_base": plane.base, "plane_basis": plane.basis})
            return out, None, None
        _need(args.r is not None and args.r > 0, "--r must be positive")
        out = []
        for x in _centers(args, mu):
            val, exact = beta_ball(mu, x, args.r, bp)
            out.append({"center": x, "r": args.r, "value": val, "exact": exact})
        return out, None, None

    if cmd == "profile":
        _need(args.center is not None, "--center is required")
        _need(args.center.shape[0] == n, "--center must have n entries")
        rho = args.rho if args.rho is not None else math.inf
        _need(rho > 0, "--rho must be positive")
        prof = scale_profile(mu, args.center, rho, BetaParams(m, args.p, args.centred))
        rows = [{"r_lo": a, "r_hi": b, "mass": M, "beta_numerator": C} for a, b, M, C in prof.rows()]
        csv_text = None
        if args.format == "csv":
            buf = io.StringIO()
            buf.write("r_lo,r_hi,mass,beta_numerator\n")
            for row in rows:
                buf.write(",".join(repr(float(v)) for v in row.values()) + "\n")
            csv_text = buf.getvalue()
        return [{"center": args.center, "rho": rho, "exact": bool(prof.exact.all()), "intervals": rows}], None, csv_text

    if cmd == "curvature":
        cp = CurvatureParams(m, args.p, args.alpha, args.R)
        out = []
        for x in _centers(args, mu):
            if args.mode == "exact":
                est = curvature_exact(mu, x, cp, args.budget)
            else:
                est = curvature_mc(mu, x, cp, args.samples, args.seed)
            out.append({"center": x, "value": est.value, "stderr": est.stderr,
                        "terms_or_samples": est.terms_or_samples, "method": est.method})
        return out, None, None

    if cmd == "mp":
        return [{"value": m_p_functional(mu, args.p, m, args.budget)}], None, None

    if cmd == "verify-lemma1":
        reps = [verify_lemma1(mu, x, args.R, m, args.p, args.alpha, args.budget) for x in _centers(args, mu)]
        return [r.to_dict() for r in reps], all(r.passed for r in reps), None

    if cmd == "verify-lemma2":
        rho = args.rho if args.rho is not None else 1.0
        q = args.q if args.q is not None else args.p
        gamma = args.gamma if args.gamma is not None else 0.0
        params = MultiscaleParams(m, n, args.p, q, gamma, args.alpha, rho)
        reps = [verify_lemma2(mu, cube, rho, params) for cube in _cubes(args, mu)]
        return [r.to_dict() for r in reps], all(r.passed for r in reps), None

    if cmd == "verify-corollary":
        _need(args.R > 0, "--R must be positive")
        reps = [verify_corollary_lw11(mu, cube, args.R, m, args.p, args.alpha) for cube in _cubes(args, mu)]
        return [r.to_dict() for r in reps], all(r.passed for r in reps), None

    raise ConfigError(f"unknown command {cmd}")


def _write(path, text: str):
    if path is None or path == "-":
        sys.stdout.write(text)
        return
    directory = os.path.dirname(os.path.abspath(path))
    fd, tmp = tempfile.mkstemp(dir=directory, prefix=".betacurv-")
    try:
        with os.fdopen(fd, "w", encoding="utf-8") as fh:
            fh.write(text)
        os.replace(tmp, path)
    except BaseException:
        if os.path.exists(tmp):
            os.unlink(tmp)
        raise


def _error(code: str, message: str) -> int:
    sys.stderr.write(json.dumps({"error": {"code": code, "message": message}}) + "\n")
    return 2


def run(argv=None) -> int:
    parser = build_parser()
    try:
        args = parser.parse_args(argv)
    except SystemExit as exc:
        return 0 if exc.code == 0 else 2
    if args.format == "csv" and args.command != "profile":
        return _error("config", "--format csv is only available for profile")
    try:
        results, passed, csv_text = _execute(args)
    except BudgetExceeded as exc:
        return _error("budget_exceeded", str(exc))
    except ConfigError as exc:
        return _error("config", str(exc))
    except InputError as exc:
        return _error("input", str(exc))
    if csv_text is not None:
        text = csv_text
    else:
        report = {
            "command": args.command,
            "params": _params_record(args),
            "results": results,
            "version": __version__,
            "seed": args.seed,
        }
        if passed is not None:
            report["passed"] = passed
        text = json.dumps(jsonable(report), indent=2, allow_nan=False) + "\n"
    try:
        _write(args.output, text)
    except OSError as exc:
        return _error("output", str(exc))
    return 1 if passed is False else 0


def main():
    sys.exit(run())


if __name__ == "__main__":
    main()
