"""Command-line front end.

    polyconvex exponent --f "x1^2+x2^2+1" --set "ball:0,0:1"
    polyconvex certify  --f "(1+x^2)^2" --interval=-1,1 [--N 3]
    polyconvex shift    --f "x+2" --g "1-x^2" --R 1 --epsilon 0.5 --mu 2
    polyconvex minimize --f "x1+2" --set "box:-0.5:0.5" --a0 0
    polyconvex selftest --seed 0

Output is JSON: doubles as 17-significant-digit strings, rationals as
"p/q" strings.
"""
from __future__ import annotations

import argparse
import json
import random
import sys
from fractions import Fraction

import numpy as np

from . import certify, convexify, oracles, proximity, shift
from .parse import ParseError, parse
from .poly import Polynomial
from .sets import Ball, BasicSet, Box, parse_set


def encode(v):
    """JSON-ready copy with lossless number strings."""
    if isinstance(v, bool) or v is None or isinstance(v, str):
        return v
    if isinstance(v, int):
        return v
    if isinstance(v, Fraction):
        return str(v.numerator) if v.denominator == 1 else f"{v.numerator}/{v.denominator}"
    if isinstance(v, (float, np.floating)):
        return format(float(v), ".17g")
    if isinstance(v, np.integer):
        return int(v)
    if isinstance(v, np.bool_):
        return bool(v)
    if isinstance(v, dict):
        return {k: encode(x) for k, x in v.items()}
    if isinstance(v, (list, tuple, np.ndarray)):
        return [encode(x) for x in v]
    return str(v)


def _dump(obj) -> str:
    return json.dumps(encode(obj), sort_keys=True)


def _nvars_of(text: str) -> int:
    import re

    idx = [int(m) for m in re.findall(r"x(\d+)", text)]
    return max(idx) if idx else 1


def _numbers(text: str) -> list:
    return [Fraction(v.strip()) for v in text.split(",") if v.strip()]


def _poly(args, text, nvars=None):
    nvars = nvars or _nvars_of(text)
    return parse(text, nvars, exact=args.mode == "rational")


def cmd_exponent(args, out) -> int:
    dim = None
    if args.set.startswith(("ball:", "box:")):
        dim = len(args.set.split(":")[1].split(","))
    f = _poly(args, args.f, dim)
    X = parse_set(args.set, f.nvars, exact=f.exact)
    xi = _numbers(args.xi) if args.xi else None
    try:
        cert = convexify.convexify_on_compact(f, X, xi=xi, mesh=args.mesh)
    except convexify.PositivityError as exc:
        print(f"error: {exc}", file=sys.stderr)
        return 2
    out.write(_dump(cert.to_dict()) + "\n")
    return 0


def cmd_certify(args, out) -> int:
    f = _poly(args, args.f, 1)
    a, b = _numbers(args.interval)
    if args.N is None:
        ok = certify.is_convex_on_interval(f.to_exact(), a, b, strict=not args.weak)
    else:
        ok = certify.convexified_is_convex(f.to_exact(), args.N, a, b, strict=not args.weak)
    out.write(_dump({"convex": ok, "method": "sturm", "N": args.N}) + "\n")
    return 0


def cmd_shift(args, out) -> int:
    nvars = max([_nvars_of(args.f)] + [_nvars_of(g) for g in args.g.split(";")])
    f = _poly(args, args.f, nvars)
    gs = [_poly(args, g, nvars) for g in args.g.split(";") if g.strip()]
    R = Fraction(args.R)
    eps = Fraction(args.epsilon)
    if args.mu is not None:
        spec = shift.shift_params(f, gs, R, eps, mode="strongly-concave", mu=Fraction(args.mu))
    else:
        spec = shift.shift_params(f, gs, R, eps, mode="lojasiewicz", C=Fraction(args.C), L=int(args.L))
    h = shift.build_shift(spec)
    mesh = args.mesh or 2 * float(R) / (1000 if nvars == 1 else 40)
    X = BasicSet(gs, float(R), check_concave=False)
    report = shift.verify_shift(f, gs, h, eps, X.grid_sample(mesh), Ball(np.zeros(nvars), float(R)).grid_sample(mesh), mesh=mesh)
    out.write(_dump({"spec": spec.to_dict(), "report": report}) + "\n")
    return 0 if all(report["flags"].values()) else 1


def cmd_minimize(args, out) -> int:
    dim = None
    if args.set.startswith(("ball:", "box:")):
        dim = len(args.set.split(":")[1].split(","))
    f = _poly(args, args.f, dim)
    X = parse_set(args.set, f.nvars, exact=f.exact)
    a0 = np.array([float(v) for v in _numbers(args.a0)]) if args.a0 else X.witness()
    cfg = proximity.ProximityConfig(N=args.N, tol_outer=args.tol_outer, tol_inner=args.tol_inner,
                                    max_outer=args.max_iter)
    trace = proximity.iterate(f, X, a0, cfg)
    if args.verify:
        proximity.verify_step_lemmas(trace, grid_mesh=args.mesh or 1e-3)
    for line in trace.to_jsonl().splitlines():
        out.write(_dump(json.loads(line)) + "\n")
    critical = proximity.check_lower_critical(f, X, X.project(trace.a_star), tol=cfg.crit_tol)
    fs = f.to_float()
    summary = {"a_star": trace.a_star, "f_star": fs.evaluate(list(trace.a_star)), "critical": critical,
               "status": trace.status, "iterations": len(trace.steps)}
    out.write(_dump({"summary": summary}) + "\n")
    return 0 if trace.status == "converged" and critical else 1


def selftest(seed: int = 0, cases: int = 20) -> dict:
    """Small randomised invariant suites; returns counts of passes per suite."""
    rng = random.Random(seed)
    results = {}

    ok = 0
    for _ in range(cases):
        deg = rng.randint(1, 6)
        coeffs = [Fraction(rng.randint(-30, 30), 10) for _ in range(deg + 1)]
        if coeffs[-1] == 0:
            coeffs[-1] = Fraction(1)
        p = Polynomial.univariate(coeffs)
        ok += certify.count_real_roots(p, -2, 2) == oracles.sign_scan_roots(p, -2, 2)
    results["sturm_vs_scan"] = (ok, cases)

    ok = 0
    for _ in range(cases):
        n = rng.randint(1, 3)
        terms = {tuple(rng.randint(0, 3) for _ in range(n)): Fraction(rng.randint(-20, 20), 10) for _ in range(4)}
        p = Polynomial(terms, n)
        x = np.array([rng.uniform(-1, 1) for _ in range(n)])
        g = p.gradient_at(x)
        fd = oracles.fd_gradient(p, x)
        ok += bool(np.allclose(g, fd, rtol=1e-6, atol=1e-6))
    results["gradient_vs_fd"] = (ok, cases)

    ok = 0
    for _ in range(max(cases // 4, 1)):
        c = Fraction(rng.randint(1, 8), 4)
        f = Polynomial.univariate([c, Fraction(rng.randint(-4, 4), 4), 1])
        lo = Fraction(rng.randint(-8, 0), 4)
        hi = lo + Fraction(rng.randint(1, 8), 4)
        X = Box([float(lo)], [float(hi)])
        try:
            cert = convexify.convexify_on_compact(f, X)
        except convexify.PositivityError:
            ok += 1
            continue
        ok += bool(cert.certified)
    results["convexify_sturm"] = (ok, max(cases // 4, 1))
    return results


def cmd_selftest(args, out) -> int:
    res = selftest(args.seed)
    passed = all(a == b for a, b in res.values())
    out.write(_dump({"suites": {k: {"passed": a, "total": b} for k, (a, b) in res.items()}, "ok": passed}) + "\n")
    return 0 if passed else 1


def build_parser() -> argparse.ArgumentParser:
    def common(defaults: bool) -> argparse.ArgumentParser:
        # accepted before or after the subcommand
        c = argparse.ArgumentParser(add_help=False)
        d = (lambda v: v) if defaults else (lambda v: argparse.SUPPRESS)
        c.add_argument("--mode", choices=("rational", "double"), default=d("rational"))
        c.add_argument("--out", default=d(None), help="write output here instead of stdout")
        c.add_argument("--seed", type=int, default=d(0))
        c.add_argument("--mesh", type=float, default=d(None))
        return c

    ap = argparse.ArgumentParser(prog="polyconvex", parents=[common(True)],
                                 description="Convexification exponents, shifts and proximal minimisation for polynomials.")
    sub = ap.add_subparsers(dest="command", required=True)
    shared = common(False)

    p = sub.add_parser("exponent", parents=[shared], help="convexification exponent N for f on a set")
    p.add_argument("--f", required=True)
    p.add_argument("--set", required=True)
    p.add_argument("--xi", default=None, help="weight centre, comma separated")
    p.set_defaults(func=cmd_exponent)

    p = sub.add_parser("certify", parents=[shared], help="Sturm convexity certificate on an interval")
    p.add_argument("--f", required=True)
    p.add_argument("--interval", required=True, help="a,b")
    p.add_argument("--N", type=int, default=None, help="certify (1+x^2)^N f instead of f")
    p.add_argument("--weak", action="store_true", help="accept f'' >= 0")
    p.set_defaults(func=cmd_certify)

    p = sub.add_parser("shift", parents=[shared], help="build and verify the shift h")
    p.add_argument("--f", required=True)
    p.add_argument("--g", required=True, help="constraints g1;g2;... meaning g_i >= 0")
    p.add_argument("--R", required=True)
    p.add_argument("--epsilon", required=True)
    p.add_argument("--mu", default=None)
    p.add_argument("--C", default=None)
    p.add_argument("--L", default=None)
    p.set_defaults(func=cmd_shift)

    p = sub.add_parser("minimize", parents=[shared], help="proximal iteration from a0")
    p.add_argument("--f", required=True)
    p.add_argument("--set", required=True)
    p.add_argument("--a0", default=None)
    p.add_argument("--N", type=int, default=6)
    p.add_argument("--tol-outer", type=float, default=1e-8)
    p.add_argument("--tol-inner", type=float, default=1e-10)
    p.add_argument("--max-iter", type=int, default=10_000)
    p.add_argument("--verify", action="store_true", help="attach per-step lemma checks")
    p.set_defaults(func=cmd_minimize)

    p = sub.add_parser("selftest", parents=[shared], help="run randomised invariant suites")
    p.set_defaults(func=cmd_selftest)
    return ap


def main(argv=None) -> int:
    ap = build_parser()
    args = ap.parse_args(argv)
    if args.command == "shift" and args.mu is None and (args.C is None or args.L is None):
        ap.error("shift needs --mu, or both --C and --L")
    out = open(args.out, "w") if args.out else sys.stdout
    try:
        return args.func(args, out)
    except (ParseError, ValueError) as exc:
        print(f"error: {exc}", file=sys.stderr)
        return 2
    finally:
        if args.out:
            out.close()


if __name__ == "__main__":
    sys.exit(main())
