"""Command-line front end: volumes, sine polars, centroid transforms,
verification suites, and p-sweeps, all emitting plain CSV.

Identical invocations with identical seeds produce identical result
columns; pass --timing to include measured wall times in verification CSV
(off by default so outputs are byte-reproducible).
"""

from __future__ import annotations

import os

# honor the thread cap before numpy is first imported anywhere in the package
_threads = os.environ.get("SINEBODY_THREADS")
if _threads:
    for _var in ("OMP_NUM_THREADS", "OPENBLAS_NUM_THREADS", "MKL_NUM_THREADS",
                 "NUMEXPR_NUM_THREADS"):
        os.environ.setdefault(_var, _threads)

import argparse
import csv
import json
import sys

import numpy as np

from .bodies import BodyValidationError, load_body_file
from .centroid import CentroidPolarBody, cached_volume
from .geometry import unit_ball_volume
from .polarity import cyl_support_batch
from .quadrature import (DEFAULT_RULE_SPECS, DEFAULT_MC_SPEC, integrate_values,
                         parse_rule_spec, volume)
from . import harness

__all__ = ["main"]


def _rule_for(args, dim):
    spec = args.rule or DEFAULT_RULE_SPECS.get(dim, DEFAULT_MC_SPEC)
    return parse_rule_spec(spec, dim)


def _load(path):
    body = load_body_file(path)
    return body


def cmd_volume(args):
    body = _load(args.body)
    rule = _rule_for(args, body.dim)
    v = volume(body, rule)
    print(f"V = {v!r}  (dim={body.dim}, rule={rule.spec}, nodes={len(rule)})")
    return 0


def cmd_sine_polar(args):
    body = _load(args.body)
    rule = _rule_for(args, body.dim)
    c = cyl_support_batch(body, rule.nodes)
    rho = 1.0 / c
    v = unit_ball_volume(body.dim) * integrate_values(rule, rho ** body.dim)
    with open(args.out, "w", newline="") as fh:
        w = csv.writer(fh)
        w.writerow([f"u{i+1}" for i in range(body.dim)] + ["rho_sine_polar"])
        for node, r in zip(rule.nodes, rho):
            w.writerow([repr(float(x)) for x in node] + [repr(float(r))])
        fh.write(f"# volume,{v!r}\n")
    print(f"V(sine polar) = {v!r}  (rule={rule.spec}) -> {args.out}")
    return 0


def cmd_centroid(args):
    body = _load(args.body)
    rule = _rule_for(args, body.dim)
    p = args.p
    lam = CentroidPolarBody(body, p, rule, "sine")
    rho = lam.radial_batch(rule.nodes)
    v_k = cached_volume(body, rule)
    v_l = unit_ball_volume(body.dim) * integrate_values(rule, rho ** body.dim)
    product = v_k * v_l / unit_ball_volume(body.dim) ** 2
    with open(args.out, "w", newline="") as fh:
        w = csv.writer(fh)
        w.writerow([f"u{i+1}" for i in range(body.dim)] + ["rho_polar_centroid"])
        for node, r in zip(rule.nodes, rho):
            w.writerow([repr(float(x)) for x in node] + [repr(float(r))])
        fh.write(f"# volume_product_ratio,{product!r}\n")
    print(f"V(K)V(polar centroid)/w_n^2 = {product!r}  (p={p}, rule={rule.spec}) -> {args.out}")
    return 0


def cmd_sweep(args):
    body = _load(args.body)
    rule = _rule_for(args, body.dim)
    grid = [float(t) for t in args.p_grid.split(",")]
    if any(b <= a for a, b in zip(grid, grid[1:])):
        raise ValueError("p grid must be strictly increasing")
    n = body.dim
    w2 = unit_ball_volume(n) ** 2
    v_k = cached_volume(body, rule)
    c = cyl_support_batch(body, rule.nodes)
    rho_polar = 1.0 / c
    v_sine = unit_ball_volume(n) * integrate_values(rule, rho_polar ** n)
    sine_product = v_k * v_sine / w2
    rows = []
    for p in grid:
        lam = CentroidPolarBody(body, p, rule, "sine")
        rho = lam.radial_batch(rule.nodes)
        v_l = unit_ball_volume(n) * integrate_values(rule, rho ** n)
        gap = float(np.max(np.abs(rho - rho_polar)))
        rows.append([repr(p), repr(v_k), repr(v_l), repr(v_k * v_l / w2),
                     repr(sine_product), repr(gap)])
    with open(args.out, "w", newline="") as fh:
        w = csv.writer(fh)
        w.writerow(["p", "V_K", "V_polar_centroid", "product_ratio",
                    "sine_product_ratio", "max_radial_gap_vs_sine_polar"])
        w.writerows(rows)
    print(f"sweep of {len(grid)} p values -> {args.out} "
          f"(sine product ratio {sine_product!r})")
    return 0


def cmd_verify(args):
    if args.config:
        with open(args.config) as fh:
            config = json.load(fh)
    else:
        config = harness.default_suite_config(args.dim)
    if args.rule:
        config["rule"] = args.rule
    if args.seed is not None:
        config["seed"] = args.seed
    if args.tol is not None:
        config["tol"] = args.tol
    bodies = None
    if args.body:
        bodies = {"K": _load(args.body)}
        if args.body2:
            bodies["L"] = _load(args.body2)
        config["dim"] = next(iter(bodies.values())).dim
        if args.config is None:
            # custom bodies: drop the zoo-specific check list default
            config["checks"] = ["lp_sine_bs", "sine_bs", "fubini", "iterated",
                                "sup_bracket", "double_integral"]
    reports = harness.run_suite(config, bodies=bodies)
    harness.write_csv(reports, args.out, timing=args.timing)
    failed = [r for r in reports if not r.passed]
    for r in reports:
        status = "PASS" if r.passed else "FAIL"
        extra = f"  [{r.note}]" if r.note else ""
        print(f"{status} {r.name} K={r.body_k} L={r.body_l} p={r.p} "
              f"ratio={r.ratio:.9g} tol={r.tol:.3g}{extra}")
    print(f"{len(reports) - len(failed)}/{len(reports)} checks passed -> {args.out}")
    return 0 if not failed else 1


def build_parser():
    ap = argparse.ArgumentParser(
        prog="sinebody",
        description="volumes, sine polar bodies, centroid transforms and "
                    "inequality verification for origin-symmetric bodies")
    sub = ap.add_subparsers(dest="command", required=True)

    common = argparse.ArgumentParser(add_help=False)
    common.add_argument("--rule", help="rule spec: uniform:N | gauss:N[xM] | mc:N:seed")
    common.add_argument("--seed", type=int, default=None)
    common.add_argument("--tol", type=float, default=None, help="tolerance override")

    p = sub.add_parser("volume", parents=[common], help="volume of a body")
    p.add_argument("--body", required=True, help="body descriptor JSON file")
    p.set_defaults(fn=cmd_volume)

    p = sub.add_parser("sine-polar", parents=[common],
                       help="radial table and volume of the sine polar body")
    p.add_argument("--body", required=True)
    p.add_argument("--out", required=True)
    p.set_defaults(fn=cmd_sine_polar)

    p = sub.add_parser("centroid", parents=[common],
                       help="radial table of the polar sine centroid body")
    p.add_argument("--body", required=True)
    p.add_argument("--p", type=float, required=True)
    p.add_argument("--out", required=True)
    p.set_defaults(fn=cmd_centroid)

    p = sub.add_parser("sweep", parents=[common],
                       help="volume products along a grid of exponents")
    p.add_argument("--body", required=True)
    p.add_argument("--p-grid", required=True, help="comma-separated increasing p values")
    p.add_argument("--out", required=True)
    p.set_defaults(fn=cmd_sweep)

    p = sub.add_parser("verify", parents=[common], help="run a verification suite")
    p.add_argument("--config", help="suite config JSON (default: built-in suite)")
    p.add_argument("--dim", type=int, default=3)
    p.add_argument("--body", help="check this body instead of the standard zoo")
    p.add_argument("--body2", help="second body for the two-body checks")
    p.add_argument("--out", required=True)
    p.add_argument("--timing", action="store_true",
                   help="include measured wall times in the CSV")
    p.set_defaults(fn=cmd_verify)
    return ap


def main(argv=None) -> int:
    args = build_parser().parse_args(argv)
    try:
        return args.fn(args)
    except BodyValidationError as exc:
        print(f"descriptor error: {exc}", file=sys.stderr)
        return 2
    except (ValueError, OSError) as exc:
        print(f"error: {exc}", file=sys.stderr)
        return 2


if __name__ == "__main__":
    sys.exit(main())
