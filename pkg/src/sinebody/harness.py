"""Named, reproducible verification experiments for the volume-product
inequalities, producing VerificationReports and CSV output.

Every check reports a ratio oriented so that pass means ratio <= 1 + tol;
violations are reported, never clipped, because each inequality holds
unconditionally and a violation therefore indicates an implementation bug.
Tolerances come in two deterministic tiers (1e-6 for smooth bodies, 1e-3
when a non-smooth body participates) plus a 3-sigma tier for Monte Carlo
estimates.
"""

from __future__ import annotations

import csv
import math
import time
from dataclasses import dataclass

import numpy as np

from .bodies import Ball, Body, Box, CylinderSet, Ellipsoid, scan_rule
from .centroid import (CentroidPolarBody, cached_volume,
                       fubini_symmetry_gap, iterated_polar_volume_check)
from .geometry import random_orthogonal, unit_ball_volume
from .polarity import cyl_support_batch, sine_polar_volume
from .quadrature import SphericalRule, integrate_values, parse_rule_spec, volume
from . import sphere_opt

__all__ = [
    "VerificationReport",
    "verify_lp_sine_bs",
    "verify_sine_bs",
    "verify_polar_dominates_diamond",
    "verify_double_integral_ineq",
    "verify_spherical_function_ineq",
    "verify_sup_bracket_ineq",
    "run_suite",
    "default_suite_config",
    "standard_zoo",
    "write_csv",
    "CSV_COLUMNS",
    "SamplerError",
]

EQUALITY_TOL = 1e-4
SMOOTH_TOL = 1e-6
NONSMOOTH_TOL = 1e-3

CSV_COLUMNS = ["name", "n", "p", "body_K", "body_L", "rule", "seed",
               "lhs", "rhs", "ratio", "tol", "pass", "equality_flag", "wall_ms"]


class SamplerError(RuntimeError):
    pass


@dataclass
class VerificationReport:
    name: str
    n: int
    p: float | None
    body_k: str
    body_l: str
    rule: str
    seed: int | None
    lhs: float
    rhs: float
    ratio: float
    tol: float
    passed: bool
    equality: bool
    wall_ms: float
    note: str = ""

    def row(self):
        return [self.name, self.n,
                "" if self.p is None else repr(float(self.p)),
                self.body_k, self.body_l, self.rule,
                "" if self.seed is None else self.seed,
                repr(self.lhs), repr(self.rhs), repr(self.ratio), repr(self.tol),
                int(self.passed), int(self.equality), f"{self.wall_ms:.1f}"]


def write_csv(reports, path, timing: bool = True):
    """Write the fixed-column CSV.  With timing=False the wall_ms column is
    written as 0 so that repeated identical invocations are byte-identical."""
    with open(path, "w", newline="") as fh:
        w = csv.writer(fh)
        w.writerow(CSV_COLUMNS)
        for r in reports:
            row = r.row()
            if not timing:
                row[-1] = "0"
            w.writerow(row)


def body_label(body: Body) -> str:
    if isinstance(body, Ball):
        return f"ball(r={body.radius:g})"
    if isinstance(body, Ellipsoid):
        return "ellipsoid(" + ",".join(f"{a:g}" for a in body.semiaxes) + ")"
    if isinstance(body, Box):
        return "box(" + ",".join(f"{w:g}" for w in body.half_widths) + ")"
    if isinstance(body, CylinderSet):
        return f"cylinders(k={len(body.radii)})"
    return getattr(body, "kind", type(body).__name__)


def default_tolerance(rule: SphericalRule, *bodies) -> float:
    if rule.kind == "mc":
        return NONSMOOTH_TOL
    if any(not b.is_smooth for b in bodies):
        return NONSMOOTH_TOL
    return SMOOTH_TOL


def _report(name, rule, bodies, p, seed, lhs, rhs, ratio, tol, t0, note="") -> VerificationReport:
    finite = math.isfinite(ratio)
    passed = finite and ratio <= 1.0 + tol
    equality = finite and abs(ratio - 1.0) <= EQUALITY_TOL
    labels = [body_label(b) if isinstance(b, Body) else str(b) for b in bodies]
    labels += [""] * (2 - len(labels))
    return VerificationReport(
        name=name, n=rule.dim, p=p, body_k=labels[0], body_l=labels[1],
        rule=rule.spec, seed=seed, lhs=lhs, rhs=rhs, ratio=ratio, tol=tol,
        passed=passed, equality=equality, wall_ms=(time.perf_counter() - t0) * 1e3,
        note=note)


def _outer_rule(rule: SphericalRule, rotate_seed) -> SphericalRule:
    if rotate_seed is None:
        return rule
    rng = np.random.Generator(np.random.Philox(rotate_seed))
    return rule.rotated(random_orthogonal(rule.dim, rng), label=f"rot{rotate_seed}")


def verify_lp_sine_bs(body: Body, p: float, rule: SphericalRule, tol: float | None = None,
                      rotate_seed: int | None = 7) -> VerificationReport:
    """Volume product of a body with its polar sine centroid body vs the
    squared ball volume.

    The polar transform body is integrated on a rotated copy of the rule so
    that the evaluation directions do not coincide with the transform's own
    nodes, which would otherwise concentrate the p = 1 kink error.
    """
    t0 = time.perf_counter()
    n = body.dim
    lam = CentroidPolarBody(body, p, rule, "sine")
    v_k = cached_volume(body, rule)
    v_lam = volume(lam, _outer_rule(rule, rotate_seed))
    lhs = v_k * v_lam
    rhs = unit_ball_volume(n) ** 2
    tol = default_tolerance(rule, body) if tol is None else tol
    return _report("lp_sine_blaschke_santalo", rule, [body], p, rotate_seed,
                   lhs, rhs, lhs / rhs, tol, t0)


def verify_sine_bs(body: Body, rule: SphericalRule, tol: float | None = None,
                   settings: sphere_opt.OptimizerSettings | None = None) -> VerificationReport:
    """Volume product of a body with its sine polar body vs the squared ball volume."""
    t0 = time.perf_counter()
    lhs = cached_volume(body, rule) * sine_polar_volume(body, rule, settings)
    rhs = unit_ball_volume(body.dim) ** 2
    tol = default_tolerance(rule, body) if tol is None else tol
    return _report("sine_blaschke_santalo", rule, [body], None, None,
                   lhs, rhs, lhs / rhs, tol, t0)


def verify_polar_dominates_diamond(body: Body, rule: SphericalRule,
                                   tol: float | None = None) -> VerificationReport:
    """V(sine polar) <= V(classical polar) for cylinder-intersection bodies."""
    if not isinstance(body, (CylinderSet, Ball)):
        raise ValueError("check applies to cylinder-intersection bodies")
    t0 = time.perf_counter()
    n = body.dim
    lhs = sine_polar_volume(body, rule)
    h = body.support_batch(rule.nodes)
    rhs = unit_ball_volume(n) * integrate_values(rule, h ** (-float(n)))
    tol = SMOOTH_TOL if tol is None else tol
    return _report("polar_dominates_diamond", rule, [body], None, None,
                   lhs, rhs, lhs / rhs, tol, t0)


def _bounding_radius(body: Body) -> float:
    nodes = scan_rule(body.dim).nodes
    return float(np.max(body.radial_batch(nodes))) * 1.01


def _sample_body(body: Body, m: int, rng, bound: float):
    """Uniform samples in the body by rejection from its bounding ball."""
    n = body.dim
    out = np.empty((m, n))
    got = 0
    drawn = 0
    while got < m:
        k = max(4 * (m - got), 1024)
        dirs = rng.normal(size=(k, n))
        dirs /= np.linalg.norm(dirs, axis=1)[:, None]
        radii = bound * rng.random(k) ** (1.0 / n)
        keep = radii <= body.radial_batch(dirs)
        drawn += k
        take = min(int(keep.sum()), m - got)
        out[got:got + take] = dirs[keep][:take] * radii[keep][:take, None]
        got += take
        if drawn > 64 and got / drawn < 1e-3:
            raise SamplerError(
                f"rejection sampler acceptance rate {got/drawn:.2e} < 1e-3")
    return out


def verify_double_integral_ineq(body_k: Body, body_l: Body, p: float,
                                mc_samples: int, seed: int,
                                rule: SphericalRule) -> VerificationReport:
    """Monte Carlo check of the double-integral bracket inequality.

    lhs = integral over K x L of [x, y]^p, estimated with mc_samples pairs;
    rhs is the sharp constant times [V(K) V(L)]^((n+p)/n).  Pass means
    lhs >= rhs - 3 stderr.
    """
    if mc_samples < 10_000:
        raise ValueError("mc_samples must be >= 1e4")
    t0 = time.perf_counter()
    n = body_k.dim
    w = unit_ball_volume
    rng = np.random.Generator(np.random.Philox(seed))
    xs = _sample_body(body_k, mc_samples, rng, _bounding_radius(body_k))
    ys = _sample_body(body_l, mc_samples, rng, _bounding_radius(body_l))
    g = (np.einsum("ij,ij->i", xs, xs) * np.einsum("ij,ij->i", ys, ys)
         - np.einsum("ij,ij->i", xs, ys) ** 2)
    g = np.clip(g, 0.0, None) ** (p / 2.0)
    v_k = cached_volume(body_k, rule)
    v_l = cached_volume(body_l, rule)
    lhs = v_k * v_l * float(g.mean())
    stderr = v_k * v_l * float(g.std(ddof=1)) / math.sqrt(mc_samples)
    const = (n * (n - 1) * w(n - 1) * w(n + p - 2)
             / ((n + p) ** 2 * w(n + p - 3) * w(n) ** (1.0 + 2.0 * p / n)))
    rhs = const * (v_k * v_l) ** ((n + p) / n)
    # oriented ratio: pass iff lhs >= rhs - 3 sigma
    tol = 3.0 * stderr / lhs if lhs > 0 else math.inf
    ratio = rhs / lhs if lhs > 0 else math.inf
    rep = _report("double_integral_lower_bound", rule, [body_k, body_l], p, seed,
                  lhs, rhs, ratio, tol, t0, note=f"stderr={stderr:.3e}")
    rep.equality = abs(lhs - rhs) <= 3.0 * stderr
    return rep


def verify_spherical_function_ineq(f, g, p: float, rule: SphericalRule,
                                   tol: float | None = None,
                                   labels=("f", "g")) -> VerificationReport:
    """Double spherical integral of [u,v]^p f(u) g(v) vs the sharp quasi-norm bound.

    f, g are nonnegative functions of a unit vector or per-node value arrays.
    """
    t0 = time.perf_counter()
    n = rule.dim
    w = unit_ball_volume

    def node_values(h):
        if callable(h):
            return np.fromiter((h(u) for u in rule.nodes), dtype=float, count=len(rule))
        return np.asarray(h, dtype=float)

    fv = node_values(f)
    gv = node_values(g)
    if np.min(fv) < 0 or np.min(gv) < 0:
        raise ValueError("f and g must be nonnegative")
    lhs = 0.0
    wf = rule.weights * fv
    wg = rule.weights * gv
    for i0 in range(0, len(rule), 1024):
        D = rule.nodes[i0:i0 + 1024] @ rule.nodes.T
        B = np.clip(1.0 - D * D, 0.0, None) ** (p / 2.0)
        lhs += float(wf[i0:i0 + 1024] @ (B @ wg))
    q = n / (n + p)
    norm_f = float(integrate_values(rule, fv ** q)) ** (1.0 / q)
    norm_g = float(integrate_values(rule, gv ** q)) ** (1.0 / q)
    const = (n - 1) * w(n - 1) * w(n + p - 2) / (n * w(n) * w(n + p - 3))
    rhs = const * norm_f * norm_g
    tol = SMOOTH_TOL if tol is None else tol
    if rhs == 0.0 and lhs == 0.0:
        ratio = 1.0
    else:
        ratio = rhs / lhs if lhs > 0 else math.inf
    return _report("spherical_function_lower_bound", rule, list(labels), p, None,
                   lhs, rhs, ratio, tol, t0)


def verify_sup_bracket_ineq(body_k: Body, body_l: Body, rule: SphericalRule,
                            tol: float | None = None) -> VerificationReport:
    """sup of [x, y] over K x L vs the volume-based lower bound.

    The sup is max over u of rho_K(u) * cyl_support(L, u): coarse max over
    the rule nodes, then local refinement on the sphere.
    """
    t0 = time.perf_counter()
    n = body_k.dim
    rho_k = body_k.radial_batch(rule.nodes)
    c_l = cyl_support_batch(body_l, rule.nodes)
    vals = rho_k * c_l
    i = int(np.argmax(vals))

    def objective(X, V):
        return body_k.radial_batch(V) * cyl_support_batch(body_l, V)

    v0 = rule.nodes[[i]]
    f, _ = sphere_opt.refine_on_sphere(v0, v0, vals[[i]], objective)
    lhs = float(f[0])
    rhs = unit_ball_volume(n) ** (-2.0 / n) * (
        cached_volume(body_k, rule) * cached_volume(body_l, rule)) ** (1.0 / n)
    tol = default_tolerance(rule, body_k, body_l) if tol is None else tol
    return _report("sup_bracket_lower_bound", rule, [body_k, body_l], None, None,
                   lhs, rhs, rhs / lhs, tol, t0)


# ---------------------------------------------------------------------------
# suite driver


def standard_zoo(dim: int) -> dict[str, Body]:
    if dim == 2:
        return {
            "ball": Ball(2, 1.0),
            "ellipse": Ellipsoid([1.0, 2.0]),
            "box": Box([1.0, 1.0]),
        }
    if dim == 3:
        e = np.eye(3)
        return {
            "ball": Ball(3, 1.0),
            "spheroid": Ellipsoid([1.0, 1.0, 2.0]),
            "box": Box([1.0, 1.0, 1.0]),
            "bicylinder": CylinderSet([e[0], e[1]], [1.0, 1.0]),
            "tricylinder": CylinderSet([e[0], e[1], e[2]], [1.0, 1.0, 1.0]),
        }
    raise ValueError("standard zoo is defined for dimensions 2 and 3")


def default_suite_config(dim: int = 3) -> dict:
    return {
        "dim": dim,
        "rule": "gauss:48" if dim == 3 else "uniform:4096",
        "seed": 42,
        "p_grid": [1.0, 2.0, 4.0],
        "bodies": list(standard_zoo(dim)),
        "checks": ["lp_sine_bs", "sine_bs", "polar_dominates", "fubini",
                   "iterated", "sup_bracket", "double_integral",
                   "spherical_function", "refinement"],
        "mc_samples": 100000,
    }


def _error_report(name, rule, bodies, p, exc) -> VerificationReport:
    labels = [body_label(b) if isinstance(b, Body) else str(b) for b in bodies]
    labels += [""] * (2 - len(labels))
    return VerificationReport(
        name=name, n=rule.dim, p=p, body_k=labels[0], body_l=labels[1],
        rule=rule.spec, seed=None, lhs=math.nan, rhs=math.nan, ratio=math.nan,
        tol=0.0, passed=False, equality=False, wall_ms=0.0,
        note=f"error: {exc}")


def run_suite(config: dict, bodies: dict[str, Body] | None = None) -> list[VerificationReport]:
    """Execute the declared checks over the body zoo; child failures become
    failed reports and the suite continues.

    `bodies` replaces the standard zoo with explicit name -> Body entries
    (used by the CLI's --body/--body2 flags).
    """
    dim = int(config.get("dim", 3))
    rule = parse_rule_spec(config.get("rule", default_suite_config(dim)["rule"]), dim)
    seed = int(config.get("seed", 42))
    p_grid = [float(p) for p in config.get("p_grid", [1.0, 2.0, 4.0])]
    if any(b <= a for a, b in zip(p_grid, p_grid[1:])):
        raise ValueError("p_grid must be strictly increasing")
    if bodies is None:
        zoo = standard_zoo(dim)
        bodies = {name: zoo[name] for name in config.get("bodies", list(zoo))}
    checks = config.get("checks", default_suite_config(dim)["checks"])
    mc_samples = int(config.get("mc_samples", 100000))
    tol = config.get("tol")
    tol = None if tol is None else float(tol)
    reports: list[VerificationReport] = []

    def guarded(fn, name, blist, p, *args, **kw):
        try:
            reports.append(fn(*args, **kw))
        except Exception as exc:  # noqa: BLE001 - aggregate and continue
            reports.append(_error_report(name, rule, blist, p, exc))

    names = list(bodies)
    blist = list(bodies.values())
    for check in checks:
        if check == "lp_sine_bs":
            for b in blist:
                for p in p_grid:
                    guarded(verify_lp_sine_bs, "lp_sine_blaschke_santalo", [b], p,
                            b, p, rule, tol)
        elif check == "sine_bs":
            for b in blist:
                guarded(verify_sine_bs, "sine_blaschke_santalo", [b], None, b, rule, tol)
        elif check == "polar_dominates":
            for b in blist:
                if isinstance(b, CylinderSet):
                    guarded(verify_polar_dominates_diamond, "polar_dominates_diamond",
                            [b], None, b, rule)
        elif check == "fubini":
            for b in blist[1:]:
                for p in p_grid[:1]:
                    def fub(K, L, p, rule):
                        t0 = time.perf_counter()
                        gap = fubini_symmetry_gap(K, L, p, rule)
                        tol = default_tolerance(rule, K, L)
                        return _report("fubini_symmetry", rule, [K, L], p, None,
                                       gap, tol, gap / tol, 0.0, t0)
                    guarded(fub, "fubini_symmetry", [blist[0], b], p,
                            blist[0], b, p, rule)
        elif check == "iterated":
            for b in blist:
                for p in p_grid:
                    def it(K, p, rule):
                        t0 = time.perf_counter()
                        v2, v1 = iterated_polar_volume_check(K, p, rule)
                        tol = default_tolerance(rule, K)
                        return _report("iterated_polar_growth", rule, [K], p, None,
                                       v1, v2, v1 / v2, tol, t0)
                    guarded(it, "iterated_polar_growth", [b], p, b, p, rule)
        elif check == "sup_bracket":
            for b in blist:
                guarded(verify_sup_bracket_ineq, "sup_bracket_lower_bound",
                        [blist[0], b], None, blist[0], b, rule)
        elif check == "double_integral":
            pairs = [(blist[0], blist[0])]
            if len(blist) > 1:
                pairs.append((blist[0], blist[1]))
            for K, L in pairs:
                guarded(verify_double_integral_ineq, "double_integral_lower_bound",
                        [K, L], p_grid[0], K, L, p_grid[0], mc_samples, seed, rule)
        elif check == "spherical_function":
            p = p_grid[min(1, len(p_grid) - 1)]
            ones = np.ones(len(rule))
            guarded(verify_spherical_function_ineq, "spherical_function_lower_bound",
                    ["const", "const"], p, ones, ones, p, rule,
                    None, ("const", "const"))
            if len(blist) > 1:
                rho = blist[1].radial_batch(rule.nodes) ** (dim + p)
                guarded(verify_spherical_function_ineq, "spherical_function_lower_bound",
                        [names[1], names[1]], p, rho, rho, p, rule,
                        None, (names[1] + "^(n+p)", names[1] + "^(n+p)"))
        elif check == "refinement":
            guarded(_refinement_report, "refinement_monotone", ["suite"], None,
                    rule, dim)
        else:
            reports.append(_error_report(check, rule, ["config"], None,
                                         ValueError(f"unknown check {check!r}")))
    return reports


def _double_resolution(rule: SphericalRule) -> SphericalRule:
    kind, rest = rule.spec.split(":", 1)
    if kind == "uniform":
        return parse_rule_spec(f"uniform:{2 * int(rest)}", 2)
    if kind == "gauss":
        a = rest.split("x")[0]
        return parse_rule_spec(f"gauss:{2 * int(a)}", 3)
    n, seed = rest.split(":")
    return parse_rule_spec(f"mc:{2 * int(n)}:{seed}", rule.dim)


def _refinement_report(rule: SphericalRule, dim: int) -> VerificationReport:
    """Quadrature error of a deterministic check must shrink when the rule
    resolution doubles; measured on the ball's volume product at p = 1
    (non-rotated, so the error is the deterministic kink error)."""
    t0 = time.perf_counter()
    fine = _double_resolution(rule)
    b = Ball(dim, 1.0)
    errs = []
    for r in (rule, fine):
        rep = verify_lp_sine_bs(b, 1.0, r, rotate_seed=None)
        errs.append(abs(rep.ratio - 1.0))
    coarse_err, fine_err = errs
    ratio = fine_err / coarse_err if coarse_err > 0 else 0.0
    return _report("refinement_monotone", rule, ["ball"], 1.0, None,
                   fine_err, coarse_err, ratio, 0.0, t0,
                   note=f"fine rule {fine.spec}")
