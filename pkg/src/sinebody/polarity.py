"""Sine polarity: cylindrical support functions, sine polar bodies, and
cylindrical hulls.

The sine polar body of K collects the points whose sine bracket against
every point of K is at most 1; it is an intersection of solid cylinders.
Its radial function is the reciprocal of the cylindrical support function

    cyl_support(K, x) = max over y in K of [x, y],

the minimal base radius of a solid cylinder with axis through x containing
K.  The reciprocal-radial form is used for every bounded star-shaped input,
not only for bodies that are themselves cylinder intersections: it is the
gauge of the limiting polar centroid body.  Closed forms exist for balls,
ellipsoids and their linear images (top singular value of the projected
matrix), for boxes (vertex enumeration), and in the plane for any convex
body with a support evaluator (quarter-turned support); everything else
goes through the sphere maximizer.
"""

from __future__ import annotations

import numpy as np

from . import sphere_opt
from .bodies import Body, Box, CylinderSet, scan_rule, _unit_rows
from .geometry import QUARTER_TURN_2D, bracket_rows, unit_ball_volume
from .quadrature import SphericalRule, integrate_values

__all__ = [
    "cyl_support",
    "cyl_support_batch",
    "sine_polar",
    "cylindrical_hull",
    "sine_polar_volume",
    "supporting_cylinder",
    "supporting_cylinder_set",
    "cyl_gauss_image",
    "SinePolarBody",
]


def _check_not_degenerate(body: Body):
    # bodies concentrated on a line have no bounded sine polar; every
    # descriptor kind here has interior, so only a zero radial could break it
    if body.dim < 2:
        raise ValueError("sine polarity needs dimension >= 2")


def _scan_values(body: Body, rule):
    """Radial of `body` at the scan nodes, cached on the body."""
    cache = getattr(body, "_scan_cache", None)
    if cache is None:
        cache = {}
        body._scan_cache = cache
    if rule.spec not in cache:
        cache[rule.spec] = body.radial_batch(rule.nodes)
    return cache[rule.spec]


def cyl_support_batch(body: Body, X, settings: sphere_opt.OptimizerSettings | None = None):
    """Cylindrical support function at the rows of X (any nonzero vectors)."""
    X = np.atleast_2d(np.asarray(X, dtype=float))
    nrm = np.linalg.norm(X, axis=1)
    if np.min(nrm) < 1e-300:
        raise ValueError("cylindrical support is undefined at the origin row")
    U = X / nrm[:, None]

    M = body.ball_matrix()
    if M is not None:
        # c(x) = |x| * sigma_max((I - uu^t) M): distance of the farthest
        # body point from the axis, by the projected singular value
        B = M[None, :, :] - U[:, :, None] * (U @ M)[:, None, :]
        G = B @ np.swapaxes(B, 1, 2)
        lam = np.linalg.eigvalsh(G)[:, -1]
        return np.sqrt(np.clip(lam, 0.0, None)) * nrm

    if isinstance(body, Box):
        # [x, y] is convex in y, so the max over the box sits at a vertex;
        # all vertices share the same norm
        V = body.vertices()
        vn2 = float(V[0] @ V[0])
        D = U @ V.T
        best = np.max(np.sqrt(np.clip(vn2 - D * D, 0.0, None)), axis=1)
        return best * nrm

    if body.dim == 2 and body.is_convex:
        # in the plane the bracket is a quarter-turned inner product
        return body.support_batch(U @ QUARTER_TURN_2D) * nrm

    _check_not_degenerate(body)
    rule = scan_rule(body.dim)
    vals = _scan_values(body, rule)

    def objective(Q, V):
        return body.radial_batch(V) * bracket_rows(Q, V)

    st = settings or sphere_opt.DEFAULT_SETTINGS
    f, _ = sphere_opt.max_on_sphere(U, objective, rule.nodes, vals, st, pairing="sine")
    return f * nrm


def cyl_support(body: Body, x) -> float:
    return float(cyl_support_batch(body, np.asarray(x, dtype=float)[None, :])[0])


class SinePolarBody(Body):
    """The sine polar body: radial = 1 / cylindrical support of the parent."""

    kind = "sine_polar"
    is_convex = True

    def __init__(self, parent: Body, settings: sphere_opt.OptimizerSettings | None = None):
        _check_not_degenerate(parent)
        self.parent = parent
        self.dim = parent.dim
        self.settings = settings or sphere_opt.DEFAULT_SETTINGS
        self.is_smooth = parent.ball_matrix() is not None

    def radial_unit(self, U):
        return 1.0 / cyl_support_batch(self.parent, U, self.settings)

    def contains(self, x) -> bool:
        x = np.asarray(x, dtype=float)
        if np.linalg.norm(x) == 0.0:
            return True
        return cyl_support(self.parent, x) <= 1.0 + 1e-12

    def ball_matrix(self):
        # in the plane, sine polarity is classical polarity followed by a
        # quarter turn, which keeps ellipses ellipses
        if self.dim == 2:
            M = self.parent.ball_matrix()
            if M is not None:
                return QUARTER_TURN_2D @ np.linalg.inv(M).T
        return None


def sine_polar(body: Body, settings: sphere_opt.OptimizerSettings | None = None) -> SinePolarBody:
    return SinePolarBody(body, settings)


def cylindrical_hull(body: Body, settings: sphere_opt.OptimizerSettings | None = None) -> SinePolarBody:
    """Twice-applied sine polarity: the intersection of all solid cylinders
    containing the body.  Contains the body; equals it for cylinder
    intersections."""
    return SinePolarBody(SinePolarBody(body, settings), settings)


def sine_polar_volume(body: Body, rule: SphericalRule,
                      settings: sphere_opt.OptimizerSettings | None = None) -> float:
    """Volume of the sine polar body: w_n times the integral of c_K^(-n)."""
    if body.dim != rule.dim:
        raise ValueError("rule dimension must match the body")
    c = cyl_support_batch(body, rule.nodes, settings)
    return unit_ball_volume(body.dim) * integrate_values(rule, c ** (-float(body.dim)))


def supporting_cylinder(body: Body, u):
    """(axis, base radius) of the minimal solid cylinder with axis u containing the body."""
    uv = _unit_rows(u, body.dim)[0]
    return uv, cyl_support(body, uv)


def supporting_cylinder_set(body: Body, directions) -> CylinderSet:
    """Intersection of supporting cylinders at the given axes.

    Over-approximates the body; densifying the axes shrinks it toward the
    cylindrical hull.
    """
    D = _unit_rows(directions, body.dim)
    radii = cyl_support_batch(body, D)
    return CylinderSet(D, radii)


def cyl_gauss_image(body: Body, x, tol: float = 1e-6, boundary_tol: float = 1e-8,
                    settings: sphere_opt.OptimizerSettings | None = None):
    """Axis directions whose supporting cylinder touches the boundary point x.

    Returns (directions, residuals) with residual = c_K(u) - [x, u] >= 0
    filtered to residual <= tol after local refinement.  The candidate set
    makes no completeness claim: touching directions can form continua.
    """
    xv = np.asarray(x, dtype=float)
    r = float(np.linalg.norm(xv))
    if r == 0.0:
        raise ValueError("origin is not a boundary point")
    rho = body.radial(xv / r)
    if abs(r - rho) > boundary_tol * max(1.0, rho):
        raise ValueError(
            f"point is not on the boundary: |x| = {r:.12g}, radial = {rho:.12g}")

    rule = scan_rule(body.dim)
    c_nodes = cyl_support_batch(body, rule.nodes, settings)
    d = rule.nodes @ xv
    br = np.sqrt(np.clip(r * r - d * d, 0.0, None))
    resid = c_nodes - br
    # near-touching nodes, plus the best few dozen so that touching basins
    # the scan grid only straddles still get a refinement start
    scale = float(np.max(c_nodes))
    coarse = resid <= max(10.0 * tol, 1e-3 * scale)
    k = min(32, len(resid))
    coarse[np.argpartition(resid, k - 1)[:k]] = True
    cand = rule.nodes[coarse]

    def neg_resid(Q, V):
        # Q rows are copies of x-hat; maximize [x,u] - c(u)
        d = np.einsum("ij,ij->i", Q, V) * r
        br = np.sqrt(np.clip(r * r - d * d, 0.0, None))
        return br - cyl_support_batch(body, V, settings)

    Q = np.broadcast_to(xv / r, cand.shape).copy()
    f0 = neg_resid(Q, cand)
    st = settings or sphere_opt.DEFAULT_SETTINGS
    f, V = sphere_opt.refine_on_sphere(Q, cand, f0, neg_resid, st)
    resid = -f
    keep = resid <= tol
    return V[keep], resid[keep]
