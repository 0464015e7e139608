"""Descriptors and evaluators for origin-symmetric star and convex bodies.

Every body exposes the same evaluator contract: ``radial`` (distance to the
boundary along a direction, extended (-1)-homogeneously off the sphere),
``support`` where convexity makes it meaningful, and ``contains``.  Derived
bodies (polars, linear images, the transform bodies in other modules) wrap
their parent's evaluators instead of resampling, so composing them adds no
discretization error beyond the leaves.

Descriptors are immutable after construction and safe to evaluate
concurrently.
"""

from __future__ import annotations

import json
import math

import numpy as np

from . import quadrature, sphere_opt

__all__ = [
    "Body", "Ball", "Ellipsoid", "Box", "CylinderSet", "RadialTable",
    "LinearMap", "polar", "linear_image",
    "load_body", "load_body_file", "body_to_dict", "BodyValidationError",
]


class BodyValidationError(ValueError):
    """Raised when a descriptor violates its invariants; carries the field name."""

    def __init__(self, field, message):
        self.field = field
        super().__init__(f"{field}: {message}")


def _unit_rows(U, dim, tol=1e-9):
    U = np.atleast_2d(np.asarray(U, dtype=float))
    if U.shape[1] != dim:
        raise ValueError(f"expected vectors of dimension {dim}, got {U.shape[1]}")
    nrm = np.linalg.norm(U, axis=1)
    if np.max(np.abs(nrm - 1.0)) > tol:
        raise ValueError("radial/support evaluation expects unit directions")
    return U


# scan rules the numeric support/cyl-support optimizers fall back to,
# cached per dimension
_SCAN_SPECS = {2: "uniform:1024", 3: "gauss:32"}
_scan_cache: dict[int, quadrature.SphericalRule] = {}


def scan_rule(dim: int) -> quadrature.SphericalRule:
    if dim not in _scan_cache:
        spec = _SCAN_SPECS.get(dim, "mc:4096:7")
        _scan_cache[dim] = quadrature.parse_rule_spec(spec, dim)
    return _scan_cache[dim]


class Body:
    """Evaluator contract shared by descriptors and derived bodies."""

    dim: int
    kind: str = "body"
    is_smooth: bool = False
    is_convex: bool = False

    # -- radial ------------------------------------------------------------
    def radial_unit(self, U):
        """Radial function at unit directions, (M, n) -> (M,)."""
        raise NotImplementedError

    def radial_batch(self, U):
        return self.radial_unit(_unit_rows(U, self.dim))

    def radial(self, x) -> float:
        x = np.asarray(x, dtype=float)
        r = np.linalg.norm(x)
        if r == 0.0:
            raise ValueError("radial function is undefined at the origin")
        return float(self.radial_unit((x / r)[None, :])[0]) / r

    # -- support -----------------------------------------------------------
    def support_unit(self, U):
        if not self.is_convex:
            raise NotImplementedError(
                f"support function not available for non-convex kind {self.kind!r}")
        # numeric fallback: h(u) = max over v of rho(v) max(u.v, 0)
        rule = scan_rule(self.dim)
        vals = self.radial_batch(rule.nodes)

        def objective(X, V):
            d = np.clip(np.einsum("ij,ij->i", X, V), 0.0, None)
            return self.radial_batch(V) * d

        f, _ = sphere_opt.max_on_sphere(U, objective, rule.nodes, vals, pairing="cosine")
        return f

    def support_batch(self, U):
        return self.support_unit(_unit_rows(U, self.dim))

    def support(self, x) -> float:
        x = np.asarray(x, dtype=float)
        r = np.linalg.norm(x)
        if r == 0.0:
            return 0.0
        return float(self.support_unit((x / r)[None, :])[0]) * r

    # -- membership ----------------------------------------------------------
    def contains(self, x) -> bool:
        x = np.asarray(x, dtype=float)
        r = np.linalg.norm(x)
        if r == 0.0:
            return True
        return r <= float(self.radial_unit((x / r)[None, :])[0]) * (1.0 + 1e-12)

    # -- structure hooks -----------------------------------------------------
    def ball_matrix(self):
        """Matrix M with body = M * (unit ball), when the body is one; else None."""
        return None

    def to_dict(self):
        raise NotImplementedError(f"kind {self.kind!r} has no file representation")

    def __repr__(self):
        return f"<{type(self).__name__} dim={self.dim}>"


class Ball(Body):
    kind = "ball"
    is_smooth = True
    is_convex = True

    def __init__(self, dim: int, radius: float):
        if dim < 2:
            raise BodyValidationError("dim", "must be >= 2")
        if not radius > 0:
            raise BodyValidationError("radius", "must be > 0")
        self.dim = int(dim)
        self.radius = float(radius)

    def radial_unit(self, U):
        return np.full(len(U), self.radius)

    def support_unit(self, U):
        return np.full(len(U), self.radius)

    def ball_matrix(self):
        return self.radius * np.eye(self.dim)

    def to_dict(self):
        return {"dim": self.dim, "kind": "ball", "radius": self.radius}


class Ellipsoid(Body):
    """Axis-aligned ellipsoid with the given semiaxes."""

    kind = "ellipsoid"
    is_smooth = True
    is_convex = True

    def __init__(self, semiaxes):
        a = np.asarray(semiaxes, dtype=float)
        if a.ndim != 1 or len(a) < 2:
            raise BodyValidationError("semiaxes", "need a list of >= 2 values")
        if not np.all(a > 0):
            raise BodyValidationError("semiaxes", "must all be > 0")
        self.dim = len(a)
        self.semiaxes = a

    def radial_unit(self, U):
        return 1.0 / np.sqrt((U * U) @ (1.0 / self.semiaxes**2))

    def support_unit(self, U):
        return np.sqrt((U * U) @ self.semiaxes**2)

    def ball_matrix(self):
        return np.diag(self.semiaxes)

    def to_dict(self):
        return {"dim": self.dim, "kind": "ellipsoid", "semiaxes": self.semiaxes.tolist()}


class Box(Body):
    """Axis-aligned box with the given half-widths; supplies a convex body
    that is neither smooth nor an ellipsoid."""

    kind = "box"
    is_smooth = False
    is_convex = True

    def __init__(self, half_widths):
        w = np.asarray(half_widths, dtype=float)
        if w.ndim != 1 or len(w) < 2:
            raise BodyValidationError("half_widths", "need a list of >= 2 values")
        if not np.all(w > 0):
            raise BodyValidationError("half_widths", "must all be > 0")
        self.dim = len(w)
        self.half_widths = w

    def radial_unit(self, U):
        a = np.abs(U)
        with np.errstate(divide="ignore"):
            ratios = np.where(a > 1e-300, self.half_widths[None, :] / a, np.inf)
        return np.min(ratios, axis=1)

    def support_unit(self, U):
        return np.abs(U) @ self.half_widths

    def vertices(self):
        """All 2^n corner points."""
        signs = np.array(np.meshgrid(*([[-1.0, 1.0]] * self.dim))).T.reshape(-1, self.dim)
        return signs * self.half_widths[None, :]

    def to_dict(self):
        return {"dim": self.dim, "kind": "box", "half_widths": self.half_widths.tolist()}


class CylinderSet(Body):
    """Intersection of origin-symmetric solid cylinders (axis, base radius).

    Bounded iff the axes are not all parallel to one line, which the
    constructor enforces.
    """

    kind = "cylinders"
    is_smooth = False
    is_convex = True

    def __init__(self, axes, radii):
        A = np.asarray(axes, dtype=float)
        r = np.asarray(radii, dtype=float)
        if A.ndim != 2 or A.shape[0] < 2 or A.shape[1] < 2:
            raise BodyValidationError("cylinders", "need >= 2 cylinders in dimension >= 2")
        if r.shape != (A.shape[0],):
            raise BodyValidationError("cylinders", "one radius per axis required")
        if not np.all(r > 0):
            raise BodyValidationError("cylinders.radius", "must all be > 0")
        nrm = np.linalg.norm(A, axis=1)
        if np.min(nrm) < 1e-12:
            raise BodyValidationError("cylinders.axis", "zero axis vector")
        A = A / nrm[:, None]
        # boundedness: some pair of axes must be non-parallel
        G = np.abs(A @ A.T)
        np.fill_diagonal(G, 1.0)
        if np.min(G) > 1.0 - 1e-12:
            raise BodyValidationError(
                "cylinders.axis", "axes all parallel to one line (unbounded intersection)")
        self.dim = A.shape[1]
        self.axes = A
        self.radii = r

    def radial_unit(self, U):
        vals = np.full(len(U), np.inf)
        for ax, r in zip(self.axes, self.radii):
            d = U @ ax
            br = np.sqrt(np.clip(1.0 - d * d, 0.0, None))
            ok = br > 1e-12
            vals = np.minimum(vals, np.where(ok, r / np.where(ok, br, 1.0), np.inf))
        if not np.all(np.isfinite(vals)):
            raise BodyValidationError("cylinders", "direction along every axis (invalid set)")
        return vals

    def _support_problem(self):
        # support of an intersection = infimal convolution of the cylinder
        # supports: h(u) = min sum_i r_i |a_i| over u = sum_i a_i, a_i
        # perpendicular to axis i.  A small second-order cone program; exact
        # where ascent methods crawl along the curved edge ridges.
        import cvxpy as cp

        k = len(self.radii)
        a = cp.Variable((k, self.dim))
        u = cp.Parameter(self.dim)
        cons = [cp.sum(a, axis=0) == u]
        cons += [a[i] @ self.axes[i] == 0 for i in range(k)]
        obj = cp.Minimize(cp.sum(cp.multiply(self.radii, cp.norm(a, 2, axis=1))))
        return cp.Problem(obj, cons), u

    def support_unit(self, U):
        import warnings

        import cvxpy as cp

        if not hasattr(self, "_socp"):
            self._socp = self._support_problem()
        prob, u_par = self._socp
        out = np.empty(len(U))
        with warnings.catch_warnings():
            # the tight tolerances can end in optimal_inaccurate, which the
            # status check below already handles
            warnings.simplefilter("ignore", UserWarning)
            for i, u in enumerate(U):
                u_par.value = u
                prob.solve(solver=cp.CLARABEL, tol_gap_abs=1e-12, tol_gap_rel=1e-12,
                           tol_feas=1e-12)
                if prob.status not in ("optimal", "optimal_inaccurate"):
                    raise RuntimeError(f"support solve failed at {u}: {prob.status}")
                out[i] = prob.value
        return out

    def to_dict(self):
        return {"dim": self.dim, "kind": "cylinders",
                "cylinders": [{"axis": a.tolist(), "radius": float(r)}
                              for a, r in zip(self.axes, self.radii)]}


class RadialTable(Body):
    """Star body sampled at unit nodes.

    Interpolation is periodic-linear in angle for n = 2 and nearest-node
    for n >= 3; tables are a convenience path, not an accuracy path.
    Antipodes of the given nodes are added automatically so the body is
    origin-symmetric by construction.
    """

    kind = "radial_table"
    is_smooth = False
    is_convex = False

    def __init__(self, nodes, values, interpolation: str | None = None):
        N = np.asarray(nodes, dtype=float)
        v = np.asarray(values, dtype=float)
        if N.ndim != 2 or len(N) < 4:
            raise BodyValidationError("nodes", "need >= 4 sample directions")
        if v.shape != (len(N),):
            raise BodyValidationError("values", "one value per node required")
        if not (np.all(np.isfinite(v)) and np.all(v > 1e-12) and np.max(v) < 1e12):
            raise BodyValidationError("values", "must be positive, finite, away from 0 and inf")
        nrm = np.linalg.norm(N, axis=1)
        if np.min(nrm) < 1e-12:
            raise BodyValidationError("nodes", "zero node vector")
        N = N / nrm[:, None]
        self.dim = N.shape[1]
        if interpolation is None:
            interpolation = "linear" if self.dim == 2 else "nearest"
        if interpolation not in ("linear", "nearest"):
            raise BodyValidationError("interpolation", f"unknown mode {interpolation!r}")
        if interpolation == "linear" and self.dim != 2:
            raise BodyValidationError("interpolation", "linear interpolation is for dim 2")
        self.interpolation = interpolation
        # symmetrize
        N = np.vstack([N, -N])
        v = np.concatenate([v, v])
        if self.dim == 2:
            ang = np.mod(np.arctan2(N[:, 1], N[:, 0]), 2.0 * math.pi)
            order = np.argsort(ang)
            self._angles = ang[order]
            self._values = v[order]
        self.nodes = N
        self.values = v

    def radial_unit(self, U):
        if self.dim == 2 and self.interpolation == "linear":
            ang = np.mod(np.arctan2(U[:, 1], U[:, 0]), 2.0 * math.pi)
            xp = np.concatenate([self._angles, [self._angles[0] + 2.0 * math.pi]])
            fp = np.concatenate([self._values, [self._values[0]]])
            return np.interp(ang, xp, fp, period=2.0 * math.pi)
        idx = np.argmax(U @ self.nodes.T, axis=1)
        return self.values[idx]

    def to_dict(self):
        return {"dim": self.dim, "kind": "radial_table",
                "nodes": self.nodes.tolist(), "values": self.values.tolist(),
                "interpolation": self.interpolation}


class LinearMap:
    """Invertible linear transform with cached inverse/transpose/determinant."""

    def __init__(self, matrix):
        m = np.asarray(matrix, dtype=float)
        if m.ndim != 2 or m.shape[0] != m.shape[1]:
            raise ValueError("matrix must be square")
        det = float(np.linalg.det(m))
        if abs(det) < 1e-12:
            raise ValueError(f"matrix is singular (|det| = {abs(det):.2e})")
        self.matrix = m
        self.det = det
        self.inverse = np.linalg.inv(m)
        self.transpose = m.T
        self.dim = m.shape[0]

    def __matmul__(self, other):
        if isinstance(other, LinearMap):
            return LinearMap(self.matrix @ other.matrix)
        return self.matrix @ other


class _PolarBody(Body):
    """Polar of a convex body: radial = 1 / parent support."""

    kind = "polar"

    def __init__(self, parent: Body):
        if not parent.is_convex:
            raise ValueError("polar body requires a convex parent")
        self.parent = parent
        self.dim = parent.dim
        self.is_smooth = parent.is_smooth
        self.is_convex = True

    def radial_unit(self, U):
        return 1.0 / self.parent.support_batch(U)

    def ball_matrix(self):
        M = self.parent.ball_matrix()
        return None if M is None else np.linalg.inv(M).T


class _LinearImage(Body):
    """Image of a body under an invertible linear map, by evaluator composition."""

    kind = "linear_image"

    def __init__(self, parent: Body, phi: LinearMap):
        if phi.dim != parent.dim:
            raise ValueError("map dimension must match the body")
        self.parent = parent
        self.phi = phi
        self.dim = parent.dim
        self.is_smooth = parent.is_smooth
        self.is_convex = parent.is_convex

    def radial_unit(self, U):
        Y = U @ self.phi.inverse.T
        nrm = np.linalg.norm(Y, axis=1)
        return self.parent.radial_unit(Y / nrm[:, None]) / nrm

    def support_unit(self, U):
        Z = U @ self.phi.matrix  # phi^t u, rows
        nrm = np.linalg.norm(Z, axis=1)
        return self.parent.support_unit(Z / nrm[:, None]) * nrm

    def contains(self, x):
        return self.parent.contains(self.phi.inverse @ np.asarray(x, dtype=float))

    def ball_matrix(self):
        M = self.parent.ball_matrix()
        return None if M is None else self.phi.matrix @ M


def polar(body: Body) -> Body:
    """Classical polar body; closed forms for balls, ellipsoids and their
    linear images, generic support-based evaluator otherwise."""
    M = body.ball_matrix()
    if M is not None:
        Minv_t = np.linalg.inv(M).T
        # keep the simple kinds simple
        d = np.diagonal(Minv_t)
        if np.allclose(Minv_t, np.diag(d), atol=1e-14) and np.all(d > 0):
            if np.allclose(d, d[0], atol=1e-14):
                return Ball(body.dim, float(d[0]))
            return Ellipsoid(d.copy())
        return _LinearImage(Ball(body.dim, 1.0), LinearMap(Minv_t))
    return _PolarBody(body)


def linear_image(body: Body, phi: LinearMap) -> Body:
    return _LinearImage(body, phi)


# ---------------------------------------------------------------------------
# descriptor file format


def body_to_dict(body: Body) -> dict:
    return body.to_dict()


def load_body(data: dict, source: str = "<dict>") -> Body:
    """Build a body from its JSON dictionary, with field-level diagnostics."""

    def fail(field, msg):
        raise BodyValidationError(f"{source}:{field}", msg)

    if not isinstance(data, dict):
        fail("$", "descriptor must be a JSON object")
    kind = data.get("kind")
    dim = data.get("dim")
    if not isinstance(dim, int) or dim < 2:
        fail("dim", "must be an integer >= 2")
    try:
        if kind == "ball":
            if "radius" not in data:
                fail("radius", "missing")
            return Ball(dim, data["radius"])
        if kind == "ellipsoid":
            a = data.get("semiaxes")
            if not isinstance(a, list) or len(a) != dim:
                fail("semiaxes", f"need a list of {dim} values")
            return Ellipsoid(a)
        if kind == "box":
            w = data.get("half_widths")
            if not isinstance(w, list) or len(w) != dim:
                fail("half_widths", f"need a list of {dim} values")
            return Box(w)
        if kind == "cylinders":
            cyl = data.get("cylinders")
            if not isinstance(cyl, list) or len(cyl) < 2:
                fail("cylinders", "need a list of >= 2 {axis, radius} objects")
            axes, radii = [], []
            for i, c in enumerate(cyl):
                if "axis" not in c or "radius" not in c:
                    fail(f"cylinders[{i}]", "need axis and radius")
                if not isinstance(c["axis"], list) or len(c["axis"]) != dim:
                    fail(f"cylinders[{i}].axis", f"need a list of {dim} coordinates")
                axes.append(c["axis"])
                radii.append(c["radius"])
            return CylinderSet(axes, radii)
        if kind == "radial_table":
            if "nodes" not in data or "values" not in data:
                fail("nodes/values", "both required")
            return RadialTable(data["nodes"], data["values"],
                               data.get("interpolation"))
    except BodyValidationError as exc:
        raise BodyValidationError(f"{source}:{exc.field}", str(exc).split(": ", 1)[-1]) from None
    fail("kind", f"unknown kind {kind!r}")


def load_body_file(path) -> Body:
    with open(path) as fh:
        try:
            data = json.load(fh)
        except json.JSONDecodeError as exc:
            raise BodyValidationError(f"{path}:line {exc.lineno}", exc.msg) from None
    return load_body(data, source=str(path))
