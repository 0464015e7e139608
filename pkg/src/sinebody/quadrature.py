"""Probability-normalized integration over the unit sphere.

Rules are deterministic for n = 2 (equally spaced angles) and n = 3
(Gauss-Legendre in cos(theta) times a uniform azimuthal grid); for n >= 4
they are seeded Monte Carlo with antipodal symmetrization.  All weights sum
to one: integration is against the rotation-invariant probability measure,
so integrating the constant 1 gives 1 and volumes carry an explicit w_n
factor.
"""

from __future__ import annotations

import math
from dataclasses import dataclass

import numpy as np
from numpy.polynomial.legendre import leggauss

from .geometry import unit_ball_volume

__all__ = [
    "SphericalRule",
    "build_rule",
    "parse_rule_spec",
    "default_rule",
    "integrate",
    "integrate_values",
    "volume",
    "dual_mixed_volume",
    "slice_integral_check",
    "IntegrationError",
]

DEFAULT_RULE_SPECS = {2: "uniform:4096", 3: "gauss:160"}
DEFAULT_MC_SPEC = "mc:200000:42"


class IntegrationError(ValueError):
    pass


@dataclass(eq=False)
class SphericalRule:
    """Quadrature nodes and probability weights on S^{n-1}.

    The node set is antipodally symmetric (all bodies handled here are
    origin-symmetric) and the spec string identifies the rule, including
    the seed for Monte Carlo rules.
    """

    dim: int
    nodes: np.ndarray
    weights: np.ndarray
    kind: str
    spec: str
    seed: int | None = None

    def __post_init__(self):
        self.nodes = np.ascontiguousarray(self.nodes, dtype=float)
        self.weights = np.ascontiguousarray(self.weights, dtype=float)
        if self.nodes.ndim != 2 or self.nodes.shape[1] != self.dim:
            raise ValueError("nodes must be an (N, dim) array")
        if self.weights.shape != (self.nodes.shape[0],):
            raise ValueError("weights must match nodes")
        if abs(math.fsum(self.weights.tolist()) - 1.0) > 1e-13:
            raise ValueError("weights must sum to 1 (probability measure)")
        nrm = np.linalg.norm(self.nodes, axis=1)
        if np.max(np.abs(nrm - 1.0)) > 1e-12:
            raise ValueError("all nodes must be unit vectors")

    def __len__(self):
        return self.nodes.shape[0]

    def rotated(self, orthogonal: np.ndarray, label: str = "rot") -> "SphericalRule":
        """Same rule with every node rotated; still a valid probability rule.

        Useful to integrate a derived body without the query directions
        coinciding with the nodes the body itself integrates over.
        """
        q = np.asarray(orthogonal, dtype=float)
        if q.shape != (self.dim, self.dim) or np.max(np.abs(q @ q.T - np.eye(self.dim))) > 1e-10:
            raise ValueError("rotated() needs an orthogonal (dim, dim) matrix")
        return SphericalRule(self.dim, self.nodes @ q.T, self.weights.copy(),
                             self.kind, f"{self.spec}+{label}", self.seed)


def build_rule(dim: int, resolution: int, kind: str | None = None,
               seed: int = 42, azimuthal: int | None = None) -> SphericalRule:
    """Construct a rule for S^{dim-1}.

    dim = 2: `resolution` equally spaced angles (even, for antipodal
    symmetry), equal weights.  dim = 3: Gauss-Legendre with `resolution`
    points in cos(theta) times `azimuthal` (default 2*resolution) equally
    spaced azimuths.  dim >= 4: `resolution` (even) seeded Gaussian
    directions, antipodally symmetrized, equal weights.
    """
    if dim < 2:
        raise ValueError("dim must be >= 2")
    if resolution < 4:
        raise ValueError("resolution must be >= 4")
    if kind is None:
        kind = {2: "uniform", 3: "gauss"}.get(dim, "mc")

    if kind == "uniform":
        if dim != 2:
            raise ValueError("uniform rules are for dim 2 only")
        if resolution % 2:
            raise ValueError("uniform resolution must be even (antipodal symmetry)")
        theta = 2.0 * math.pi * np.arange(resolution) / resolution
        nodes = np.column_stack([np.cos(theta), np.sin(theta)])
        weights = np.full(resolution, 1.0 / resolution)
        return SphericalRule(2, nodes, weights, kind, f"uniform:{resolution}")

    if kind == "gauss":
        if dim != 3:
            raise ValueError("gauss product rules are for dim 3 only")
        m = 2 * resolution if azimuthal is None else azimuthal
        if m % 2:
            raise ValueError("azimuthal count must be even (antipodal symmetry)")
        t, gw = leggauss(resolution)
        phi = 2.0 * math.pi * np.arange(m) / m
        st = np.sqrt(1.0 - t * t)
        nodes = np.column_stack([
            (st[:, None] * np.cos(phi)[None, :]).ravel(),
            (st[:, None] * np.sin(phi)[None, :]).ravel(),
            np.broadcast_to(t[:, None], (resolution, m)).ravel(),
        ])
        weights = np.broadcast_to(gw[:, None] / (2.0 * m), (resolution, m)).ravel()
        weights = weights / math.fsum(weights.tolist())
        return SphericalRule(3, nodes, weights, kind, f"gauss:{resolution}x{m}")

    if kind == "mc":
        if dim < 4:
            raise ValueError("monte-carlo rules are for dim >= 4 only")
        if resolution % 2:
            raise ValueError("mc resolution must be even (antipodal symmetrization)")
        # Philox is counter-based: the seed fully identifies the node set.
        rng = np.random.Generator(np.random.Philox(seed))
        half = rng.normal(size=(resolution // 2, dim))
        nrm = np.linalg.norm(half, axis=1)
        if np.min(nrm) < 1e-12:
            raise ValueError("degenerate Gaussian draw; use another seed")
        half = half / nrm[:, None]
        nodes = np.vstack([half, -half])
        weights = np.full(resolution, 1.0 / resolution)
        return SphericalRule(dim, nodes, weights, kind, f"mc:{resolution}:{seed}", seed)

    raise ValueError(f"unknown rule kind {kind!r}")


def parse_rule_spec(spec: str, dim: int) -> SphericalRule:
    """Parse "uniform:N", "gauss:N", "gauss:NxM", or "mc:N:seed"."""
    parts = spec.strip().split(":")
    kind = parts[0]
    try:
        if kind == "uniform" and len(parts) == 2:
            return build_rule(dim, int(parts[1]), "uniform")
        if kind == "gauss" and len(parts) == 2:
            if "x" in parts[1]:
                a, b = parts[1].split("x")
                return build_rule(dim, int(a), "gauss", azimuthal=int(b))
            return build_rule(dim, int(parts[1]), "gauss")
        if kind == "mc" and len(parts) == 3:
            return build_rule(dim, int(parts[1]), "mc", seed=int(parts[2]))
    except ValueError as exc:
        raise ValueError(f"bad rule spec {spec!r} for dim {dim}: {exc}") from None
    raise ValueError(f"bad rule spec {spec!r}")


def default_rule(dim: int) -> SphericalRule:
    """The per-dimension default rule (deterministic for n = 2, 3)."""
    spec = DEFAULT_RULE_SPECS.get(dim, DEFAULT_MC_SPEC)
    return parse_rule_spec(spec, dim)


def integrate_values(rule: SphericalRule, values) -> float:
    """Weighted sum of per-node values, compensated and in fixed node order."""
    v = np.asarray(values, dtype=float)
    if v.shape != (len(rule),):
        raise ValueError("values must have one entry per node")
    if not np.all(np.isfinite(v)):
        bad = int(np.flatnonzero(~np.isfinite(v))[0])
        raise IntegrationError(
            f"non-finite integrand value at node {bad}: {rule.nodes[bad]}")
    return math.fsum((rule.weights * v).tolist())


def integrate(rule: SphericalRule, f) -> float:
    """Integrate f over the sphere against the probability measure.

    f maps a unit vector to a real; evaluation order and the summation
    order are fixed, so results do not depend on available parallelism.
    """
    vals = np.fromiter((f(u) for u in rule.nodes), dtype=float, count=len(rule))
    return integrate_values(rule, vals)


def volume(body, rule: SphericalRule) -> float:
    """V = w_n * integral of radial^n over the sphere."""
    if body.dim != rule.dim:
        raise ValueError(f"body dim {body.dim} != rule dim {rule.dim}")
    rho = body.radial_batch(rule.nodes)
    return unit_ball_volume(body.dim) * integrate_values(rule, rho ** body.dim)


def dual_mixed_volume(body_k, body_l, p: float, rule: SphericalRule) -> float:
    """w_n * integral of rho_K^(n+p) rho_L^(-p); collapses to V(K) at L = K."""
    if body_k.dim != body_l.dim:
        raise ValueError("bodies must share a dimension")
    n = body_k.dim
    rho_k = body_k.radial_batch(rule.nodes)
    rho_l = body_l.radial_batch(rule.nodes)
    if np.min(rho_l) < 1e-12:
        raise IntegrationError("second body's radial function vanishes at a node")
    return unit_ball_volume(n) * integrate_values(rule, rho_k ** (n + p) * rho_l ** (-p))


def slice_integral_check(f, rule: SphericalRule, circle_resolution: int = 256):
    """Both sides of the sphere-of-circles identity in dimension 3.

    The integral of f over S^2 equals the average over v of the circle
    average of f on S^2 intersected with the plane through the origin
    perpendicular to v.  Returns (direct, sliced).
    """
    if rule.dim != 3:
        raise ValueError("slice check is implemented for dim 3")
    direct = integrate(rule, f)
    t = 2.0 * math.pi * np.arange(circle_resolution) / circle_resolution
    ct, st = np.cos(t), np.sin(t)
    inner = np.empty(len(rule))
    for i, v in enumerate(rule.nodes):
        # orthonormal basis of the plane perpendicular to v
        h = np.zeros(3)
        h[int(np.argmin(np.abs(v)))] = 1.0
        a = h - (h @ v) * v
        a /= np.linalg.norm(a)
        b = np.cross(v, a)
        pts = ct[:, None] * a[None, :] + st[:, None] * b[None, :]
        inner[i] = math.fsum(f(z) for z in pts) / circle_resolution
    sliced = integrate_values(rule, inner)
    return direct, sliced
