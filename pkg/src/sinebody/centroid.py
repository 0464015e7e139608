"""Sine and cosine centroid-body transforms.

The sine centroid body of a star body K has p-th support power equal to the
normalized integral of [x, y]^p over K; its polar has the closed radial form

    radial(x)^(-p) = n w_n / ((n+p) c V(K)) * integral over the sphere of
                     [x, u]^p rho_K(u)^(n+p) du,

with c the sine normalization constant.  The cosine flavor replaces the
bracket by |x.u| and the constant by the cosine one.  Both transforms are
always evaluated through this spherical form with a single quadrature rule;
derived bodies remember their rule and refuse composition across rules,
since silently mixing rules corrupts volume-product ratios.
"""

from __future__ import annotations

import math

import numpy as np

from . import sphere_opt
from .bodies import Body, scan_rule, _unit_rows
from .geometry import sine_norm_constant, cosine_norm_constant, unit_ball_volume
from .quadrature import SphericalRule, volume

__all__ = [
    "lp_sine_transform",
    "sine_centroid_support",
    "cosine_centroid_support",
    "sine_centroid_polar_radial",
    "sine_centroid_polar",
    "cosine_centroid_polar",
    "sine_centroid_body",
    "CentroidPolarBody",
    "CentroidBody",
    "fubini_symmetry_gap",
    "iterated_polar_volume_check",
    "cached_volume",
]

_LOG_SPACE_P = 16.0  # above this, powers of the radial span too many decades
_CHUNK = 2048


def cached_volume(body: Body, rule: SphericalRule) -> float:
    """Volume of a body, computed once per (body, rule) pair."""
    cache = getattr(body, "_volume_cache", None)
    if cache is None:
        cache = {}
        body._volume_cache = cache
    if rule.spec not in cache:
        cache[rule.spec] = volume(body, rule)
    return cache[rule.spec]


def _pairing_pow(t, p, sine: bool):
    """[x,u]^p as (1-d^2)^(p/2) given t, or |d|^p; t is 1-d^2 or d."""
    if sine:
        half = p / 2.0
        if half == 0.5:
            return np.sqrt(t)
        if half == 1.0:
            return t
        if half == int(half) and half <= 32:
            out = t.copy()
            k = int(half)
            acc = None
            # exponentiation by squaring on the array
            while k:
                if k & 1:
                    acc = out.copy() if acc is None else acc * out
                k >>= 1
                if k:
                    out *= out
            return acc
        return t ** half
    a = np.abs(t)
    if p == 1.0:
        return a
    if p == int(p) and p <= 64:
        out = a.copy()
        k = int(p)
        acc = None
        while k:
            if k & 1:
                acc = out.copy() if acc is None else acc * out
            k >>= 1
            if k:
                out *= out
        return acc
    return a ** p


def _transform_sums(X_unit, rule, qvec, p, sine=True):
    """S(x) = sum_u w_u pairing(x,u)^p rho(u)^(n+p), for unit rows of X."""
    out = np.empty(len(X_unit))
    for i0 in range(0, len(X_unit), _CHUNK):
        D = X_unit[i0:i0 + _CHUNK] @ rule.nodes.T
        t = np.clip(1.0 - D * D, 0.0, None) if sine else D
        out[i0:i0 + _CHUNK] = _pairing_pow(t, p, sine) @ qvec
    return out


def _transform_logsums(X_unit, rule, log_qvec, p, sine=True):
    """log S(x) via streaming log-sum-exp; used for large p."""
    out = np.empty(len(X_unit))
    for i0 in range(0, len(X_unit), _CHUNK):
        D = X_unit[i0:i0 + _CHUNK] @ rule.nodes.T
        if sine:
            t = np.clip(1.0 - D * D, 0.0, None)
            with np.errstate(divide="ignore"):
                L = (p / 2.0) * np.log(t) + log_qvec[None, :]
        else:
            with np.errstate(divide="ignore"):
                L = p * np.log(np.abs(D)) + log_qvec[None, :]
        m = L.max(axis=1)
        out[i0:i0 + _CHUNK] = m + np.log(np.exp(L - m[:, None]).sum(axis=1))
    return out


def lp_sine_transform(body: Body, p: float, x, rule: SphericalRule) -> float:
    """Integral over the sphere of [x, u]^p rho_K(u)^(n+p); degree-p homogeneous in x."""
    if p < 1:
        raise ValueError("p must be >= 1")
    xv = np.asarray(x, dtype=float)
    r = float(np.linalg.norm(xv))
    if r == 0.0:
        return 0.0
    n = body.dim
    rho = body.radial_batch(rule.nodes)
    qvec = rule.weights * rho ** (n + p)
    s = _transform_sums((xv / r)[None, :], rule, qvec, p)[0]
    return float(s) * r**p


class CentroidPolarBody(Body):
    """Polar of a centroid body, with a closed quadrature radial form.

    flavor "sine" gives the polar sine centroid body; "cosine" the polar of
    the classical centroid body.  The instance caches the parent's radial
    powers at the rule nodes and the parent volume.
    """

    is_convex = True

    def __init__(self, parent: Body, p: float, rule: SphericalRule, flavor: str = "sine"):
        if p < 1:
            raise ValueError("p must be >= 1")
        if flavor not in ("sine", "cosine"):
            raise ValueError(f"unknown flavor {flavor!r}")
        if parent.dim != rule.dim:
            raise ValueError("rule dimension must match the body")
        parent_rule = getattr(parent, "rule", None)
        if isinstance(parent, CentroidPolarBody) and parent_rule.spec != rule.spec:
            raise ValueError(
                f"mixed-rule composition: parent built on {parent_rule.spec}, got {rule.spec}")
        self.parent = parent
        self.p = float(p)
        self.rule = rule
        self.flavor = flavor
        self.dim = parent.dim
        self.is_smooth = parent.is_smooth
        self.kind = f"{flavor}_centroid_polar"
        n = self.dim
        const = sine_norm_constant(n, p) if flavor == "sine" else cosine_norm_constant(n, p)
        self.parent_volume = cached_volume(parent, rule)
        if self.parent_volume <= 0:
            raise ValueError("parent volume must be positive")
        self._norm = n * unit_ball_volume(n) / ((n + p) * const * self.parent_volume)
        rho = parent.radial_batch(rule.nodes)
        self._use_log = p >= _LOG_SPACE_P
        if self._use_log:
            with np.errstate(divide="ignore"):
                self._log_qvec = np.log(rule.weights) + (n + p) * np.log(rho)
            self._log_norm = math.log(self._norm)
        else:
            self._qvec = rule.weights * rho ** (n + p)

    def radial_unit(self, U):
        sine = self.flavor == "sine"
        if self._use_log:
            logs = _transform_logsums(U, self.rule, self._log_qvec, self.p, sine)
            return np.exp(-(self._log_norm + logs) / self.p)
        s = _transform_sums(U, self.rule, self._qvec, self.p, sine)
        return (self._norm * s) ** (-1.0 / self.p)


class CentroidBody(Body):
    """A centroid body itself: closed support form, radial via its gauge."""

    is_convex = True

    def __init__(self, polar_form: CentroidPolarBody):
        self.polar_form = polar_form
        self.parent = polar_form.parent
        self.p = polar_form.p
        self.rule = polar_form.rule
        self.dim = polar_form.dim
        self.is_smooth = polar_form.is_smooth
        self.kind = f"{polar_form.flavor}_centroid"

    def support_unit(self, U):
        return 1.0 / self.polar_form.radial_unit(U)

    def radial_unit(self, U):
        # gauge of the support: rho(u) = 1 / max_v (u.v)+ / h(v)
        sc = scan_rule(self.dim)
        inv_h = self.polar_form.radial_unit(sc.nodes)

        def objective(X, V):
            d = np.clip(np.einsum("ij,ij->i", X, V), 0.0, None)
            return d * self.polar_form.radial_batch(V)

        f, _ = sphere_opt.max_on_sphere(U, objective, sc.nodes, inv_h, pairing="cosine")
        return 1.0 / f


def sine_centroid_polar(body: Body, p: float, rule: SphericalRule) -> CentroidPolarBody:
    return CentroidPolarBody(body, p, rule, "sine")


def cosine_centroid_polar(body: Body, p: float, rule: SphericalRule) -> CentroidPolarBody:
    return CentroidPolarBody(body, p, rule, "cosine")


def sine_centroid_body(body: Body, p: float, rule: SphericalRule) -> CentroidBody:
    return CentroidBody(CentroidPolarBody(body, p, rule, "sine"))


def sine_centroid_support(body: Body, p: float, x, rule: SphericalRule) -> float:
    """Support value of the sine centroid body at x (any vector)."""
    xv = np.asarray(x, dtype=float)
    r = float(np.linalg.norm(xv))
    if r == 0.0:
        return 0.0
    b = CentroidPolarBody(body, p, rule, "sine")
    return r / float(b.radial_unit((xv / r)[None, :])[0])


def cosine_centroid_support(body: Body, p: float, x, rule: SphericalRule) -> float:
    xv = np.asarray(x, dtype=float)
    r = float(np.linalg.norm(xv))
    if r == 0.0:
        return 0.0
    b = CentroidPolarBody(body, p, rule, "cosine")
    return r / float(b.radial_unit((xv / r)[None, :])[0])


def sine_centroid_polar_radial(body: Body, p: float, u, rule: SphericalRule) -> float:
    """Radial of the polar sine centroid body at a unit direction."""
    b = CentroidPolarBody(body, p, rule, "sine")
    return float(b.radial_unit(_unit_rows(u, body.dim))[0])


def fubini_symmetry_gap(body_k: Body, body_l: Body, p: float, rule: SphericalRule) -> float:
    """Relative gap of a two-body symmetry identity of the transform.

    The p-th dual mixed volume of K against the polar sine centroid body
    of L, divided by V(K), is symmetric in (K, L); the returned gap is the
    relative difference of the two orderings and certifies the whole
    transform pipeline when it is near zero.
    """
    from .quadrature import dual_mixed_volume  # local import to keep module edges thin

    lam_l = CentroidPolarBody(body_l, p, rule, "sine")
    lam_k = CentroidPolarBody(body_k, p, rule, "sine")
    lhs = dual_mixed_volume(body_k, lam_l, p, rule) / cached_volume(body_k, rule)
    rhs = dual_mixed_volume(body_l, lam_k, p, rule) / cached_volume(body_l, rule)
    return abs(lhs - rhs) / max(abs(lhs), abs(rhs))


def iterated_polar_volume_check(body: Body, p: float, rule: SphericalRule):
    """(V of the twice-applied polar transform, V of the body); first >= second."""
    once = CentroidPolarBody(body, p, rule, "sine")
    twice = CentroidPolarBody(once, p, rule, "sine")
    return volume(twice, rule), cached_volume(body, rule)
