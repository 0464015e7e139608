"""Batched maximization of functions over the unit sphere.

The workhorse everywhere a support-style quantity has no closed form:
max over v in S^{n-1} of rho(v) * pairing(x, v).  The search is a coarse
scan over a fixed node set followed by pattern search in the tangent
space, run from several angularly separated scan candidates.  Pattern
search (with diagonal probes and step re-expansion) is used instead of
line searches along great circles because the objectives here can have
conical maxima and curved ridges, on which coordinate-wise refinement
stalls; the separation constraint on the starts keeps competing basins
covered when the scan's top values cluster on one flat ridge.
"""

from __future__ import annotations

import math

import numpy as np

__all__ = ["OptimizerSettings", "max_on_sphere", "refine_on_sphere"]

_SQ2 = 1.0 / math.sqrt(2.0)
# probe offsets in a 2-dim tangent slice: axis steps plus diagonals
_PROBES_2D = np.array([
    [1.0, 0.0], [-1.0, 0.0], [0.0, 1.0], [0.0, -1.0],
    [_SQ2, _SQ2], [_SQ2, -_SQ2], [-_SQ2, _SQ2], [-_SQ2, -_SQ2],
])


class OptimizerSettings:
    """Scan density and refinement controls for sphere maximization."""

    def __init__(self, starts: int = 4, step: float = 0.2,
                 min_step: float = 1e-9, max_iter: int = 70,
                 separation: float = 0.25):
        if starts < 1:
            raise ValueError("starts must be >= 1")
        self.starts = starts
        self.step = step
        self.min_step = min_step
        self.max_iter = max_iter
        self.separation = separation  # minimal angle between scan starts


DEFAULT_SETTINGS = OptimizerSettings()


def _tangent_basis(V):
    """One or two orthonormal tangent directions per row of V."""
    n = V.shape[1]
    if n == 2:
        return np.column_stack([-V[:, 1], V[:, 0]]), None
    h = np.zeros_like(V)
    h[np.arange(len(V)), np.argmin(np.abs(V), axis=1)] = 1.0
    t1 = h - np.einsum("ij,ij->i", h, V)[:, None] * V
    t1 /= np.linalg.norm(t1, axis=1)[:, None]
    if n == 3:
        return t1, np.cross(V, t1)
    g = np.roll(h, 1, axis=1)
    t2 = g - np.einsum("ij,ij->i", g, V)[:, None] * V - np.einsum("ij,ij->i", g, t1)[:, None] * t1
    nrm = np.linalg.norm(t2, axis=1)
    bad = nrm < 1e-9
    if bad.any():
        g2 = np.roll(h, 2, axis=1)
        alt = g2 - np.einsum("ij,ij->i", g2, V)[:, None] * V - np.einsum("ij,ij->i", g2, t1)[:, None] * t1
        t2 = np.where(bad[:, None], alt, t2)
        nrm = np.linalg.norm(t2, axis=1)
    return t1, t2 / nrm[:, None]


def refine_on_sphere(X, V0, F0, objective, settings: OptimizerSettings = DEFAULT_SETTINGS):
    """Pattern-search refinement of per-row maximizers.

    X: (M, n) query rows; V0/F0: start points and their objective values;
    objective(X_rows, V_rows) -> (M,) values.  Returns refined (F, V).
    Rows whose step has shrunk below min_step stop being evaluated.
    """
    best_v = V0.copy()
    best_f = F0.copy()
    M, n = X.shape
    s = np.full(M, settings.step)
    probes = np.array([[1.0], [-1.0]]) if n == 2 else _PROBES_2D
    P = len(probes)
    for _ in range(settings.max_iter):
        active = np.flatnonzero(s >= settings.min_step)
        if len(active) == 0:
            break
        va = best_v[active]
        sa = s[active]
        t1, t2 = _tangent_basis(va)
        if t2 is None:
            dirs = probes[None, :, 0, None] * t1[:, None, :]
        else:
            dirs = (probes[None, :, 0, None] * t1[:, None, :]
                    + probes[None, :, 1, None] * t2[:, None, :])
        cand = (np.cos(sa)[:, None, None] * va[:, None, :]
                + np.sin(sa)[:, None, None] * dirs)
        cand /= np.linalg.norm(cand, axis=2)[:, :, None]
        fv = objective(np.repeat(X[active], P, axis=0),
                       cand.reshape(-1, n)).reshape(len(active), P)
        j = fv.argmax(axis=1)
        fb = fv[np.arange(len(active)), j]
        improved = fb > best_f[active]
        rows = active[improved]
        best_v[rows] = cand[improved, j[improved]]
        best_f[rows] = fb[improved]
        s[active] = np.where(improved, np.minimum(sa * 2.0, settings.step), sa * 0.5)
    return best_f, best_v


def _diverse_starts(OV, scan_nodes, k, separation):
    """Per-row indices of the k best scan nodes, greedily kept at least
    `separation` radians apart so competing basins all get a start."""
    M = OV.shape[0]
    if k == 1:
        return OV.argmax(axis=1)[:, None]
    pool = min(max(8 * k, 24), OV.shape[1])
    part = np.argpartition(-OV, pool - 1, axis=1)[:, :pool]
    order = np.take_along_axis(OV, part, axis=1).argsort(axis=1)[:, ::-1]
    cand = np.take_along_axis(part, order, axis=1)  # (M, pool) best-first
    cos_thresh = math.cos(separation)
    chosen = np.empty((M, k), dtype=int)
    chosen[:, 0] = cand[:, 0]
    # pairwise dots of each candidate against already chosen nodes
    blocked = np.zeros((M, pool), dtype=bool)
    for slot in range(1, k):
        last = scan_nodes[chosen[:, slot - 1]]
        dots = np.abs(np.einsum("mpj,mj->mp", scan_nodes[cand], last))
        blocked |= dots > cos_thresh
        # first unblocked candidate per row; fall back to the next-best value
        free = ~blocked
        has = free.any(axis=1)
        first = np.where(has, free.argmax(axis=1), np.minimum(slot, pool - 1))
        chosen[:, slot] = cand[np.arange(M), first]
        blocked[np.arange(M), first] = True
    return chosen


def max_on_sphere(X, objective, scan_nodes, scan_values,
                  settings: OptimizerSettings = DEFAULT_SETTINGS,
                  pairing: str = "sine"):
    """max over v of the objective for each unit row x of X.

    The coarse stage evaluates pairing(x, node) * scan_values[node] over
    all scan nodes (scan_values are the per-node factors, typically a
    cached radial function); refinement then runs from angularly separated
    top scan nodes using the exact `objective`.
    """
    X = np.asarray(X, dtype=float)
    M, n = X.shape
    k = settings.starts
    starts = np.empty((M, k), dtype=int)
    for i0 in range(0, M, 2048):
        D = X[i0:i0 + 2048] @ scan_nodes.T
        if pairing == "sine":
            B = np.sqrt(np.clip(1.0 - D * D, 0.0, None))
        elif pairing == "cosine":
            B = np.clip(D, 0.0, None)
        else:
            raise ValueError(f"unknown pairing {pairing!r}")
        OV = B * scan_values[None, :]
        starts[i0:i0 + 2048] = _diverse_starts(OV, scan_nodes, k, settings.separation)

    best_f = np.full(M, -np.inf)
    best_v = np.empty_like(X)
    for j in range(k):
        v0 = scan_nodes[starts[:, j]]
        f0 = objective(X, v0)
        f, v = refine_on_sphere(X, v0, f0, objective, settings)
        take = f > best_f
        best_f = np.where(take, f, best_f)
        best_v = np.where(take[:, None], v, best_v)
    return best_f, best_v
