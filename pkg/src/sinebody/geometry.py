"""Scalar and vector primitives: the sine bracket, projections, and the
normalization constants used by the centroid-body transforms.

The sine bracket [x, y] = sqrt(|x|^2 |y|^2 - (x.y)^2) is the area of the
parallelogram spanned by x and y; it plays the role the inner product plays
for ordinary polarity.  Everything here is a pure function.
"""

from __future__ import annotations

import math

import numpy as np

__all__ = [
    "sine_bracket",
    "proj_perp",
    "rotate_quarter",
    "unit_ball_volume",
    "sine_norm_constant",
    "cosine_norm_constant",
    "bracket_rows",
    "bracket_matrix",
    "random_orthogonal",
    "QUARTER_TURN_2D",
]

#: rotation by +pi/2 in the plane, (x1, x2) -> (-x2, x1)
QUARTER_TURN_2D = np.array([[0.0, -1.0], [1.0, 0.0]])


def _as_vec(x, name="x"):
    v = np.asarray(x, dtype=float)
    if v.ndim != 1 or v.shape[0] < 2:
        raise ValueError(f"{name} must be a vector of dimension >= 2, got shape {v.shape}")
    if not np.all(np.isfinite(v)):
        raise ValueError(f"{name} has non-finite coordinates")
    return v


def sine_bracket(x, y) -> float:
    """Area of the parallelogram spanned by x and y.

    Computed as sqrt(|x|^2 |y|^2 - (x.y)^2) with the radicand clamped at
    zero; near-parallel arguments lose half the working digits, which is
    acceptable at the tolerances used throughout.
    """
    xv = _as_vec(x, "x")
    yv = _as_vec(y, "y")
    if xv.shape != yv.shape:
        raise ValueError(f"dimension mismatch: {xv.shape[0]} vs {yv.shape[0]}")
    d = float(xv @ yv)
    r = float(xv @ xv) * float(yv @ yv) - d * d
    return math.sqrt(r) if r > 0.0 else 0.0


def proj_perp(x, u):
    """Component of x orthogonal to the unit vector u: x - (x.u) u.

    For unit u, |proj_perp(x, u)| equals sine_bracket(x, u).
    """
    xv = _as_vec(x, "x")
    uv = _as_vec(u, "u")
    if xv.shape != uv.shape:
        raise ValueError(f"dimension mismatch: {xv.shape[0]} vs {uv.shape[0]}")
    if abs(float(uv @ uv) - 1.0) > 1e-12:
        raise ValueError("axis u must be a unit vector (|u| = 1 within 1e-12)")
    return xv - (xv @ uv) * uv


def rotate_quarter(x):
    """Rotate a 2-vector by +pi/2: (x1, x2) -> (-x2, x1).

    Satisfies |rotate_quarter(x) . y| = sine_bracket(x, y) in the plane.
    """
    xv = _as_vec(x, "x")
    if xv.shape[0] != 2:
        raise ValueError("rotate_quarter is defined for dimension 2 only")
    return np.array([-xv[1], xv[0]])


def unit_ball_volume(s: float) -> float:
    """Volume pi^(s/2) / Gamma(1 + s/2) of the unit ball, real s >= 0 allowed."""
    if s < 0:
        raise ValueError(f"dimension argument must be >= 0, got {s}")
    return math.pi ** (s / 2.0) / math.gamma(1.0 + s / 2.0)


def _check_np(n: int, p: float):
    if int(n) != n or n < 2:
        raise ValueError(f"dimension n must be an integer >= 2, got {n}")
    if p < 1:
        raise ValueError(f"exponent p must be >= 1, got {p}")


def sine_norm_constant(n: int, p: float) -> float:
    """Normalization making the sine centroid body of the unit ball the ball.

    Equals (n-1) w_{n-1} w_{n+p-2} / ((n+p) w_n w_{n+p-3}) with w_s the
    unit-ball volume at real index s.  Agrees with cosine_norm_constant
    when n = 2.
    """
    _check_np(n, p)
    w = unit_ball_volume
    return (n - 1) * w(n - 1) * w(n + p - 2) / ((n + p) * w(n) * w(n + p - 3))


def cosine_norm_constant(n: int, p: float) -> float:
    """Normalization making the cosine (classical) centroid body of the ball the ball.

    Equals w_{n+p} / (w_2 w_n w_{p-1}).
    """
    _check_np(n, p)
    w = unit_ball_volume
    return w(n + p) / (w(2) * w(n) * w(p - 1))


# ---------------------------------------------------------------------------
# vectorized helpers shared by the quadrature and transform code


def bracket_rows(X, V):
    """Row-wise sine bracket of two (M, n) arrays of unit vectors."""
    d = np.einsum("ij,ij->i", X, V)
    return np.sqrt(np.clip(1.0 - d * d, 0.0, None))


def bracket_matrix(X, V):
    """All-pairs sine bracket: (M, n) x (N, n) unit rows -> (M, N)."""
    d = X @ V.T
    return np.sqrt(np.clip(1.0 - d * d, 0.0, None))


def random_orthogonal(n: int, rng) -> np.ndarray:
    """Haar-ish random rotation from QR of a Gaussian matrix (seeded rng)."""
    g = rng.normal(size=(n, n))
    q, r = np.linalg.qr(g)
    q = q * np.sign(np.diag(r))
    if np.linalg.det(q) < 0:
        q[:, 0] = -q[:, 0]
    return q
