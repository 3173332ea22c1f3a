"""Closed-form Stokes fundamental solution in n dimensions.

The steady Stokes system driven by a point force has the classical
velocity/pressure kernel pair

    U_ij(x) = (1 / (2 n w_n)) * [ delta_ij / ((n-2) |x|^(n-2)) + x_i x_j / |x|^n ]
    P_j(x)  = (1 / (n w_n)) * x_j / |x|^n

with w_n the volume of the unit n-ball.  This module evaluates U, P and
the analytic gradient dU pointwise for any runtime dimension n >= 3,
exposes the Fourier-side symbol of the solve operator, and provides a
finite-difference check that (U, P) solves the homogeneous Stokes system
away from the origin.

All functions are pure; the vectorized `*_values` helpers broadcast over
arbitrary coordinate arrays and are shared with the convolution tables.
"""

from __future__ import annotations

import math
from dataclasses import dataclass

import numpy as np

__all__ = [
    "KernelMatrix",
    "unit_ball_volume",
    "eval_kernel",
    "stokes_symbol",
    "kernel_pde_residual",
]


def unit_ball_volume(n: int) -> float:
    """Volume of the unit ball in R^n: pi^(n/2) / Gamma(n/2 + 1)."""
    return math.pi ** (n / 2) / math.gamma(n / 2 + 1)


@dataclass(frozen=True)
class KernelMatrix:
    """Pointwise values of the Stokes fundamental solution at one x.

    Attributes
    ----------
    u_tensor : (n, n) array
        Velocity kernel U_ij(x); symmetric, even in x, homogeneous of
        degree 2 - n.
    p_vector : (n,) array
        Pressure kernel P_j(x); odd in x, homogeneous of degree 1 - n.
    grad_tensor : (n, n, n) array
        grad_tensor[k, i, j] = d_k U_ij(x); odd in x, homogeneous of
        degree 1 - n.  The trace over (k == i) vanishes for x != 0
        (columns of U are divergence free).
    """

    u_tensor: np.ndarray
    p_vector: np.ndarray
    grad_tensor: np.ndarray


def _check_dim(n: int) -> None:
    if n < 3:
        raise ValueError(f"dimension must be >= 3, got n={n}")


def velocity_values(n, i, j, coords, r2):
    """U_ij evaluated on coordinate arrays.

    `coords` is a sequence of n broadcastable arrays, `r2` the dense
    squared radius.  No singularity handling: the caller masks r2 == 0.
    """
    c = 1.0 / (2 * n * unit_ball_volume(n))
    out = c * coords[i] * coords[j] * r2 ** (-n / 2)
    if i == j:
        out = out + (c / (n - 2)) * r2 ** ((2 - n) / 2)
    return out


def pressure_values(n, j, coords, r2):
    """P_j evaluated on coordinate arrays (see `velocity_values`)."""
    return (1.0 / (n * unit_ball_volume(n))) * coords[j] * r2 ** (-n / 2)


def gradient_values(n, k, i, j, coords, r2):
    """d_k U_ij evaluated on coordinate arrays (see `velocity_values`)."""
    c = 1.0 / (2 * n * unit_ball_volume(n))
    rmn = r2 ** (-n / 2)
    out = -n * coords[i] * coords[j] * coords[k] * r2 ** (-(n + 2) / 2)
    if i == k:
        out = out + coords[j] * rmn
    if j == k:
        out = out + coords[i] * rmn
    if i == j:
        out = out - coords[k] * rmn
    return c * out


def eval_kernel(x, n: int | None = None) -> KernelMatrix:
    """Evaluate (U, P, dU) at a single point x != 0.

    Parameters
    ----------
    x : array-like, shape (n,)
        Evaluation point; must be nonzero.
    n : int, optional
        Dimension; defaults to len(x) and must match it.

    Returns
    -------
    KernelMatrix
    """
    x = np.asarray(x, dtype=float)
    if x.ndim != 1:
        raise ValueError("x must be a 1-d point")
    if n is None:
        n = x.size
    elif n != x.size:
        raise ValueError(f"point has {x.size} coordinates but n={n}")
    _check_dim(n)
    r2 = float(x @ x)
    if r2 == 0.0:
        raise ValueError("kernel is singular at x = 0")
    coords = [x[a] for a in range(n)]
    u = np.empty((n, n))
    p = np.empty(n)
    g = np.empty((n, n, n))
    for i in range(n):
        for j in range(i, n):
            u[i, j] = velocity_values(n, i, j, coords, r2)
            u[j, i] = u[i, j]
    for j in range(n):
        p[j] = pressure_values(n, j, coords, r2)
    for k in range(n):
        for i in range(n):
            for j in range(i, n):
                g[k, i, j] = gradient_values(n, k, i, j, coords, r2)
                g[k, j, i] = g[k, i, j]
    return KernelMatrix(u_tensor=u, p_vector=p, grad_tensor=g)


def stokes_symbol(xi):
    """Fourier symbol of the velocity/pressure solve at frequency xi != 0.

    Returns the pair (M, q) with M = (I - xi xi^T / |xi|^2) / |xi|^2, the
    projected inverse-Laplacian matrix applied to the transformed source,
    and q = -1j * xi / |xi|^2 such that the pressure transform is q . g_hat.

    M is symmetric positive semi-definite and annihilates xi.
    """
    xi = np.asarray(xi, dtype=float)
    s2 = float(xi @ xi)
    if s2 == 0.0:
        raise ValueError("zero frequency has no symbol (zero mode handled by caller)")
    n = xi.size
    mat = (np.eye(n) - np.outer(xi, xi) / s2) / s2
    return mat, -1j * xi / s2


def kernel_pde_residual(x, n: int | None = None, h: float = 1e-2) -> np.ndarray:
    """Second-order finite-difference evaluation of -Lap U_.j + grad P_j at x.

    The exact kernels satisfy the homogeneous Stokes system away from the
    origin, so the returned (n, n) matrix residual[i, j] is pure stencil
    truncation error and shrinks like h^2 at fixed x.

    Requires |x| > 4h so every stencil point stays away from the
    singularity.
    """
    x = np.asarray(x, dtype=float)
    if n is None:
        n = x.size
    _check_dim(n)
    if h <= 0:
        raise ValueError("h must be positive")
    if math.sqrt(float(x @ x)) <= 4 * h:
        raise ValueError(f"|x| must exceed 4h = {4 * h} (point too close to the singularity)")

    u0 = eval_kernel(x, n).u_tensor
    lap = np.zeros((n, n))
    gradp = np.zeros((n, n))
    for a in range(n):
        e = np.zeros(n)
        e[a] = h
        plus = eval_kernel(x + e, n)
        minus = eval_kernel(x - e, n)
        lap += (plus.u_tensor - 2 * u0 + minus.u_tensor) / h**2
        gradp[a, :] = (plus.p_vector - minus.p_vector) / (2 * h)
    return -lap + gradp
