"""Certification diagnostics for a computed steady flow.

Every computable estimate the solver is supposed to honor lives here:
far-field decay exponents of u, grad u, p; the energy identity
int |grad u|^2 = int f.u; the elliptic equation satisfied by the total
head pressure theta = |u|^2/2 + p; the L^r mass of the positive part of
theta; the scale-invariant vorticity quantity
r^(4-n) int_{B_r} |d_i u_j - d_j u_i|^2; and the tail gradient energy
outside balls.  PDE residuals are evaluated with order-4 stencils and
restricted to the interior two-thirds of the box, where neither one-sided
stencils nor box truncation pollute them.

The vorticity square sums over ordered index pairs (both (i,j) and
(j,i)), i.e. twice the usual |curl|^2 normalization in 3-d.
"""

from __future__ import annotations

import csv
import math
from dataclasses import dataclass

import numpy as np

from .convolve import ConvolutionPlan, apply_nonlinearity, velocity_gradient
from .field import (
    DecayProfile,
    GridSpec,
    ScalarField,
    VectorField,
    derivative,
    gradient,
    lp_norm,
    positive_part,
    radial_profile,
)

__all__ = [
    "DiagnosticsParams",
    "DiagnosticsBundle",
    "support_radius",
    "head_pressure",
    "head_pressure_residual",
    "energy_gap",
    "scaled_vorticity",
    "tail_energy",
    "momentum_residual",
    "divergence_ratio",
    "default_theta_r",
    "hybrid_gradient",
    "full_bundle",
    "bundle_csv_rows",
    "write_bundle_csv",
]


@dataclass(frozen=True)
class DiagnosticsParams:
    """Knobs for `full_bundle`; defaults suit desk-scale runs.

    gradient_mode 'hybrid' uses kernel-convolution gradients outside the
    force support and finite differences inside (needs a plan built with
    the gradient tables); 'fd' uses order-4 differences everywhere.
    """

    shells: int = 24
    fit_window: tuple = (0.3, 0.75)
    theta_r: float | None = None
    tail_radii: tuple | None = None
    vorticity_radii: tuple | None = None
    gradient_mode: str = "hybrid"
    interior_fraction: float = 2.0 / 3.0

    def __post_init__(self):
        if self.gradient_mode not in ("hybrid", "fd"):
            raise ValueError(f"gradient_mode must be 'hybrid' or 'fd', got {self.gradient_mode!r}")


@dataclass
class DiagnosticsBundle:
    u_decay: DecayProfile
    grad_u_decay: DecayProfile
    p_decay: DecayProfile
    energy_gap: float
    head_pressure_residual: float
    theta_plus_lr: float
    theta_r: float
    scaled_vorticity_max: float
    vorticity_argmax: tuple
    vorticity_scan: str
    tail_energy: list
    gradient_mode: str


def support_radius(f: VectorField, rel_threshold: float = 1e-12) -> float:
    """Largest |x| where |f| exceeds rel_threshold * max|f| (0 for f == 0)."""
    mag = f.magnitude()
    peak = float(np.max(mag))
    if peak == 0.0:
        return 0.0
    r = f.grid.radius()
    return float(np.max(r[mag > rel_threshold * peak]))


def head_pressure(u: VectorField, p: ScalarField) -> ScalarField:
    """Total head pressure |u|^2 / 2 + p."""
    if u.grid != p.grid:
        raise ValueError("u and p must share one grid")
    return ScalarField(u.grid, 0.5 * np.sum(u.data**2, axis=0) + p.data)


def _interior_mask(grid: GridSpec, fraction: float) -> np.ndarray:
    ax = np.abs(grid.axis_coords()) <= fraction * grid.half_width
    mask = np.ones(grid.shape, dtype=bool)
    for a in range(grid.dim):
        mask &= ax.reshape((1,) * a + (-1,) + (1,) * (grid.dim - a - 1))
    return mask


def _laplacian(data: np.ndarray, h: float) -> np.ndarray:
    out = np.zeros_like(data)
    for a in range(data.ndim):
        out += derivative(data, axis=a, h=h, deriv=2, order=4)
    return out


def _vorticity_square(grad: np.ndarray) -> np.ndarray:
    anti = grad - np.swapaxes(grad, 0, 1)
    return np.sum(anti**2, axis=(0, 1))


def head_pressure_residual(
    u: VectorField, p: ScalarField, f: VectorField, interior_fraction: float = 2.0 / 3.0
) -> float:
    """Relative interior residual of the head-pressure equation.

    Assembles -Lap(theta) + u.grad(theta) against
    -|d_i u_j - d_j u_i|^2 + f.u - div f with order-4 stencils and returns
    ||LHS - RHS|| / (||LHS|| + ||RHS||) over the interior two-thirds
    (0 when both sides vanish).
    """
    grid = u.grid
    theta = head_pressure(u, p).data
    h = grid.h
    grad_theta = np.stack([derivative(theta, a, h, 1, 4) for a in range(grid.dim)])
    lhs = -_laplacian(theta, h) + np.sum(u.data * grad_theta, axis=0)

    grad_u = gradient(u, order=4)
    div_f = np.zeros(grid.shape)
    for a in range(grid.dim):
        div_f += derivative(f.data[a], a, h, 1, 4)
    rhs = -_vorticity_square(grad_u) + np.sum(f.data * u.data, axis=0) - div_f

    mask = _interior_mask(grid, interior_fraction)
    num = float(np.linalg.norm((lhs - rhs)[mask]))
    den = float(np.linalg.norm(lhs[mask]) + np.linalg.norm(rhs[mask]))
    return 0.0 if den == 0.0 else num / den


def energy_gap(u: VectorField, f: VectorField, grad: np.ndarray | None = None) -> float:
    """Relative defect of the energy identity int |grad u|^2 = int f.u."""
    grid = u.grid
    if grad is None:
        grad = gradient(u, order=4)
    hn = grid.h**grid.dim
    dissipation = float(np.sum(grad**2)) * hn
    work = float(np.sum(f.data * u.data)) * hn
    if dissipation == 0.0:
        if float(np.max(f.magnitude())) > 0.0:
            raise ValueError("zero gradient energy with a nonzero force")
        return 0.0
    return abs(dissipation - work) / dissipation


def scaled_vorticity(
    u: VectorField, x0, r: float, grad: np.ndarray | None = None
) -> float:
    """r^(4-n) times the vorticity energy on B_r(x0).

    The r^(4-n) scaling is the natural scale-invariant power for n >= 4;
    for n = 3 the same formula is applied (exponent +1) and callers flag
    it as outside the regime where the smallness criterion is meaningful.
    """
    if r <= 0:
        raise ValueError(f"radius must be positive, got {r}")
    grid = u.grid
    if grad is None:
        grad = gradient(u, order=4)
    vort2 = _vorticity_square(grad)
    coords = grid.coord_grids()
    rr = np.zeros(grid.shape)
    for c, c0 in zip(coords, np.asarray(x0, dtype=float)):
        rr = rr + (c - c0) ** 2
    inside = rr <= r * r
    return float(np.sum(vort2[inside])) * grid.h**grid.dim * r ** (-(grid.dim - 4))


def tail_energy(u: VectorField, radii, grad: np.ndarray | None = None) -> list:
    """Gradient energy outside B_R for each R: [(R, int_{box \\ B_R} |grad u|^2)]."""
    grid = u.grid
    if grad is None:
        grad = gradient(u, order=4)
    energy = np.sum(grad**2, axis=(0, 1))
    rgrid = grid.radius()
    hn = grid.h**grid.dim
    out = []
    for big_r in radii:
        if big_r >= grid.half_width:
            raise ValueError(f"tail radius {big_r} must be below the half-width {grid.half_width}")
        out.append((float(big_r), float(np.sum(energy[rgrid > big_r])) * hn))
    return out


def momentum_residual(
    u: VectorField, p: ScalarField, f: VectorField, interior_fraction: float = 2.0 / 3.0
) -> float:
    """Interior momentum-balance residual relative to the force.

    ||-Lap u + (u.grad)u + grad p - f||_L2(interior) / ||f||_L2 with
    order-4 stencils; ties the convolution solution back to the
    differential form of the momentum equation.
    """
    grid = u.grid
    h = grid.h
    grad_u = gradient(u, order=4)
    mask = _interior_mask(grid, interior_fraction)
    num2 = 0.0
    for j in range(grid.dim):
        res_j = -_laplacian(u.data[j], h)
        for k in range(grid.dim):
            res_j += u.data[k] * grad_u[k, j]
        res_j += derivative(p.data, j, h, 1, 4) - f.data[j]
        num2 += float(np.sum(res_j[mask] ** 2))
    den2 = float(np.sum(f.data**2))
    if den2 == 0.0:
        return 0.0 if num2 == 0.0 else math.inf
    return math.sqrt(num2 / den2)


def divergence_ratio(u: VectorField, grad: np.ndarray | None = None) -> float:
    """||div u||_L2 / ||grad u||_L2 with order-4 stencils (0 for u == 0)."""
    if grad is None:
        grad = gradient(u, order=4)
    div = np.zeros(u.grid.shape)
    for k in range(u.grid.dim):
        div += grad[k, k]
    den = float(np.sqrt(np.sum(grad**2)))
    return 0.0 if den == 0.0 else float(np.sqrt(np.sum(div**2))) / den


def default_theta_r(n: int) -> float:
    """Exponent for the positive-head-pressure L^r diagnostic.

    Midpoint of the admissible q-interval (max{2, n/4}, min{4, n/2})
    mapped through r = nq/(n-2q).  That interval presumes n >= 5; below
    that the formula degenerates, so fall back to r = n/2 + 1 (still
    above the n/2 threshold that makes the quantity meaningful).
    """
    if n < 5:
        return n / 2 + 1.0
    q = (max(2.0, n / 4.0) + min(4.0, n / 2.0)) / 2.0
    return n * q / (n - 2.0 * q)


def hybrid_gradient(plan: ConvolutionPlan, u: VectorField, f: VectorField) -> np.ndarray:
    """grad u from dU-convolution outside supp(f), finite differences inside.

    Differences are accurate near the force support; the kernel
    convolution is faithful in the far field where u is small and
    differences cancel digits.
    """
    g_src = VectorField(u.grid, f.data - apply_nonlinearity(u).data)
    conv = velocity_gradient(plan, g_src)
    fd = gradient(u, order=4)
    inside = u.grid.radius() <= support_radius(f)
    return np.where(inside[None, None], fd, conv)


def _default_tail_radii(grid: GridSpec):
    radii = []
    r = grid.h
    while r < grid.half_width:
        radii.append(r)
        r *= 2.0
    half = grid.half_width / 2.0
    if half < grid.half_width and not any(math.isclose(half, x) for x in radii):
        radii.append(half)
    return sorted(radii)


def _default_vorticity_radii(grid: GridSpec):
    radii = []
    r = grid.h
    while r <= grid.half_width / 2.0:
        radii.append(r)
        r *= 2.0
    return radii or [grid.half_width / 2.0]


def _vorticity_centers(grid: GridSpec):
    vals = (-grid.half_width / 2.0, 0.0, grid.half_width / 2.0)
    centers = [()]
    for _ in range(grid.dim):
        centers = [c + (v,) for c in centers for v in vals]
    return centers


def full_bundle(
    u: VectorField,
    p: ScalarField,
    f: VectorField,
    params: DiagnosticsParams | None = None,
    plan: ConvolutionPlan | None = None,
) -> DiagnosticsBundle:
    """Compute every diagnostic for a solution triple (u, p, f).

    Deterministic: identical inputs yield a bitwise-identical bundle.
    """
    params = params or DiagnosticsParams()
    grid = u.grid
    if p.grid != grid or f.grid != grid:
        raise ValueError("u, p, f must share one grid")
    n = grid.dim

    if params.gradient_mode == "hybrid":
        if plan is None or not plan.has("gradient"):
            raise ValueError("hybrid gradient mode needs a plan built with the gradient tables")
        grad = hybrid_gradient(plan, u, f)
    else:
        grad = gradient(u, order=4)

    u_decay = radial_profile(u, params.shells, params.fit_window)
    grad_mag = ScalarField(grid, np.sqrt(np.sum(grad**2, axis=(0, 1))))
    grad_u_decay = radial_profile(grad_mag, params.shells, params.fit_window)
    p_decay = radial_profile(p, params.shells, params.fit_window)

    gap = energy_gap(u, f, grad=grad)
    hp_res = head_pressure_residual(u, p, f, params.interior_fraction)

    theta_r = params.theta_r if params.theta_r is not None else default_theta_r(n)
    theta_plus = positive_part(head_pressure(u, p))
    theta_lr = lp_norm(theta_plus, theta_r)

    vort_radii = list(params.vorticity_radii or _default_vorticity_radii(grid))
    centers = _vorticity_centers(grid)
    vmax, argmax = 0.0, (centers[0], vort_radii[0])
    for c in centers:
        for r in vort_radii:
            val = scaled_vorticity(u, c, r, grad=grad)
            if val > vmax:
                vmax, argmax = val, (c, r)
    scan = (
        f"centers=lattice(-L/2,0,L/2)^{n} radii={[round(r, 12) for r in vort_radii]}"
        + ("" if n >= 4 else " flag=outside-theorem-regime(n<4)")
    )

    tails = tail_energy(u, params.tail_radii or _default_tail_radii(grid), grad=grad)

    bundle = DiagnosticsBundle(
        u_decay=u_decay,
        grad_u_decay=grad_u_decay,
        p_decay=p_decay,
        energy_gap=gap,
        head_pressure_residual=hp_res,
        theta_plus_lr=theta_lr,
        theta_r=theta_r,
        scaled_vorticity_max=vmax,
        vorticity_argmax=argmax,
        vorticity_scan=scan,
        tail_energy=tails,
        gradient_mode=params.gradient_mode,
    )
    _check_finite(bundle)
    return bundle


def _check_finite(bundle: DiagnosticsBundle) -> None:
    scalars = [
        bundle.u_decay.fitted_exponent,
        bundle.grad_u_decay.fitted_exponent,
        bundle.p_decay.fitted_exponent,
        bundle.energy_gap,
        bundle.head_pressure_residual,
        bundle.theta_plus_lr,
        bundle.scaled_vorticity_max,
    ] + [v for _, v in bundle.tail_energy]
    bad = [v for v in scalars if not math.isfinite(v)]
    if bad:
        raise ValueError(f"non-finite diagnostics: {bad}")


def bundle_csv_rows(bundle: DiagnosticsBundle) -> list:
    """Long-format rows (name, value, params) for CSV serialization."""

    def prof_params(prof: DecayProfile) -> str:
        return (
            f"window=[{prof.fit_window[0]!r},{prof.fit_window[1]!r}];"
            f"fit_rms={prof.fit_residual!r};shells={prof.shell_radii.size}"
        )

    rows = [
        ("u_decay_exponent", repr(bundle.u_decay.fitted_exponent), prof_params(bundle.u_decay)),
        (
            "grad_u_decay_exponent",
            repr(bundle.grad_u_decay.fitted_exponent),
            prof_params(bundle.grad_u_decay) + f";gradient_mode={bundle.gradient_mode}",
        ),
        ("p_decay_exponent", repr(bundle.p_decay.fitted_exponent), prof_params(bundle.p_decay)),
        ("energy_gap", repr(bundle.energy_gap), ""),
        ("head_pressure_residual", repr(bundle.head_pressure_residual), "interior=2/3"),
        ("theta_plus_lr", repr(bundle.theta_plus_lr), f"r={bundle.theta_r!r}"),
        (
            "scaled_vorticity_max",
            repr(bundle.scaled_vorticity_max),
            f"argmax_center={bundle.vorticity_argmax[0]};argmax_radius={bundle.vorticity_argmax[1]!r};"
            + bundle.vorticity_scan,
        ),
    ]
    for big_r, val in bundle.tail_energy:
        rows.append(("tail_energy", repr(val), f"R={big_r!r}"))
    return rows


def write_bundle_csv(bundle: DiagnosticsBundle, path) -> None:
    with open(path, "w", newline="") as fh:
        writer = csv.writer(fh)
        writer.writerow(["name", "value", "params"])
        writer.writerows(bundle_csv_rows(bundle))
