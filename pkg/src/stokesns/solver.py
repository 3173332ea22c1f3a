"""Damped Picard iteration with homotopy continuation.

The solve follows the one-parameter family of maps

    F(t, v) = velocity potential of (t f - (v . grad) v),   t in [0, 1],

from the trivially solvable t = 0 endpoint to the full momentum balance
at t = 1, warm-starting every stage from the previous one.  Each stage
runs the relaxed substitution v <- (1 - w) v + w F(t, v); on residual
growth beyond the divergence guard the stage restarts with w halved.

Non-convergence is an informative outcome, not a crash: when the damping
floor is reached the report carries the failing stage, the last residual,
and the partial fields.  Large forces sit outside the small-data
contraction regime and the iteration is simply not guaranteed to reach
the fixed point there.
"""

from __future__ import annotations

import math
import warnings
from dataclasses import dataclass

import numpy as np

from . import diagnostics as diag
from .convolve import ConvolutionPlan, apply_nonlinearity, stokes_solve, velocity_potential
from .field import ScalarField, VectorField, gradient, lp_norm, weighted_sup_norm

__all__ = ["SolverConfig", "StageTrace", "SolveReport", "picard_step", "solve"]

_OMEGA_FLOOR = 1.0 / 64.0


@dataclass(frozen=True)
class SolverConfig:
    """Continuation schedule and iteration controls."""

    homotopy_schedule: tuple = (0.25, 0.5, 0.75, 1.0)
    damping: float = 1.0
    residual_tol: float = 1e-8
    max_iters_per_stage: int = 200
    divergence_guard: float = 10.0

    def __post_init__(self):
        sched = tuple(float(t) for t in self.homotopy_schedule)
        object.__setattr__(self, "homotopy_schedule", sched)
        if not sched or sched[-1] != 1.0:
            raise ValueError("homotopy schedule must end at t = 1")
        if any(t <= 0 for t in sched) or any(b <= a for a, b in zip(sched, sched[1:])):
            raise ValueError("homotopy schedule must be strictly increasing within (0, 1]")
        if not (0.0 < self.damping <= 1.0):
            raise ValueError(f"damping must lie in (0, 1], got {self.damping}")
        if not (self.residual_tol > 0):
            raise ValueError(f"residual_tol must be positive, got {self.residual_tol}")
        if self.max_iters_per_stage < 1:
            raise ValueError("max_iters_per_stage must be at least 1")
        if self.divergence_guard <= 1:
            raise ValueError(f"divergence_guard must exceed 1, got {self.divergence_guard}")


@dataclass
class StageTrace:
    t: float
    iterations: int
    residuals: list
    omega: float
    restarts: int
    converged: bool
    final_norm: float


@dataclass
class SolveReport:
    converged: bool
    stages: list
    u: VectorField
    p: ScalarField
    weighted_norms: dict
    diagnostics: object | None
    truncation: dict
    warnings: list
    failure: str | None = None


def picard_step(plan: ConvolutionPlan, t: float, f: VectorField, v: VectorField):
    """One application of the homotopy map: potentials of t f - (v.grad)v."""
    src = VectorField(f.grid, t * f.data - apply_nonlinearity(v).data)
    return stokes_solve(plan, src)


def _l2(data: np.ndarray, hn: float) -> float:
    return float(np.sqrt(np.sum(data**2) * hn))


def solve(
    plan: ConvolutionPlan,
    f: VectorField,
    config: SolverConfig | None = None,
    diagnostics: diag.DiagnosticsParams | None = None,
) -> SolveReport:
    """Continuation solve of the fixed-point problem u = F(1, u).

    The residual of an iterate v is ||F(t,v) - v||_L2 relative to
    max(||v||_L2, ||linear Stokes solution of f||_L2).  When `diagnostics`
    params are given and the solve converges, the full bundle is attached
    to the report.  Deterministic: identical inputs give bitwise-identical
    reports.
    """
    config = config or SolverConfig()
    grid = f.grid
    if grid != plan.grid:
        raise ValueError("force grid does not match plan grid")
    hn = grid.h**grid.dim

    warn_list = []
    supp_r = diag.support_radius(f)
    if 2.0 * supp_r > grid.half_width / 2.0:
        msg = (
            f"force support diameter {2 * supp_r:.3g} exceeds half_width/2 = "
            f"{grid.half_width / 2:.3g}; box truncation may pollute the far field"
        )
        warn_list.append(msg)
        warnings.warn(msg, RuntimeWarning, stacklevel=2)

    u_lin = velocity_potential(plan, f)
    base_norm = _l2(u_lin.data, hn)

    v = np.zeros_like(f.data)
    stages = []
    converged_all = True
    failure = None

    for t in config.homotopy_schedule:
        stage_start = v.copy()
        omega = config.damping
        restarts = 0
        while True:
            residuals = []
            min_res = math.inf
            v = stage_start.copy()
            stage_converged = False
            for _ in range(config.max_iters_per_stage):
                fv = velocity_potential(
                    plan, VectorField(grid, t * f.data - apply_nonlinearity(VectorField(grid, v)).data)
                )
                num = _l2(fv.data - v, hn)
                den = max(_l2(v, hn), base_norm)
                res = 0.0 if num == 0.0 else (math.inf if den == 0.0 else num / den)
                residuals.append(res)
                if res <= config.residual_tol:
                    stage_converged = True
                    break
                if not math.isfinite(res) or res > config.divergence_guard * min_res:
                    break
                min_res = min(min_res, res)
                v = (1.0 - omega) * v + omega * fv.data
            if stage_converged:
                stages.append(
                    StageTrace(
                        t=t,
                        iterations=len(residuals),
                        residuals=residuals,
                        omega=omega,
                        restarts=restarts,
                        converged=True,
                        final_norm=_l2(v, hn),
                    )
                )
                break
            omega *= 0.5
            restarts += 1
            if omega < _OMEGA_FLOOR:
                stages.append(
                    StageTrace(
                        t=t,
                        iterations=len(residuals),
                        residuals=residuals,
                        omega=omega * 2.0,
                        restarts=restarts,
                        converged=False,
                        final_norm=_l2(v, hn),
                    )
                )
                converged_all = False
                failure = (
                    f"stage t={t:g} failed to converge: last residual "
                    f"{residuals[-1] if residuals else math.nan:.3e} after {restarts} dampings "
                    f"(omega floor {_OMEGA_FLOOR:g}); data likely outside the contraction regime"
                )
                break
        if failure is not None:
            break

    u = VectorField(grid, v)
    t_final = stages[-1].t if stages else config.homotopy_schedule[0]
    _, p = picard_step(plan, 1.0 if converged_all else t_final, f, u)

    grad_fd = gradient(u, order=4)
    n = grid.dim
    grad_mag = np.sqrt(np.sum(np.asarray(grad_fd) ** 2, axis=(0, 1)))
    w_u = weighted_sup_norm(u, n - 3)
    w_grad = float(np.max((1.0 + grid.radius()) ** (n - 2) * grad_mag))
    norms = {
        "weighted_sup_u": w_u,
        "weighted_sup_grad_u": w_grad,
        "cd1": w_u + w_grad,
    }

    bundle = None
    if diagnostics is not None and converged_all:
        bundle = diag.full_bundle(u, p, f, diagnostics, plan=plan)

    fit_window = (diagnostics.fit_window if diagnostics else diag.DiagnosticsParams().fit_window)
    truncation = {
        "L": grid.half_width,
        "N": grid.points_per_axis,
        "h": grid.h,
        "fit_window_lo": fit_window[0] * grid.half_width,
        "fit_window_hi": fit_window[1] * grid.half_width,
        "support_radius": supp_r,
    }

    return SolveReport(
        converged=converged_all,
        stages=stages,
        u=u,
        p=p,
        weighted_norms=norms,
        diagnostics=bundle,
        truncation=truncation,
        warnings=warn_list,
        failure=failure,
    )
