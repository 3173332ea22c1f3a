"""Batch front-end: configure, run, and report solves and check suites.

Subcommands
-----------
solve        run a configured solve; writes u.nsf1, p.nsf1, report.csv,
             diagnostics.csv (when enabled) plus the resolved config.
diagnose     recompute the diagnostics bundle from NSF1 field files.
kernel-check run the kernel invariant suite at seeded random points.
lemma-check  run the Riesz-decay suite over a parameter grid; CSV out.

Exit codes: 0 success, 1 usage/config error, 2 reported numerical
failure (non-convergence or quadrature breakdown).  Config files are
flat `key = value` text with [sections]; unknown sections or keys are
errors, and every solve report embeds the fully resolved configuration
so archived runs are reproducible.  NS_THREADS caps internal FFT
parallelism (0 or unset = auto).
"""

from __future__ import annotations

import argparse
import configparser
import csv
import math
import sys
import warnings
from dataclasses import dataclass
from pathlib import Path

import numpy as np

from . import kernel
from .convolve import build_plan, PlanMemoryError
from .diagnostics import (
    DiagnosticsParams,
    bundle_csv_rows,
    full_bundle,
    write_bundle_csv,
)
from .field import (
    GridSpec,
    ScalarField,
    VectorField,
    gradient,
    read_nsf1,
    write_nsf1,
)
from .lemma_oracle import (
    LemmaParams,
    QuadratureError,
    default_param_grid,
    verify_decay,
)
from .solver import SolverConfig, solve as run_solve

EXIT_OK = 0
EXIT_USAGE = 1
EXIT_NUMERICAL = 2

SLOPE_BAND = 0.15
LOG_R2_MIN = 0.99


class ConfigError(ValueError):
    """Configuration rejected; message names the offending key."""


# --- config parsing ---------------------------------------------------------

_SCHEMA = {
    "grid": {"dim", "points", "half_width"},
    "force": {"family", "amplitude", "width", "direction", "center", "radius", "separation", "file"},
    "solver": {"schedule", "damping", "residual_tol", "max_iters_per_stage", "divergence_guard"},
    "diagnostics": {"enabled", "shells", "fit_window", "gradient_mode", "theta_r"},
    "output": {"directory"},
}


@dataclass
class RunConfig:
    grid: GridSpec
    force_spec: dict
    solver: SolverConfig
    diagnostics_enabled: bool
    diagnostics: DiagnosticsParams
    output_dir: Path
    resolved: list


def _parse_scalar(section, key, raw, kind, constraint=""):
    try:
        return kind(raw)
    except ValueError:
        want = {int: "an integer", float: "a number"}[kind]
        raise ConfigError(f"[{section}] {key} = {raw!r}: must be {want} {constraint}".rstrip())


def _parse_floats(section, key, raw, count=None):
    try:
        vals = tuple(float(x) for x in raw.replace(",", " ").split())
    except ValueError:
        raise ConfigError(f"[{section}] {key} = {raw!r}: must be a list of numbers")
    if count is not None and len(vals) != count:
        raise ConfigError(f"[{section}] {key}: expected {count} numbers, got {len(vals)}")
    return vals


def _parse_bool(section, key, raw):
    low = raw.strip().lower()
    if low in ("true", "yes", "1", "on"):
        return True
    if low in ("false", "no", "0", "off"):
        return False
    raise ConfigError(f"[{section}] {key} = {raw!r}: must be a boolean (true/false)")


def parse_config(path) -> RunConfig:
    """Parse and validate a solve configuration file.

    Every failure names the offending section/key and the violated
    constraint.
    """
    parser = configparser.ConfigParser(inline_comment_prefixes=("#", ";"), interpolation=None)
    parser.optionxform = str
    path = Path(path)
    if not path.exists():
        raise ConfigError(f"config file not found: {path}")
    try:
        parser.read_string(path.read_text(), source=str(path))
    except configparser.Error as exc:
        raise ConfigError(f"config syntax error: {exc}")

    for section in parser.sections():
        if section not in _SCHEMA:
            raise ConfigError(f"unknown section [{section}]")
        for key in parser[section]:
            if key not in _SCHEMA[section]:
                raise ConfigError(f"unknown key {key!r} in section [{section}]")

    def get(section, key, default=None):
        if parser.has_option(section, key):
            return parser.get(section, key)
        return default

    for required in ("grid", "force", "output"):
        if not parser.has_section(required):
            raise ConfigError(f"missing required section [{required}]")
    for key in ("dim", "points", "half_width"):
        if get("grid", key) is None:
            raise ConfigError(f"[grid] {key} is required")

    dim = _parse_scalar("grid", "dim", get("grid", "dim"), int, ">= 3")
    points = _parse_scalar("grid", "points", get("grid", "points"), int, "(even, positive)")
    half_width = _parse_scalar("grid", "half_width", get("grid", "half_width"), float, "> 0")
    try:
        grid = GridSpec(dim=dim, points_per_axis=points, half_width=half_width)
    except ValueError as exc:
        raise ConfigError(f"[grid]: {exc}")

    family = get("force", "family")
    if family is None:
        raise ConfigError("[force] family is required")
    force_spec = {"family": family}
    if family == "file":
        file_path = get("force", "file")
        if file_path is None:
            raise ConfigError("[force] file is required when family = file")
        force_spec["file"] = file_path
    elif family in ("gaussian-bump", "ring", "dipole"):
        amplitude = get("force", "amplitude")
        width = get("force", "width")
        if amplitude is None or width is None:
            raise ConfigError(f"[force] amplitude and width are required for family {family}")
        force_spec["amplitude"] = _parse_scalar("force", "amplitude", amplitude, float)
        w = _parse_scalar("force", "width", width, float)
        if w <= 0:
            raise ConfigError(f"[force] width = {w}: must be > 0")
        force_spec["width"] = w
        direction = _parse_scalar("force", "direction", get("force", "direction", "0"), int)
        if not (0 <= direction < dim):
            raise ConfigError(f"[force] direction = {direction}: must lie in [0, {dim})")
        force_spec["direction"] = direction
        center_raw = get("force", "center")
        force_spec["center"] = (
            _parse_floats("force", "center", center_raw, dim) if center_raw else (0.0,) * dim
        )
        if family == "ring":
            force_spec["radius"] = _parse_scalar("force", "radius", get("force", "radius", "1.5"), float)
        if family == "dipole":
            force_spec["separation"] = _parse_scalar(
                "force", "separation", get("force", "separation", "1.5"), float
            )
    else:
        raise ConfigError(
            f"[force] family = {family!r}: must be gaussian-bump, ring, dipole, or file"
        )

    solver_kwargs = {}
    if parser.has_section("solver"):
        raw = get("solver", "schedule")
        if raw is not None:
            solver_kwargs["homotopy_schedule"] = _parse_floats("solver", "schedule", raw)
        for key, kind in (
            ("damping", float),
            ("residual_tol", float),
            ("max_iters_per_stage", int),
            ("divergence_guard", float),
        ):
            raw = get("solver", key)
            if raw is not None:
                solver_kwargs[key] = _parse_scalar("solver", key, raw, kind)
    try:
        solver_config = SolverConfig(**solver_kwargs)
    except ValueError as exc:
        raise ConfigError(f"[solver]: {exc}")

    diag_enabled = True
    diag_kwargs = {}
    if parser.has_section("diagnostics"):
        raw = get("diagnostics", "enabled")
        if raw is not None:
            diag_enabled = _parse_bool("diagnostics", "enabled", raw)
        raw = get("diagnostics", "shells")
        if raw is not None:
            diag_kwargs["shells"] = _parse_scalar("diagnostics", "shells", raw, int, ">= 4")
        raw = get("diagnostics", "fit_window")
        if raw is not None:
            window = _parse_floats("diagnostics", "fit_window", raw, 2)
            if not (0 < window[0] < window[1] <= 1):
                raise ConfigError(
                    f"[diagnostics] fit_window = {window}: need 0 < lo < hi <= 1 (fractions of L)"
                )
            diag_kwargs["fit_window"] = window
        raw = get("diagnostics", "gradient_mode")
        if raw is not None:
            if raw not in ("hybrid", "fd"):
                raise ConfigError(f"[diagnostics] gradient_mode = {raw!r}: must be hybrid or fd")
            diag_kwargs["gradient_mode"] = raw
        raw = get("diagnostics", "theta_r")
        if raw is not None and raw != "auto":
            diag_kwargs["theta_r"] = _parse_scalar("diagnostics", "theta_r", raw, float, "> n/2")
    try:
        diag_params = DiagnosticsParams(**diag_kwargs)
    except ValueError as exc:
        raise ConfigError(f"[diagnostics]: {exc}")

    out_dir = get("output", "directory")
    if out_dir is None:
        raise ConfigError("[output] directory is required")

    resolved = [("grid.dim", dim), ("grid.points", points), ("grid.half_width", half_width)]
    resolved += [(f"force.{k}", v) for k, v in force_spec.items()]
    resolved += [
        ("solver.schedule", " ".join(str(t) for t in solver_config.homotopy_schedule)),
        ("solver.damping", solver_config.damping),
        ("solver.residual_tol", solver_config.residual_tol),
        ("solver.max_iters_per_stage", solver_config.max_iters_per_stage),
        ("solver.divergence_guard", solver_config.divergence_guard),
        ("diagnostics.enabled", diag_enabled),
        ("diagnostics.shells", diag_params.shells),
        ("diagnostics.fit_window", f"{diag_params.fit_window[0]} {diag_params.fit_window[1]}"),
        ("diagnostics.gradient_mode", diag_params.gradient_mode),
        ("diagnostics.theta_r", "auto" if diag_params.theta_r is None else diag_params.theta_r),
        ("output.directory", out_dir),
    ]
    return RunConfig(
        grid=grid,
        force_spec=force_spec,
        solver=solver_config,
        diagnostics_enabled=diag_enabled,
        diagnostics=diag_params,
        output_dir=Path(out_dir),
        resolved=resolved,
    )


# --- built-in force families ------------------------------------------------


def build_force(grid: GridSpec, spec: dict) -> VectorField:
    """Construct a force field from a validated force spec."""
    family = spec["family"]
    if family == "file":
        f = read_nsf1(spec["file"])
        if isinstance(f, ScalarField):
            raise ConfigError(f"[force] file {spec['file']}: holds a scalar field, need a vector")
        if f.grid != grid:
            raise ConfigError(
                f"[force] file grid {f.grid} does not match configured grid {grid}"
            )
        return f

    amp, w = spec["amplitude"], spec["width"]
    center = np.asarray(spec["center"], dtype=float)
    coords = grid.coord_grids()
    shifted = [c - c0 for c, c0 in zip(coords, center)]
    r2 = np.zeros(grid.shape)
    for c in shifted:
        r2 = r2 + c**2
    data = np.zeros((grid.dim,) + grid.shape)
    if family == "gaussian-bump":
        data[spec["direction"]] = amp * np.exp(-r2 / w**2)
    elif family == "dipole":
        # opposite bumps offset along the force direction: zero net force
        axis = spec["direction"]
        half = spec["separation"] / 2.0
        r2p = r2 - 2.0 * half * shifted[axis] + half**2
        r2m = r2 + 2.0 * half * shifted[axis] + half**2
        data[axis] = amp * (np.exp(-r2p / w**2) - np.exp(-r2m / w**2))
    elif family == "ring":
        # azimuthal swirl in the plane of axes (direction, direction+1)
        a = spec["direction"]
        b = (a + 1) % grid.dim
        prof = amp * np.exp(-((np.sqrt(r2) - spec["radius"]) ** 2) / w**2)
        data[a] = -shifted[b] * prof
        data[b] = shifted[a] * prof
    else:
        raise ConfigError(f"[force] family = {family!r} not implemented")
    return VectorField(grid, data)


# --- solve ------------------------------------------------------------------


def cmd_solve(args) -> int:
    try:
        cfg = parse_config(args.config)
    except ConfigError as exc:
        print(f"config error: {exc}", file=sys.stderr)
        return EXIT_USAGE

    try:
        force = build_force(cfg.grid, cfg.force_spec)
    except (ConfigError, ValueError) as exc:
        print(f"config error: {exc}", file=sys.stderr)
        return EXIT_USAGE

    include = ["velocity", "pressure"]
    if cfg.diagnostics_enabled and cfg.diagnostics.gradient_mode == "hybrid":
        include.append("gradient")
    try:
        plan = build_plan(cfg.grid, include=include)
    except PlanMemoryError as exc:
        print(f"plan error: {exc}", file=sys.stderr)
        return EXIT_NUMERICAL

    with warnings.catch_warnings():
        warnings.simplefilter("ignore", RuntimeWarning)
        report = run_solve(
            plan,
            force,
            cfg.solver,
            diagnostics=cfg.diagnostics if cfg.diagnostics_enabled else None,
        )

    out = cfg.output_dir
    out.mkdir(parents=True, exist_ok=True)
    write_nsf1(out / "u.nsf1", report.u)
    write_nsf1(out / "p.nsf1", report.p)
    write_nsf1(out / "f.nsf1", force)

    rows = [("config", name, value) for name, value in cfg.resolved]
    rows.append(("run", "converged", report.converged))
    if report.failure:
        rows.append(("run", "failure", report.failure))
    for w in report.warnings:
        rows.append(("run", "warning", w))
    for k, v in report.truncation.items():
        rows.append(("truncation", k, repr(v) if isinstance(v, float) else v))
    for k, v in report.weighted_norms.items():
        rows.append(("norms", k, repr(v)))
    for idx, st in enumerate(report.stages):
        rows.append((f"stage{idx}", "t", repr(st.t)))
        rows.append((f"stage{idx}", "iterations", st.iterations))
        rows.append((f"stage{idx}", "omega", repr(st.omega)))
        rows.append((f"stage{idx}", "restarts", st.restarts))
        rows.append((f"stage{idx}", "converged", st.converged))
        rows.append((f"stage{idx}", "final_norm", repr(st.final_norm)))
        for it, res in enumerate(st.residuals):
            rows.append((f"stage{idx}", f"residual{it}", repr(res)))
    with open(out / "report.csv", "w", newline="") as fh:
        writer = csv.writer(fh)
        writer.writerow(["section", "name", "value"])
        writer.writerows(rows)

    if report.diagnostics is not None:
        write_bundle_csv(report.diagnostics, out / "diagnostics.csv")

    for w in report.warnings:
        print(f"warning: {w}", file=sys.stderr)
    if not report.converged:
        print(f"non-convergence: {report.failure}", file=sys.stderr)
        return EXIT_NUMERICAL
    print(f"converged; outputs in {out}")
    return EXIT_OK


# --- diagnose ---------------------------------------------------------------


def cmd_diagnose(args) -> int:
    try:
        fields = {}
        for name, path in (("u", args.u_file), ("p", args.p_file), ("f", args.f_file)):
            fields[name] = read_nsf1(path)
    except (ValueError, OSError) as exc:
        print(f"field error: {exc}", file=sys.stderr)
        return EXIT_USAGE

    u, p, f = fields["u"], fields["p"], fields["f"]
    if not isinstance(u, VectorField) or not isinstance(f, VectorField) or not isinstance(p, ScalarField):
        print("field error: u and f must be vector fields, p a scalar field", file=sys.stderr)
        return EXIT_USAGE
    grids = {("u", u.grid), ("p", p.grid), ("f", f.grid)}
    if len({g for _, g in grids}) != 1:
        shapes = ", ".join(
            f"{name}: n={g.dim} N={g.points_per_axis} L={g.half_width}" for name, g in sorted(grids)
        )
        print(f"field error: grids differ ({shapes})", file=sys.stderr)
        return EXIT_USAGE

    params = DiagnosticsParams(gradient_mode=args.gradient_mode)
    plan = None
    if params.gradient_mode == "hybrid":
        try:
            plan = build_plan(u.grid, include=("gradient",))
        except PlanMemoryError as exc:
            print(f"plan error: {exc}", file=sys.stderr)
            return EXIT_NUMERICAL
    try:
        bundle = full_bundle(u, p, f, params, plan=plan)
    except ValueError as exc:
        print(f"diagnostics error: {exc}", file=sys.stderr)
        return EXIT_NUMERICAL
    out = Path(args.out)
    out.parent.mkdir(parents=True, exist_ok=True)
    write_bundle_csv(bundle, out)
    print(f"diagnostics written to {out}")
    return EXIT_OK


# --- kernel-check -----------------------------------------------------------


def _kernel_checks(n: int, samples: int, seed: int):
    """Invariant suite at seeded random points: (name, worst value, bound)."""
    rng = np.random.default_rng(seed)
    pts = rng.standard_normal((samples, n))
    pts /= np.linalg.norm(pts, axis=1, keepdims=True)
    pts *= rng.uniform(1.0, 3.0, size=(samples, 1))

    worst = {
        "u_symmetric": 0.0,
        "u_even_p_odd": 0.0,
        "homogeneity": 0.0,
        "divergence_trace": 0.0,
        "grad_fd_ratio": 0.0,
        "pde_residual_ratio": 0.0,
        "symbol_projector": 0.0,
    }
    for x in pts:
        km = kernel.eval_kernel(x, n)
        scale = float(np.max(np.abs(km.u_tensor)))
        worst["u_symmetric"] = max(
            worst["u_symmetric"], float(np.max(np.abs(km.u_tensor - km.u_tensor.T))) / scale
        )
        km_neg = kernel.eval_kernel(-x, n)
        parity = max(
            float(np.max(np.abs(km_neg.u_tensor - km.u_tensor))) / scale,
            float(np.max(np.abs(km_neg.p_vector + km.p_vector))) / float(np.max(np.abs(km.p_vector))),
            float(np.max(np.abs(km_neg.grad_tensor + km.grad_tensor)))
            / float(np.max(np.abs(km.grad_tensor))),
        )
        worst["u_even_p_odd"] = max(worst["u_even_p_odd"], parity)
        lam = 2.0
        km_s = kernel.eval_kernel(lam * x, n)
        homo = max(
            float(np.max(np.abs(km_s.u_tensor - lam ** (2 - n) * km.u_tensor))) / scale,
            float(np.max(np.abs(km_s.p_vector - lam ** (1 - n) * km.p_vector)))
            / float(np.max(np.abs(km.p_vector))),
            float(np.max(np.abs(km_s.grad_tensor - lam ** (1 - n) * km.grad_tensor)))
            / float(np.max(np.abs(km.grad_tensor))),
        )
        worst["homogeneity"] = max(worst["homogeneity"], homo)
        div = np.einsum("iij->j", km.grad_tensor)
        worst["divergence_trace"] = max(
            worst["divergence_trace"],
            float(np.max(np.abs(div))) / float(np.max(np.abs(km.grad_tensor))),
        )
        h = 1e-3 * float(np.linalg.norm(x))
        fd = np.empty((n, n, n))
        for k in range(n):
            e = np.zeros(n)
            e[k] = h
            fd[k] = (kernel.eval_kernel(x + e, n).u_tensor - kernel.eval_kernel(x - e, n).u_tensor) / (
                2 * h
            )
        err1 = float(np.max(np.abs(fd - km.grad_tensor)))
        fd2 = np.empty((n, n, n))
        for k in range(n):
            e = np.zeros(n)
            e[k] = h / 2
            fd2[k] = (
                kernel.eval_kernel(x + e, n).u_tensor - kernel.eval_kernel(x - e, n).u_tensor
            ) / h
        err2 = float(np.max(np.abs(fd2 - km.grad_tensor)))
        ratio = err1 / err2 if err2 > 0 else 4.0
        worst["grad_fd_ratio"] = max(worst["grad_fd_ratio"], abs(ratio - 4.0))
        r1 = np.linalg.norm(kernel.kernel_pde_residual(x, n, h=1e-2))
        r2 = np.linalg.norm(kernel.kernel_pde_residual(x, n, h=5e-3))
        ratio = r1 / r2 if r2 > 0 else 4.0
        worst["pde_residual_ratio"] = max(worst["pde_residual_ratio"], abs(ratio - 4.0))
        mat, pvec = kernel.stokes_symbol(x)
        worst["symbol_projector"] = max(
            worst["symbol_projector"],
            float(np.max(np.abs(mat @ x))) / float(np.max(np.abs(mat))),
            float(np.max(np.abs(mat - mat.T))),
            abs(float(np.imag(pvec @ x)) + 1.0),
        )

    bounds = {
        "u_symmetric": 1e-14,
        "u_even_p_odd": 1e-12,
        "homogeneity": 1e-12,
        "divergence_trace": 1e-12,
        "grad_fd_ratio": 0.6,
        "pde_residual_ratio": 0.6,
        "symbol_projector": 1e-12,
    }
    return [(name, worst[name], bounds[name]) for name in worst]


def cmd_kernel_check(args) -> int:
    if args.dim < 3:
        print(f"error: n >= 3 required, got n={args.dim}", file=sys.stderr)
        return EXIT_USAGE
    checks = _kernel_checks(args.dim, args.samples, args.seed)
    all_ok = True
    print(f"kernel checks: n={args.dim} samples={args.samples} seed={args.seed}")
    print(f"{'check':<24}{'worst':>14}{'bound':>12}  status")
    for name, val, bound in checks:
        ok = val <= bound
        all_ok &= ok
        print(f"{name:<24}{val:>14.3e}{bound:>12.0e}  {'PASS' if ok else 'FAIL'}")
    return EXIT_OK if all_ok else EXIT_NUMERICAL


# --- lemma-check ------------------------------------------------------------


def _load_lemma_params(path):
    rows = []
    with open(path, newline="") as fh:
        reader = csv.DictReader(fh)
        required = {"n", "alpha", "beta"}
        if reader.fieldnames is None or not required.issubset(set(reader.fieldnames)):
            raise ConfigError(f"{path}: header must contain columns n, alpha, beta")
        for line in reader:
            try:
                rows.append(
                    LemmaParams(dim=int(line["n"]), alpha=float(line["alpha"]), beta=float(line["beta"]))
                )
            except ValueError as exc:
                raise ConfigError(f"{path}: row {line}: {exc}")
    if not rows:
        raise ConfigError(f"{path}: no parameter rows")
    return rows


def cmd_lemma_check(args) -> int:
    try:
        if args.params:
            grid = _load_lemma_params(args.params)
        else:
            grid = [p for n in (3, 5) for p in default_param_grid(n)]
    except ConfigError as exc:
        print(f"params error: {exc}", file=sys.stderr)
        return EXIT_USAGE

    rows = []
    all_ok = True
    try:
        for params in grid:
            fit = verify_decay(params)
            if fit.log_flag:
                ok = fit.slope > 0 and fit.r_squared > LOG_R2_MIN
            else:
                ok = abs(fit.slope + fit.gamma_expected) <= SLOPE_BAND
            all_ok &= ok
            rows.append(
                (
                    params.dim,
                    params.alpha,
                    params.beta,
                    fit.gamma_expected,
                    repr(fit.slope),
                    fit.log_flag,
                    repr(fit.r_squared),
                    "pass" if ok else "fail",
                )
            )
    except QuadratureError as exc:
        print(f"quadrature failure: {exc}", file=sys.stderr)
        return EXIT_NUMERICAL

    header = ["n", "alpha", "beta", "gamma_expected", "slope_fitted", "log_flag", "r_squared", "status"]
    if args.out:
        out = Path(args.out)
        out.parent.mkdir(parents=True, exist_ok=True)
        with open(out, "w", newline="") as fh:
            writer = csv.writer(fh)
            writer.writerow(header)
            writer.writerows(rows)
        print(f"lemma suite written to {out}")
    writer = csv.writer(sys.stdout)
    writer.writerow(header)
    writer.writerows(rows)
    return EXIT_OK if all_ok else EXIT_NUMERICAL


# --- entry point ------------------------------------------------------------


def main(argv=None) -> int:
    parser = argparse.ArgumentParser(
        prog="stokesns",
        description="Steady incompressible Navier-Stokes on R^n via Stokes-kernel convolution",
    )
    sub = parser.add_subparsers(dest="command", required=True)

    p_solve = sub.add_parser("solve", help="run a configured solve")
    p_solve.add_argument("config", help="path to the key = value config file")
    p_solve.set_defaults(func=cmd_solve)

    p_diag = sub.add_parser("diagnose", help="recompute diagnostics from NSF1 fields")
    p_diag.add_argument("u_file")
    p_diag.add_argument("p_file")
    p_diag.add_argument("f_file")
    p_diag.add_argument("--out", default="diagnostics.csv")
    p_diag.add_argument("--gradient-mode", choices=("hybrid", "fd"), default="hybrid")
    p_diag.set_defaults(func=cmd_diagnose)

    p_kern = sub.add_parser("kernel-check", help="kernel invariant suite at random points")
    p_kern.add_argument("-n", "--dim", type=int, default=5)
    p_kern.add_argument("--samples", type=int, default=20)
    p_kern.add_argument("--seed", type=int, default=0)
    p_kern.set_defaults(func=cmd_kernel_check)

    p_lem = sub.add_parser("lemma-check", help="Riesz-decay suite over a parameter grid")
    p_lem.add_argument("--params", help="CSV with columns n, alpha, beta (default: built-in grid)")
    p_lem.add_argument("--out", help="write the CSV here as well as stdout")
    p_lem.set_defaults(func=cmd_lemma_check)

    args = parser.parse_args(argv)
    return args.func(args)


if __name__ == "__main__":
    sys.exit(main())
