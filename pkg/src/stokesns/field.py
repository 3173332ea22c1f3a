"""Dense scalar/vector fields on a centered regular grid, any rank >= 3.

The grid is cell-centered over the box [-L, L)^n: point k along an axis
sits at (k + 1/2) h - L with h = 2L/N, so the origin is never a sample
point and the midpoint rule sum(h^n * values) partitions the box exactly.

Provides the weighted sup norms used for far-field decay bookkeeping,
midpoint-rule L^p norms over the box / balls / ball complements, a
sampled Morrey norm, radial shell statistics with a power-law fit,
finite-difference gradients of order 2 or 4, and the NSF1 binary field
format used by the command-line tools.
"""

from __future__ import annotations

import math
import struct
from dataclasses import dataclass, field as dataclass_field

import numpy as np

__all__ = [
    "GridSpec",
    "ScalarField",
    "VectorField",
    "Ball",
    "DecayProfile",
    "weighted_sup_norm",
    "cd1_norm",
    "lp_norm",
    "positive_part",
    "morrey_norm",
    "radial_profile",
    "gradient",
    "derivative",
    "write_nsf1",
    "read_nsf1",
]


def _memory_budget_bytes() -> int:
    try:
        import psutil

        return int(psutil.virtual_memory().total)
    except Exception:
        return 1 << 34


@dataclass(frozen=True)
class GridSpec:
    """Cell-centered regular grid over [-L, L)^n.

    Attributes
    ----------
    dim : int
        Dimension n >= 3.
    points_per_axis : int
        Even number of cells N per axis.
    half_width : float
        Box half-width L > 0; spacing is h = 2L/N.
    """

    dim: int
    points_per_axis: int
    half_width: float

    def __post_init__(self):
        if not isinstance(self.dim, int) or self.dim < 3:
            raise ValueError(f"dim must be an integer >= 3, got {self.dim}")
        n_pts = self.points_per_axis
        if not isinstance(n_pts, int) or n_pts <= 0 or n_pts % 2 != 0:
            raise ValueError(f"points_per_axis must be a positive even integer, got {n_pts}")
        if not (self.half_width > 0):
            raise ValueError(f"half_width must be positive, got {self.half_width}")
        required = 8 * n_pts**self.dim
        budget = _memory_budget_bytes()
        if required > budget:
            raise ValueError(
                f"grid of {n_pts}^{self.dim} points needs {required} bytes per field, "
                f"exceeding addressable memory ({budget} bytes)"
            )

    @property
    def h(self) -> float:
        return 2.0 * self.half_width / self.points_per_axis

    @property
    def shape(self) -> tuple:
        return (self.points_per_axis,) * self.dim

    @property
    def total_points(self) -> int:
        return self.points_per_axis**self.dim

    def axis_coords(self) -> np.ndarray:
        """Coordinates of cell centers along one axis."""
        return (np.arange(self.points_per_axis) + 0.5) * self.h - self.half_width

    def coord_grids(self) -> tuple:
        """Broadcastable (sparse) coordinate arrays, one per axis."""
        ax = self.axis_coords()
        return tuple(
            ax.reshape((1,) * a + (-1,) + (1,) * (self.dim - a - 1)) for a in range(self.dim)
        )

    def radius2(self) -> np.ndarray:
        coords = self.coord_grids()
        r2 = np.zeros(self.shape)
        for c in coords:
            r2 = r2 + c**2
        return r2

    def radius(self) -> np.ndarray:
        return np.sqrt(self.radius2())

    def index_to_point(self, idx) -> np.ndarray:
        ax = self.axis_coords()
        return np.array([ax[i] for i in idx])

    def point_to_index(self, x) -> tuple:
        """Index of the cell containing x (nearest cell for boundary ties).

        Inverse of `index_to_point` on every grid point.
        """
        x = np.asarray(x, dtype=float)
        raw = np.rint((x + self.half_width) / self.h - 0.5).astype(int)
        return tuple(np.clip(raw, 0, self.points_per_axis - 1))


@dataclass
class ScalarField:
    """Real-valued samples on a grid, row-major in axis order."""

    grid: GridSpec
    data: np.ndarray

    def __post_init__(self):
        self.data = np.asarray(self.data, dtype=float)
        if self.data.shape != self.grid.shape:
            raise ValueError(f"data shape {self.data.shape} does not match grid {self.grid.shape}")

    @classmethod
    def zeros(cls, grid: GridSpec) -> "ScalarField":
        return cls(grid, np.zeros(grid.shape))

    def magnitude(self) -> np.ndarray:
        return np.abs(self.data)


@dataclass
class VectorField:
    """R^n-valued samples; data has shape (n,) + grid.shape."""

    grid: GridSpec
    data: np.ndarray

    def __post_init__(self):
        self.data = np.asarray(self.data, dtype=float)
        expect = (self.grid.dim,) + self.grid.shape
        if self.data.shape != expect:
            raise ValueError(f"data shape {self.data.shape} does not match {expect}")

    @classmethod
    def zeros(cls, grid: GridSpec) -> "VectorField":
        return cls(grid, np.zeros((grid.dim,) + grid.shape))

    @classmethod
    def from_components(cls, components) -> "VectorField":
        components = list(components)
        if len({c.grid for c in components}) != 1:
            raise ValueError("components must share one grid")
        grid = components[0].grid
        if len(components) != grid.dim:
            raise ValueError(f"expected {grid.dim} components, got {len(components)}")
        return cls(grid, np.stack([c.data for c in components]))

    def component(self, i: int) -> ScalarField:
        return ScalarField(self.grid, self.data[i])

    def magnitude(self) -> np.ndarray:
        return np.sqrt(np.sum(self.data**2, axis=0))


@dataclass(frozen=True)
class Ball:
    """Integration region: ball of given center/radius, or its complement.

    Balls are silently clipped to the grid box; `clipped_fraction` reports
    how much of the ideal ball volume falls outside the sampled cells.
    """

    center: tuple
    radius: float
    complement: bool = False

    def __post_init__(self):
        if not (self.radius > 0):
            raise ValueError(f"ball radius must be positive, got {self.radius}")
        object.__setattr__(self, "center", tuple(float(c) for c in self.center))

    def mask(self, grid: GridSpec) -> np.ndarray:
        coords = grid.coord_grids()
        r2 = np.zeros(grid.shape)
        for c, c0 in zip(coords, self.center):
            r2 = r2 + (c - c0) ** 2
        inside = r2 <= self.radius**2
        return ~inside if self.complement else inside

    def clipped_fraction(self, grid: GridSpec) -> float:
        """1 - (cell volume captured inside the box) / (exact ball volume)."""
        coords = grid.coord_grids()
        r2 = np.zeros(grid.shape)
        for c, c0 in zip(coords, self.center):
            r2 = r2 + (c - c0) ** 2
        captured = np.count_nonzero(r2 <= self.radius**2) * grid.h**grid.dim
        exact = math.pi ** (grid.dim / 2) / math.gamma(grid.dim / 2 + 1) * self.radius**grid.dim
        return max(0.0, 1.0 - captured / exact)


@dataclass
class DecayProfile:
    """Radial shell statistics plus a fitted power-law exponent.

    `shell_radii[k]` is the radius of the grid point attaining the shell
    supremum, so a field sampled from an exact power law r^(-e) yields
    collinear (log r, log sup) pairs and the fit recovers e exactly.
    fitted_exponent follows the sign convention: field ~ r^(-e) gives
    fitted_exponent = e.
    """

    shell_radii: np.ndarray
    shell_sup: np.ndarray
    shell_mean: np.ndarray
    fitted_exponent: float
    fit_window: tuple
    fit_residual: float


def _magnitude_of(s) -> tuple:
    """(grid, |s| array) for ScalarField or VectorField input."""
    if isinstance(s, (ScalarField, VectorField)):
        return s.grid, s.magnitude()
    raise TypeError(f"expected ScalarField or VectorField, got {type(s).__name__}")


def _weighted_sup(values: np.ndarray, grid: GridSpec, exponent: float) -> float:
    w = (1.0 + grid.radius()) ** exponent
    return float(np.max(w * values))


def weighted_sup_norm(v, exponent: float) -> float:
    """max over grid points of (1 + |x|)^exponent * |v(x)|."""
    grid, mag = _magnitude_of(v)
    return _weighted_sup(mag, grid, exponent)


def cd1_norm(v: VectorField, grad_v: np.ndarray) -> float:
    """Weighted decay norm: sup (1+|x|)^(n-3) |v| + sup (1+|x|)^(n-2) |grad v|.

    `grad_v` is the (n, n) field of partials as returned by `gradient`,
    flattened to one n^2-component magnitude for the second term.
    """
    n = v.grid.dim
    expect = (n, n) + v.grid.shape
    if np.shape(grad_v) != expect:
        raise ValueError(f"grad_v shape {np.shape(grad_v)} does not match {expect}")
    grad_mag = np.sqrt(np.sum(np.asarray(grad_v) ** 2, axis=(0, 1)))
    return weighted_sup_norm(v, n - 3) + _weighted_sup(grad_mag, v.grid, n - 2)


def lp_norm(s, p: float, region: Ball | None = None) -> float:
    """Midpoint-rule L^p norm (sum |s|^p h^n)^(1/p) over the box or a region."""
    if p < 1:
        raise ValueError(f"p must be >= 1, got {p}")
    grid, mag = _magnitude_of(s)
    if region is not None:
        mag = mag[region.mask(grid)]
    return float(np.sum(mag**p) * grid.h**grid.dim) ** (1.0 / p)


def positive_part(s: ScalarField) -> ScalarField:
    """Pointwise max with zero."""
    return ScalarField(s.grid, np.maximum(s.data, 0.0))


def default_morrey_centers(grid: GridSpec):
    """Coarse sublattice {-L/2, 0, +L/2}^n of ball centers."""
    L = grid.half_width
    axes = [(-L / 2, 0.0, L / 2)] * grid.dim
    out = [()]
    for ax in axes:
        out = [prefix + (c,) for prefix in out for c in ax]
    return out


def default_morrey_radii(grid: GridSpec):
    """Dyadic radii h * 2^k up to the box half-width."""
    radii = []
    r = grid.h
    while r <= grid.half_width:
        radii.append(r)
        r *= 2.0
    return radii


def morrey_norm(s, p: float, lam: float, centers=None, radii=None) -> float:
    """Sampled Morrey norm: (max over (x, r) of r^(-lam) int_{B_r(x)} |s|^p)^(1/p).

    The supremum over all balls is not computable; this maximizes over the
    given finite sample (default: coarse sublattice centers, dyadic radii)
    and is therefore a lower bound of the true norm.  It is monotone
    nondecreasing as the sample set grows.
    """
    if p < 1:
        raise ValueError(f"p must be >= 1, got {p}")
    grid, mag = _magnitude_of(s)
    if not (0 <= lam < grid.dim):
        raise ValueError(f"lambda must lie in [0, n), got {lam}")
    if centers is None:
        centers = default_morrey_centers(grid)
    if radii is None:
        radii = default_morrey_radii(grid)
    centers = list(centers)
    radii = list(radii)
    if not centers or not radii:
        raise ValueError("morrey_norm needs a nonempty sample of centers and radii")
    hn = grid.h**grid.dim
    powed = mag**p
    coords = grid.coord_grids()
    best = 0.0
    for c0 in centers:
        r2 = np.zeros(grid.shape)
        for c, cc in zip(coords, c0):
            r2 = r2 + (c - cc) ** 2
        for r in sorted(radii):
            if r <= 0:
                raise ValueError("ball radii must be positive")
            val = float(np.sum(powed[r2 <= r * r])) * hn * r ** (-lam)
            best = max(best, val)
    return best ** (1.0 / p)


def radial_profile(s, shells: int = 24, fit_window=(0.3, 0.75)) -> DecayProfile:
    """Bin |s| into equal-log-width radial shells and fit a decay exponent.

    Shells cover [h, L]; per-shell supremum and mean are recorded, and
    log(sup) is least-squares fitted against log(r) over the window
    [fit_window[0]*L, fit_window[1]*L].  Inner shells are contaminated by
    the source support and outer shells by box truncation, hence the
    default window.  An all-zero window fits exponent 0.
    """
    if shells < 4:
        raise ValueError(f"need at least 4 shells, got {shells}")
    grid, mag = _magnitude_of(s)
    lo, hi = grid.h, grid.half_width
    r = grid.radius().ravel()
    v = mag.ravel()
    keep = (r >= lo) & (r <= hi)
    r = r[keep]
    v = v[keep]
    edges = np.geomspace(lo, hi, shells + 1)
    which = np.clip(np.searchsorted(edges, r, side="right") - 1, 0, shells - 1)

    radii, sups, means = [], [], []
    for k in range(shells):
        sel = which == k
        if not np.any(sel):
            continue
        rs, vs = r[sel], v[sel]
        imax = int(np.argmax(vs))
        radii.append(rs[imax])
        sups.append(vs[imax])
        means.append(float(np.mean(vs)))
    radii = np.asarray(radii)
    sups = np.asarray(sups)
    means = np.asarray(means)

    w_lo, w_hi = fit_window[0] * grid.half_width, fit_window[1] * grid.half_width
    in_win = (radii >= w_lo) & (radii <= w_hi)
    win_r, win_s = radii[in_win], sups[in_win]
    if win_r.size < 2:
        raise ValueError(
            f"fewer than 2 nonempty shells in the fit window [{w_lo:g}, {w_hi:g}]"
        )
    if np.all(win_s == 0.0):
        exponent, resid = 0.0, 0.0
    else:
        pos = win_s > 0.0
        win_r, win_s = win_r[pos], win_s[pos]
        if win_r.size < 2:
            raise ValueError("fewer than 2 shells with nonzero supremum in the fit window")
        logr, logs = np.log(win_r), np.log(win_s)
        slope, intercept = np.polyfit(logr, logs, 1)
        resid = float(np.sqrt(np.mean((logs - (slope * logr + intercept)) ** 2)))
        exponent = -float(slope)
    return DecayProfile(
        shell_radii=radii,
        shell_sup=sups,
        shell_mean=means,
        fitted_exponent=exponent,
        fit_window=(w_lo, w_hi),
        fit_residual=resid,
    )


# --- finite differences ---------------------------------------------------

_CENTRAL_HALF = {(1, 2): 1, (1, 4): 2, (2, 2): 1, (2, 4): 2}


def _fd_weights(offsets, deriv: int) -> np.ndarray:
    """Stencil weights for the deriv-th derivative on unit-step offsets."""
    offsets = np.asarray(offsets, dtype=float)
    m = offsets.size
    a = np.vstack([offsets**j / math.factorial(j) for j in range(m)])
    rhs = np.zeros(m)
    rhs[deriv] = 1.0
    return np.linalg.solve(a, rhs)


def derivative(data: np.ndarray, axis: int, h: float, deriv: int = 1, order: int = 4) -> np.ndarray:
    """Finite-difference derivative along one axis.

    Central stencils of the requested order in the interior; one-sided
    stencils of the same order at the box edges.
    """
    if (deriv, order) not in _CENTRAL_HALF:
        raise ValueError(f"unsupported (deriv, order) = ({deriv}, {order})")
    half = _CENTRAL_HALF[(deriv, order)]
    npts = deriv + order + 1
    n_axis = data.shape[axis]
    if n_axis < npts:
        raise ValueError(f"axis of length {n_axis} too short for a {npts}-point stencil")

    work = np.moveaxis(data, axis, 0)
    out = np.empty_like(work)

    central = _fd_weights(np.arange(-half, half + 1), deriv) / h**deriv
    interior = np.zeros_like(work[half : n_axis - half])
    for m, w in zip(range(-half, half + 1), central):
        if w != 0.0:
            interior += w * work[half + m : n_axis - half + m]
    out[half : n_axis - half] = interior

    for i in range(half):
        fwd = _fd_weights(np.arange(npts) - i, deriv) / h**deriv
        out[i] = np.tensordot(fwd, work[:npts], axes=(0, 0))
        bwd = _fd_weights(-(np.arange(npts) - i), deriv) / h**deriv
        out[n_axis - 1 - i] = np.tensordot(bwd, work[n_axis - npts :][::-1], axes=(0, 0))
    return np.moveaxis(out, 0, axis)


def gradient(v: VectorField, order: int = 4) -> np.ndarray:
    """All partials of a vector field: grad[k, j] = d_k v_j.

    Exact on polynomial fields of degree below the stencil order,
    including the one-sided edge stencils.
    """
    if order not in (2, 4):
        raise ValueError(f"order must be 2 or 4, got {order}")
    grid = v.grid
    if grid.points_per_axis < 8:
        raise ValueError("gradient needs at least 8 points per axis")
    n = grid.dim
    out = np.empty((n, n) + grid.shape)
    for k in range(n):
        for j in range(n):
            out[k, j] = derivative(v.data[j], axis=k, h=grid.h, deriv=1, order=order)
    return out


# --- NSF1 binary field format ---------------------------------------------

NSF1_MAGIC = b"NSF1"
NSF1_VERSION = 1
_NSF1_HEADER = struct.Struct("<4sIIQdI")


def write_nsf1(path, f) -> None:
    """Write a field in the NSF1 format.

    Layout (little-endian): magic 'NSF1', u32 version, u32 dim, u64 N,
    f64 L, u32 component count, then each component as row-major f64.
    """
    grid, _ = _magnitude_of(f)
    comps = f.data[None] if isinstance(f, ScalarField) else f.data
    header = _NSF1_HEADER.pack(
        NSF1_MAGIC,
        NSF1_VERSION,
        grid.dim,
        grid.points_per_axis,
        grid.half_width,
        comps.shape[0],
    )
    with open(path, "wb") as fh:
        fh.write(header)
        for c in comps:
            fh.write(np.ascontiguousarray(c, dtype="<f8").tobytes())


def read_nsf1(path):
    """Read an NSF1 file; returns ScalarField (1 component) or VectorField (n)."""
    with open(path, "rb") as fh:
        raw = fh.read(_NSF1_HEADER.size)
        if len(raw) < _NSF1_HEADER.size:
            raise ValueError(f"{path}: truncated NSF1 header")
        magic, version, dim, n_pts, half_width, ncomp = _NSF1_HEADER.unpack(raw)
        if magic != NSF1_MAGIC:
            raise ValueError(f"{path}: bad magic {magic!r}, expected {NSF1_MAGIC!r}")
        if version != NSF1_VERSION:
            raise ValueError(f"{path}: unsupported NSF1 version {version}")
        grid = GridSpec(dim=int(dim), points_per_axis=int(n_pts), half_width=float(half_width))
        if ncomp not in (1, grid.dim):
            raise ValueError(f"{path}: component count {ncomp} is neither 1 nor dim={grid.dim}")
        count = ncomp * grid.total_points
        data = np.frombuffer(fh.read(8 * count), dtype="<f8")
        if data.size != count:
            raise ValueError(f"{path}: truncated payload ({data.size} of {count} values)")
        if fh.read(1):
            raise ValueError(f"{path}: trailing bytes after payload")
    data = data.astype(float).reshape((ncomp,) + grid.shape)
    if ncomp == 1:
        return ScalarField(grid, data[0])
    return VectorField(grid, data)
