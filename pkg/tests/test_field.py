import itertools
import math
import struct

import numpy as np
import pytest

from stokesns.field import (
    Ball,
    GridSpec,
    ScalarField,
    VectorField,
    cd1_norm,
    derivative,
    gradient,
    lp_norm,
    morrey_norm,
    positive_part,
    radial_profile,
    read_nsf1,
    weighted_sup_norm,
    write_nsf1,
)


def grid3(n_pts=32, half=8.0):
    return GridSpec(dim=3, points_per_axis=n_pts, half_width=half)


def gaussian_vector(grid, direction=0):
    data = np.zeros((grid.dim,) + grid.shape)
    data[direction] = np.exp(-grid.radius2())
    return VectorField(grid, data)


# --- GridSpec ---------------------------------------------------------------


def test_gridspec_basic():
    g = grid3(32, 8.0)
    assert g.h == pytest.approx(0.5)
    assert g.shape == (32, 32, 32)
    assert g.total_points == 32**3
    ax = g.axis_coords()
    assert ax[0] == pytest.approx(-8.0 + 0.25)
    assert ax[-1] == pytest.approx(8.0 - 0.25)
    assert 0.0 not in ax


@pytest.mark.parametrize(
    "kwargs",
    [
        dict(dim=2, points_per_axis=8, half_width=1.0),
        dict(dim=3, points_per_axis=7, half_width=1.0),
        dict(dim=3, points_per_axis=0, half_width=1.0),
        dict(dim=3, points_per_axis=8, half_width=-1.0),
        dict(dim=3, points_per_axis=65536, half_width=1.0),  # memory bomb
    ],
)
def test_gridspec_rejections(kwargs):
    with pytest.raises(ValueError):
        GridSpec(**kwargs)


def test_index_point_roundtrip():
    g = GridSpec(dim=3, points_per_axis=8, half_width=2.0)
    for idx in itertools.product(range(8), repeat=3):
        x = g.index_to_point(idx)
        assert g.point_to_index(x) == idx
    assert g.point_to_index([0.0, 0.0, 0.0]) == (4, 4, 4)


# --- weighted sup and cd1 norms ----------------------------------------------


def test_weighted_sup_zero_field():
    g = grid3(16, 4.0)
    assert weighted_sup_norm(VectorField.zeros(g), 2.5) == 0.0


def test_weighted_sup_weight_cancels_field():
    g = grid3(16, 4.0)
    for a in (0.5, 1.0, 2.0):
        data = np.zeros((3,) + g.shape)
        data[0] = (1.0 + g.radius()) ** (-a)
        assert weighted_sup_norm(VectorField(g, data), a) == pytest.approx(1.0, abs=1e-12)


def test_weighted_sup_matches_bruteforce_scan():
    g = grid3(32, 8.0)
    v = gaussian_vector(g)
    got = weighted_sup_norm(v, 1.0)
    ax = g.axis_coords()
    best = 0.0
    for i, j, k in itertools.product(range(32), repeat=3):
        r = math.sqrt(ax[i] ** 2 + ax[j] ** 2 + ax[k] ** 2)
        best = max(best, (1.0 + r) * math.exp(-r * r))
    assert got == pytest.approx(best, rel=1e-12)


def test_cd1_norm_zero_and_constant():
    g = GridSpec(dim=5, points_per_axis=8, half_width=8.0)
    z = VectorField.zeros(g)
    assert cd1_norm(z, np.zeros((5, 5) + g.shape)) == 0.0

    c = 0.7
    data = np.zeros((5,) + g.shape)
    data[0] = c
    v = VectorField(g, data)
    grad = gradient(v, order=4)
    rmax = float(g.radius().max())
    assert cd1_norm(v, grad) == pytest.approx((1 + rmax) ** 2 * c, rel=1e-12)


def test_cd1_norm_matches_bruteforce_loop():
    g = GridSpec(dim=5, points_per_axis=8, half_width=6.0)
    data = np.zeros((5,) + g.shape)
    data[0] = np.exp(-g.radius2())
    v = VectorField(g, data)
    grad = gradient(v, order=4)
    got = cd1_norm(v, grad)

    ax = g.axis_coords()
    best_v, best_g = 0.0, 0.0
    for idx in itertools.product(range(8), repeat=5):
        r = math.sqrt(sum(ax[i] ** 2 for i in idx))
        vmag = math.sqrt(sum(v.data[(c,) + idx] ** 2 for c in range(5)))
        gmag = math.sqrt(sum(grad[(a, b) + idx] ** 2 for a in range(5) for b in range(5)))
        best_v = max(best_v, (1 + r) ** 2 * vmag)
        best_g = max(best_g, (1 + r) ** 3 * gmag)
    assert got == pytest.approx(best_v + best_g, rel=1e-12)


def test_cd1_norm_grid_mismatch():
    g = grid3(16, 4.0)
    v = gaussian_vector(g)
    with pytest.raises(ValueError):
        cd1_norm(v, np.zeros((3, 3, 8, 8, 8)))


# --- lp norms ----------------------------------------------------------------


def test_lp_norm_counting_measure():
    g = grid3(16, 4.0)
    data = np.zeros(g.shape)
    data[2, 3, 4] = 1.0
    data[10, 1, 7] = 1.0
    data[5, 5, 5] = 1.0
    assert lp_norm(ScalarField(g, data), 1) == pytest.approx(3 * g.h**3, rel=1e-14)


def test_lp_norm_gaussian_closed_form():
    g = GridSpec(dim=3, points_per_axis=64, half_width=4.0)
    s = ScalarField(g, np.exp(-g.radius2()))
    assert lp_norm(s, 2) == pytest.approx((math.pi / 2) ** 0.75, abs=1e-3)


def test_lp_norm_positive_part_of_negative():
    g = grid3(8, 2.0)
    theta = ScalarField(g, -np.ones(g.shape) - g.radius2())
    assert lp_norm(positive_part(theta), 3.0) == 0.0


def test_lp_norm_region_monotonicity():
    g = grid3(32, 4.0)
    rng = np.random.default_rng(5)
    s = ScalarField(g, rng.standard_normal(g.shape))
    n1 = lp_norm(s, 2, Ball((0.3, 0, 0), 1.0))
    n2 = lp_norm(s, 2, Ball((0.3, 0, 0), 2.5))
    assert n1 <= n2


def test_lp_norm_rejections():
    g = grid3(8, 2.0)
    s = ScalarField.zeros(g)
    with pytest.raises(ValueError):
        lp_norm(s, 0.5)
    with pytest.raises(ValueError):
        lp_norm(s, 2, Ball((0, 0, 0), -1.0))


def test_ball_clipped_fraction():
    g = grid3(32, 4.0)
    inner = Ball((0, 0, 0), 1.0)
    assert inner.clipped_fraction(g) < 0.05
    sticking_out = Ball((3.5, 0, 0), 2.0)
    assert sticking_out.clipped_fraction(g) > 0.2


def test_positive_part_examples():
    g = grid3(8, 2.0)
    assert np.all(positive_part(ScalarField(g, -np.ones(g.shape))).data == 0.0)
    assert np.all(positive_part(ScalarField(g, 2 * np.ones(g.shape))).data == 2.0)
    ramp = ScalarField(g, g.coord_grids()[0] + np.zeros(g.shape))
    clamped = positive_part(ramp)
    assert np.array_equal(clamped.data, np.maximum(ramp.data, 0.0))


# --- Morrey norm ---------------------------------------------------------------


def test_morrey_lambda_zero_degeneracy():
    g = grid3(32, 4.0)
    s = ScalarField(g, np.exp(-g.radius2()))  # radially decreasing, >= 0
    radius = 3.0
    got = morrey_norm(s, 2, 0.0, centers=[(0.0, 0.0, 0.0)], radii=[1.0, 2.0, radius])
    assert got == pytest.approx(lp_norm(s, 2, Ball((0, 0, 0), radius)), rel=1e-13)


def test_morrey_constant_box_volume():
    g = grid3(16, 2.0)
    s = ScalarField(g, np.ones(g.shape))
    big = math.sqrt(3) * 2.0 + 1.0  # ball covering the box
    got = morrey_norm(s, 1, 0.0, centers=[(0, 0, 0)], radii=[big])
    assert got == pytest.approx((2 * 2.0) ** 3, rel=1e-13)


def test_morrey_inverse_radius_oracle():
    # r^-1 int_{B_r} |x|^-2 = 4 pi r / r = const; compare the sampled value
    g = GridSpec(dim=3, points_per_axis=64, half_width=4.0)
    s = ScalarField(g, 1.0 / g.radius())
    got = morrey_norm(s, 2, 1.0, centers=[(0.0, 0.0, 0.0)], radii=[1.0, 2.0])
    assert got**2 == pytest.approx(4 * math.pi, rel=0.05)


def test_morrey_monotone_in_sample_set():
    g = grid3(16, 4.0)
    rng = np.random.default_rng(11)
    s = ScalarField(g, rng.standard_normal(g.shape))
    small = morrey_norm(s, 2, 1.0, centers=[(0, 0, 0)], radii=[1.0])
    mid = morrey_norm(s, 2, 1.0, centers=[(0, 0, 0), (1, 1, 0)], radii=[1.0, 2.0])
    big = morrey_norm(s, 2, 1.0, centers=[(0, 0, 0), (1, 1, 0), (-2, 0, 1)], radii=[0.5, 1.0, 2.0, 3.0])
    assert small <= mid <= big


def test_morrey_rejections():
    g = grid3(8, 2.0)
    s = ScalarField.zeros(g)
    with pytest.raises(ValueError):
        morrey_norm(s, 2, 3.0)  # lambda >= n
    with pytest.raises(ValueError):
        morrey_norm(s, 2, 1.0, centers=[], radii=[1.0])
    with pytest.raises(ValueError):
        morrey_norm(s, 2, 1.0, centers=[(0, 0, 0)], radii=[-1.0])


# --- radial profile -------------------------------------------------------------


def test_radial_profile_exact_power_law():
    g = GridSpec(dim=3, points_per_axis=64, half_width=16.0)
    s = ScalarField(g, g.radius() ** (-2.0))
    prof = radial_profile(s)
    assert prof.fitted_exponent == pytest.approx(2.0, abs=1e-6)
    assert prof.fit_residual < 1e-10


def test_radial_profile_constant_field():
    g = grid3(32, 8.0)
    prof = radial_profile(ScalarField(g, 3.7 * np.ones(g.shape)))
    assert prof.fitted_exponent == pytest.approx(0.0, abs=1e-6)


def test_radial_profile_zero_field():
    g = grid3(32, 8.0)
    prof = radial_profile(ScalarField.zeros(g))
    assert prof.fitted_exponent == 0.0


def test_radial_profile_shifted_power_law_bracket():
    # (1+r)^-3 has log-log slope -3 r/(1+r); over the window [0.3 L, 0.75 L]
    # of L=16 the least-squares slope must land between the endpoint bounds.
    g = GridSpec(dim=3, points_per_axis=64, half_width=16.0)
    s = ScalarField(g, (1.0 + g.radius()) ** (-3.0))
    prof = radial_profile(s)
    lo, hi = prof.fit_window
    assert prof.fit_window == (pytest.approx(4.8), pytest.approx(12.0))
    assert 3 * lo / (1 + lo) <= prof.fitted_exponent <= 3 * hi / (1 + hi)


def test_radial_profile_shells_increasing_and_window():
    g = grid3(32, 8.0)
    prof = radial_profile(ScalarField(g, np.exp(-g.radius())), shells=16)
    assert np.all(np.diff(prof.shell_radii) > 0)
    assert prof.shell_sup.shape == prof.shell_radii.shape
    assert prof.shell_mean.shape == prof.shell_radii.shape


def test_radial_profile_rejections():
    g = grid3(32, 8.0)
    s = ScalarField(g, np.ones(g.shape))
    with pytest.raises(ValueError):
        radial_profile(s, shells=3)
    with pytest.raises(ValueError):
        radial_profile(s, shells=8, fit_window=(1.2, 1.5))


# --- gradient / derivative -------------------------------------------------------


@pytest.mark.parametrize("order", [2, 4])
def test_gradient_exact_on_linear_fields(order):
    g = grid3(16, 4.0)
    rng = np.random.default_rng(order)
    a = rng.standard_normal((3, 3))
    coords = g.coord_grids()
    data = np.zeros((3,) + g.shape)
    for j in range(3):
        for k in range(3):
            data[j] = data[j] + a[k, j] * coords[k]
    grad = gradient(VectorField(g, data), order=order)
    for k in range(3):
        for j in range(3):
            assert np.allclose(grad[k, j], a[k, j], atol=1e-12)


def test_gradient_order4_exact_on_cubics_interior():
    g = grid3(16, 2.0)
    x = g.coord_grids()[0] + np.zeros(g.shape)
    data = np.zeros((3,) + g.shape)
    data[1] = x**3
    grad = gradient(VectorField(g, data), order=4)
    interior = (slice(2, -2),) * 3
    assert np.allclose(grad[0, 1][interior], (3 * x**2)[interior], atol=1e-10)


def test_gradient_sine_convergence_order():
    def err(n_pts, order):
        g = grid3(n_pts, 4.0)
        x = g.coord_grids()[0] + np.zeros(g.shape)
        data = np.zeros((3,) + g.shape)
        data[1] = np.sin(np.pi * x / 4.0)
        grad = gradient(VectorField(g, data), order=order)
        exact = (np.pi / 4.0) * np.cos(np.pi * x / 4.0)
        interior = (slice(4, -4),) * 3
        return np.abs(grad[0, 1] - exact)[interior].max()

    for order in (2, 4):
        ratio = err(16, order) / err(32, order)
        assert 2 ** (order - 0.6) < ratio < 2 ** (order + 0.6)


def test_gradient_constant_field_is_zero():
    g = grid3(8, 2.0)
    data = np.ones((3,) + g.shape)
    assert np.all(gradient(VectorField(g, data), order=4) == 0.0)


def test_second_derivative_exact_on_cubic():
    g = grid3(16, 2.0)
    x1d = g.axis_coords()
    data = np.tile((x1d**3)[:, None, None], (1, 16, 16))
    d2 = derivative(data, axis=0, h=g.h, deriv=2, order=4)
    exact = np.tile((6 * x1d)[:, None, None], (1, 16, 16))
    assert np.allclose(d2, exact, atol=1e-9)


def test_gradient_rejections():
    g = grid3(16, 4.0)
    v = gaussian_vector(g)
    with pytest.raises(ValueError):
        gradient(v, order=3)
    small = GridSpec(dim=3, points_per_axis=6, half_width=1.0)
    with pytest.raises(ValueError):
        gradient(VectorField.zeros(small), order=2)


# --- norm axioms (seeded property sweep) ----------------------------------------


@pytest.mark.parametrize("seed", range(8))
def test_norm_axioms(seed):
    g = grid3(12, 3.0)
    rng = np.random.default_rng(seed)
    a = VectorField(g, rng.standard_normal((3,) + g.shape))
    b = VectorField(g, rng.standard_normal((3,) + g.shape))
    lam = rng.uniform(-3, 3)
    for norm in (
        lambda v: weighted_sup_norm(v, 1.5),
        lambda v: lp_norm(v, 1),
        lambda v: lp_norm(v, 2),
        lambda v: lp_norm(v, 3.5),
    ):
        na, nb = norm(a), norm(b)
        assert norm(VectorField(g, lam * a.data)) == pytest.approx(abs(lam) * na, rel=1e-12)
        assert norm(VectorField(g, a.data + b.data)) <= na + nb + 1e-12 * (na + nb)


# --- NSF1 format -----------------------------------------------------------------


def test_nsf1_roundtrip_bit_exact(tmp_path):
    g = grid3(12, 3.0)
    rng = np.random.default_rng(0)
    v = VectorField(g, rng.standard_normal((3,) + g.shape))
    s = ScalarField(g, rng.standard_normal(g.shape))
    write_nsf1(tmp_path / "v.nsf1", v)
    write_nsf1(tmp_path / "s.nsf1", s)
    v2 = read_nsf1(tmp_path / "v.nsf1")
    s2 = read_nsf1(tmp_path / "s.nsf1")
    assert isinstance(v2, VectorField) and isinstance(s2, ScalarField)
    assert v2.grid == g and s2.grid == g
    assert np.array_equal(v2.data, v.data)
    assert np.array_equal(s2.data, s.data)


def test_nsf1_header_layout(tmp_path):
    g = GridSpec(dim=3, points_per_axis=8, half_width=2.0)
    write_nsf1(tmp_path / "s.nsf1", ScalarField.zeros(g))
    raw = (tmp_path / "s.nsf1").read_bytes()
    magic, version, dim, n_pts, half, ncomp = struct.unpack("<4sIIQdI", raw[:28])
    assert magic == b"NSF1" and version == 1 and dim == 3 and n_pts == 8
    assert half == 2.0 and ncomp == 1
    assert len(raw) == 28 + 8 * 8**3


@pytest.mark.parametrize(
    "mutate",
    [
        lambda raw: b"XXXX" + raw[4:],  # bad magic
        lambda raw: raw[:4] + struct.pack("<I", 9) + raw[8:],  # bad version
        lambda raw: raw[:-8],  # truncated payload
        lambda raw: raw + b"\x00",  # trailing bytes
        lambda raw: raw[:24] + struct.pack("<I", 2) + raw[28:],  # bad ncomp
    ],
)
def test_nsf1_rejects_malformed(tmp_path, mutate):
    g = GridSpec(dim=3, points_per_axis=8, half_width=2.0)
    path = tmp_path / "s.nsf1"
    write_nsf1(path, ScalarField.zeros(g))
    path.write_bytes(mutate(path.read_bytes()))
    with pytest.raises(ValueError):
        read_nsf1(path)
