import math

import numpy as np
import pytest

from stokesns import kernel


def test_unit_ball_volume_closed_forms():
    assert kernel.unit_ball_volume(3) == pytest.approx(4 * math.pi / 3, rel=1e-14)
    assert kernel.unit_ball_volume(5) == pytest.approx(8 * math.pi**2 / 15, rel=1e-14)


def test_closed_form_values_n5():
    # independent recomputation: w5 = 8 pi^2 / 15, c = 1/(10 w5)
    w5 = 8 * math.pi**2 / 15
    c = 1.0 / (10 * w5)
    km = kernel.eval_kernel([1.0, 0.0, 0.0, 0.0, 0.0])
    assert km.u_tensor[0, 0] == pytest.approx(c * (1 / 3 + 1), rel=1e-14)
    assert km.u_tensor[1, 1] == pytest.approx(c / 3, rel=1e-14)
    assert km.u_tensor[0, 1] == 0.0
    assert km.p_vector[0] == pytest.approx(1.0 / (5 * w5), rel=1e-14)
    # frozen digits
    assert km.u_tensor[0, 0] == pytest.approx(0.025330295910584437, rel=1e-12)
    assert km.u_tensor[1, 1] == pytest.approx(0.006332573977646109, rel=1e-12)
    assert km.p_vector[0] == pytest.approx(0.03799544386587666, rel=1e-12)


def test_homogeneity_scaling_example():
    km1 = kernel.eval_kernel([1.0, 0, 0, 0, 0])
    km2 = kernel.eval_kernel([2.0, 0, 0, 0, 0])
    assert km2.u_tensor[0, 0] / km1.u_tensor[0, 0] == pytest.approx(2.0 ** (-3), rel=1e-14)


@pytest.mark.parametrize("n", [3, 4, 5])
def test_symmetry_parity_homogeneity(n):
    rng = np.random.default_rng(100 + n)
    for _ in range(20):
        x = rng.standard_normal(n)
        x *= rng.uniform(0.5, 3.0) / np.linalg.norm(x)
        km = kernel.eval_kernel(x, n)
        assert np.array_equal(km.u_tensor, km.u_tensor.T)
        neg = kernel.eval_kernel(-x, n)
        assert np.allclose(neg.u_tensor, km.u_tensor, rtol=0, atol=1e-13 * np.abs(km.u_tensor).max())
        assert np.allclose(neg.p_vector, -km.p_vector, rtol=0, atol=1e-13 * np.abs(km.p_vector).max())
        assert np.allclose(
            neg.grad_tensor, -km.grad_tensor, rtol=0, atol=1e-13 * np.abs(km.grad_tensor).max()
        )
        for lam in (0.5, 2.0, 3.7):
            scaled = kernel.eval_kernel(lam * x, n)
            assert np.allclose(scaled.u_tensor, lam ** (2 - n) * km.u_tensor, rtol=1e-12)
            assert np.allclose(scaled.p_vector, lam ** (1 - n) * km.p_vector, rtol=1e-12)
            assert np.allclose(scaled.grad_tensor, lam ** (1 - n) * km.grad_tensor, rtol=1e-12)


@pytest.mark.parametrize("n", [3, 4, 5])
def test_columns_divergence_free(n):
    rng = np.random.default_rng(7 + n)
    for _ in range(10):
        x = rng.standard_normal(n)
        km = kernel.eval_kernel(x, n)
        trace = np.einsum("iij->j", km.grad_tensor)
        assert np.abs(trace).max() < 1e-12 * np.abs(km.grad_tensor).max()


@pytest.mark.parametrize("n", [3, 5])
def test_gradient_matches_finite_differences(n):
    rng = np.random.default_rng(40 + n)
    for _ in range(5):
        x = rng.standard_normal(n)
        x /= np.linalg.norm(x)  # fixed |x| = 1

        def fd_grad(h):
            out = np.empty((n, n, n))
            for k in range(n):
                e = np.zeros(n)
                e[k] = h
                out[k] = (
                    kernel.eval_kernel(x + e, n).u_tensor - kernel.eval_kernel(x - e, n).u_tensor
                ) / (2 * h)
            return out

        km = kernel.eval_kernel(x, n)
        err1 = np.abs(fd_grad(1e-3) - km.grad_tensor).max()
        err2 = np.abs(fd_grad(5e-4) - km.grad_tensor).max()
        assert 3.5 < err1 / err2 < 4.5


@pytest.mark.parametrize("n", [3, 5])
def test_pde_residual_second_order(n):
    rng = np.random.default_rng(11 + n)
    for _ in range(5):
        x = rng.standard_normal(n)
        x *= rng.uniform(1.0, 3.0) / np.linalg.norm(x)
        r1 = np.linalg.norm(kernel.kernel_pde_residual(x, n, h=1e-2))
        r2 = np.linalg.norm(kernel.kernel_pde_residual(x, n, h=5e-3))
        assert 3.2 < r1 / r2 < 4.8


def test_pde_residual_small_against_hessian_scale():
    x = np.array([0.0, 1.0, 0.0])
    res = np.linalg.norm(kernel.kernel_pde_residual(x, 3, h=1e-2))

    # hessian scale via finite differences of the analytic gradient
    h = 1e-3
    hess = []
    for k in range(3):
        e = np.zeros(3)
        e[k] = h
        hess.append(
            (kernel.eval_kernel(x + e).grad_tensor - kernel.eval_kernel(x - e).grad_tensor) / (2 * h)
        )
    scale = np.linalg.norm(np.asarray(hess))
    assert res < 1e-3 * scale


def test_divergence_vanishes_at_fd_rate():
    x = np.array([0.4, 1.1, -0.3])

    def fd_div(h):
        div = np.zeros(3)
        for i in range(3):
            e = np.zeros(3)
            e[i] = h
            div += (kernel.eval_kernel(x + e).u_tensor[i] - kernel.eval_kernel(x - e).u_tensor[i]) / (
                2 * h
            )
        return np.abs(div).max()

    d1, d2 = fd_div(1e-2), fd_div(5e-3)
    assert 3.4 < d1 / d2 < 4.6


def test_eval_kernel_rejections():
    with pytest.raises(ValueError):
        kernel.eval_kernel([0.0, 0.0, 0.0])
    with pytest.raises(ValueError):
        kernel.eval_kernel([1.0, 0.0])
    with pytest.raises(ValueError):
        kernel.eval_kernel([1.0, 0.0, 0.0], n=4)
    with pytest.raises(ValueError):
        kernel.kernel_pde_residual([1.0, 0.0, 0.0], h=0.5)


def test_stokes_symbol_axis():
    mat, pvec = kernel.stokes_symbol([1.0, 0.0, 0.0])
    assert np.allclose(mat, np.diag([0.0, 1.0, 1.0]), atol=1e-15)
    assert np.allclose(pvec, [-1j, 0, 0], atol=1e-15)


def test_stokes_symbol_diagonal_direction():
    xi = np.array([1.0, 1.0, 0.0])
    mat, pvec = kernel.stokes_symbol(xi)
    expected = (np.eye(3) - np.outer(xi, xi) / 2.0) / 2.0
    assert np.allclose(mat, expected, atol=1e-15)
    assert np.allclose(mat, [[0.25, -0.25, 0], [-0.25, 0.25, 0], [0, 0, 0.5]], atol=1e-15)
    assert np.allclose(pvec, -0.5j * xi, atol=1e-15)


def test_stokes_symbol_properties():
    rng = np.random.default_rng(3)
    for _ in range(10):
        xi = rng.standard_normal(4)
        mat, _ = kernel.stokes_symbol(xi)
        assert np.abs(mat @ xi).max() < 1e-13 * np.abs(mat).max()
        assert np.array_equal(mat, mat.T)
        assert np.linalg.eigvalsh(mat).min() > -1e-14


def test_stokes_symbol_rejects_zero():
    with pytest.raises(ValueError):
        kernel.stokes_symbol([0.0, 0.0, 0.0])
