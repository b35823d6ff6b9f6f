import numpy as np
import pytest

from catcmc.base import BoundaryData, CylinderField
from catcmc.base.schema import latitude_grid
from catcmc.exceptions import ModeContentError, NearSingularError
from catcmc.geometry import neck_params, singular_length
from catcmc.modes import higher_trace, signature
from catcmc.operators import apply_weighted_lin
from catcmc.solvers.linear import (
    BVPMode,
    apply_mode_operator,
    discrete_jacobi_basis,
    growth_exponent,
    locate_singular_length,
    min_singular_value,
    solve_decay,
    solve_mode_bvp,
    solve_modified,
    varparam_mode0,
    varparam_mode1,
)
from catcmc.solvers.tridiagonal import solve_tridiagonal

from .conftest import convergence_order


def test_tridiagonal_matches_dense():
    rng = np.random.default_rng(0)
    n = 12
    lower, upper = rng.standard_normal((2, n))
    diag = 4.0 + rng.random(n)
    rhs = rng.standard_normal(n)
    dense = np.diag(diag) + np.diag(lower[1:], -1) + np.diag(upper[:-1], 1)
    np.testing.assert_allclose(
        solve_tridiagonal(lower, diag, upper, rhs), np.linalg.solve(dense, rhs), atol=1e-12
    )


def test_tridiagonal_stacked_complex():
    n = 6
    lower = np.ones((2, n))
    diag = np.array([[4.0] * n, [5.0] * n])
    rhs = np.ones((2, n)) * (1 + 2j)
    x = solve_tridiagonal(lower, diag, lower, rhs)
    for row in range(2):
        dense = np.diag(diag[row]) + np.diag(np.ones(n - 1), -1) + np.diag(np.ones(n - 1), 1)
        np.testing.assert_allclose(x[row], np.linalg.solve(dense, rhs[row]), atol=1e-12)


def test_tridiagonal_zero_pivot():
    with pytest.raises(NearSingularError):
        solve_tridiagonal(np.ones(3), np.zeros(3), np.ones(3), np.ones(3))


def test_mode_bvp_inverts_its_stencil():
    l, k = 2.0, 2
    s = latitude_grid(l, 101)
    exact = np.exp(-(s**2)) + 0.1 * s
    rhs = np.zeros_like(s)
    rhs[1:-1] = apply_mode_operator(k, exact, l)
    values = solve_mode_bvp(BVPMode(k, rhs, exact[0], exact[-1], l))
    np.testing.assert_allclose(values, exact, atol=1e-10)


def test_mode_bvp_convergence():
    l, k = 2.0, 2
    errors = []
    for n in (101, 201, 401):
        s = latitude_grid(l, n)
        exact = np.exp(-(s**2))
        rhs = (4 * s**2 - 2) * exact - k * k * exact + 2 / np.cosh(s) ** 2 * exact
        values = solve_mode_bvp(BVPMode(k, rhs, exact[0], exact[-1], l))
        errors.append(np.max(np.abs(values - exact)))
    assert convergence_order(errors) >= 1.8, errors


def test_mode_bvp_rejects_even_grid():
    with pytest.raises(ValueError):
        BVPMode(2, np.zeros(100), 0.0, 0.0, 2.0)


def test_singular_length_guard():
    with pytest.raises(NearSingularError):
        solve_mode_bvp(BVPMode(0, np.zeros(101), 1.0, 1.0, singular_length() + 1e-4))


def test_singular_values_dip_at_singular_length():
    near = min_singular_value(singular_length(), 0)
    away = min_singular_value(2.0, 0)
    assert near < 1e-2 * away
    assert locate_singular_length(0.5, 3.0, 100, 201) == pytest.approx(
        singular_length(), abs=1e-3
    )


def test_discrete_jacobi_basis_is_exact_kernel(neck):
    for field in discrete_jacobi_basis(neck).fields:
        values = field.values
        for k in range(3):
            profile = np.fft.rfft(values, axis=0)[k]
            residual = apply_mode_operator(k, profile, neck.l)
            assert np.max(np.abs(residual)) <= 1e-9 * max(1.0, np.max(np.abs(profile)))


def test_solve_modified(neck):
    X, S = neck.mesh()
    E = CylinderField(neck, np.exp(-(S**2)) * (1.0 + np.cos(X) + 0.5 * np.cos(2 * X)))
    f = BoundaryData.from_modes(neck.n_x, plus={2: (1e-2, 0.0)}, minus={3: (0.0, 2e-2)})
    u = solve_modified(E, f)

    residual = (apply_weighted_lin(u) - E).sup_norm(interior=True)
    assert residual <= 1e-8 * E.sup_norm()
    assert signature(u).norm() <= 1e-10
    trace = higher_trace(u)
    np.testing.assert_allclose(trace.plus, f.plus, atol=1e-10)
    np.testing.assert_allclose(trace.minus, f.minus, atol=1e-10)


def test_solve_modified_rejects_lower_modes(neck):
    f = BoundaryData.from_modes(neck.n_x, plus={1: (1e-2, 0.0)})
    with pytest.raises(ModeContentError):
        solve_modified(CylinderField.zeros(neck), f)


def test_solve_decay(neck, gaussian_mode):
    E = gaussian_mode(neck, 2)
    u = solve_decay(E)
    assert (apply_weighted_lin(u) - E).sup_norm(interior=True) <= 1e-8
    np.testing.assert_allclose(u.values[:, [0, -1]], 0.0, atol=1e-14)
    with pytest.raises(ModeContentError):
        solve_decay(gaussian_mode(neck, 0))


@pytest.mark.parametrize("k", [2, 3, 4])
def test_growth_exponents(k):
    assert growth_exponent(k) == pytest.approx(k, abs=0.05)
    assert growth_exponent(k, potential=False) == pytest.approx(k, abs=0.05)


def test_variation_of_parameters():
    params = neck_params(0.1, n_x=8, n_s=401)
    s = params.s
    a = np.exp(-(s**2))

    u0 = varparam_mode0(a, s)
    assert u0[params.center] == 0.0
    residual = apply_weighted_lin(CylinderField.from_profile(params, u0)).interior[0]
    np.testing.assert_allclose(residual, a[1:-1], atol=5e-3)

    u1 = varparam_mode1(a, s)
    residual = apply_weighted_lin(CylinderField.from_profile(params, u1, 1)).interior[0]
    np.testing.assert_allclose(residual, a[1:-1], atol=5e-3)
