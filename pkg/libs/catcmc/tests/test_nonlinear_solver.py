import numpy as np
import pytest

from catcmc.base import BoundaryData
from catcmc.exceptions import ConfigError, DomainError, ModeContentError, NoConvergenceError
from catcmc.geometry import dilation_jacobi_profile, neck_params
from catcmc.modes import higher_trace, signature
from catcmc.operators import weighted_mc
from catcmc.solvers.nonlinear import mode_amplitudes, solve_cmc_neck, target


def _linear_mode0(params, delta):
    """Exact solution of the linearized problem with zero data."""
    s = params.s
    return params.tau * delta / 4 * (np.cosh(s) + dilation_jacobi_profile(s) / np.cosh(s))


def test_zero_data_is_the_catenoid(neck):
    u, report = solve_cmc_neck(neck, 0.0)
    assert u.sup_norm() == 0.0
    assert report.iterations == 1
    assert report.converged


def test_constant_mean_curvature_solution(neck):
    delta = 1e-3
    u, report = solve_cmc_neck(neck, delta)
    assert report.converged
    assert report.residual < report.tolerance
    assert report.signature_norm <= 1e-9
    assert report.residual_history[-1] == report.residual

    expected = _linear_mode0(neck, delta)
    error = np.max(np.abs(u.values - expected[None, :]))
    assert error <= 1e-2 * np.max(np.abs(expected)), error

    residual = (weighted_mc(u) - target(neck, delta)).sup_norm(interior=True)
    assert residual < report.tolerance


def test_quadratic_smallness_of_second_increment(neck):
    increments = []
    for scale in (1.0, 0.5):
        _, report = solve_cmc_neck(neck, 4e-3 * scale)
        increments.append(report.increments[1])
    # halving the data quarters the second increment
    assert increments[0] / increments[1] == pytest.approx(4.0, rel=0.25)


def test_higher_mode_boundary_data(neck):
    f = BoundaryData.from_modes(neck.n_x, plus={2: (1e-3, 0.0)}, minus={3: (0.0, 5e-4)})
    u, report = solve_cmc_neck(neck, 1e-3, f)
    trace = higher_trace(u)
    np.testing.assert_allclose(trace.plus, f.plus, atol=1e-9)
    np.testing.assert_allclose(trace.minus, f.minus, atol=1e-9)
    assert signature(u).norm() <= 1e-9

    amplitudes = mode_amplitudes(u, [2, 3])
    assert amplitudes[0, -1] == pytest.approx(1e-3, rel=1e-6)
    assert amplitudes[1, 0] == pytest.approx(5e-4, rel=1e-6)


def test_smallness_and_mode_content(neck):
    with pytest.raises(DomainError):
        solve_cmc_neck(neck, 0.5)
    lower = BoundaryData.from_modes(neck.n_x, plus={1: (1e-3, 0.0)})
    with pytest.raises(ModeContentError):
        solve_cmc_neck(neck, 0.0, lower)
    aliased = BoundaryData.from_modes(neck.n_x, plus={7: (1e-3, 0.0)})
    with pytest.raises(ModeContentError):
        solve_cmc_neck(neck, 0.0, aliased)


def test_no_convergence(neck):
    with pytest.raises(NoConvergenceError):
        solve_cmc_neck(neck, 1e-3, max_iter=1)


def test_newton_on_a_coarse_grid():
    params = neck_params(0.1, gamma=0.5, n_x=8, n_s=33)
    u, report = solve_cmc_neck(params, 1e-3, newton=True, tol=1e-10)
    assert report.method == "newton"
    assert report.converged
    assert report.signature_norm <= 1e-9
    picard, _ = solve_cmc_neck(params, 1e-3, tol=1e-10)
    assert np.max(np.abs(u.values - picard.values)) <= 1e-3 * picard.sup_norm()


def test_newton_refuses_large_grids():
    params = neck_params(0.1, gamma=0.5, n_x=32, n_s=201)
    with pytest.raises(ConfigError):
        solve_cmc_neck(params, 1e-3, newton=True)
