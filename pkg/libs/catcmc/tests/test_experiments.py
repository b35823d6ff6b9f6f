import numpy as np
import pytest

from catcmc.base import BoundaryData, CylinderField
from catcmc.exceptions import DomainError
from catcmc.geometry import neck_params
from catcmc.verify.experiments import (
    ORDER_RANGE,
    _richardson_order,
    annulus_samples,
    decay_sweep,
    derivative_convergence_experiment,
    improved_decay_experiment,
    lower_mode_surrogate,
    lower_norm_fit,
    stability_ratio,
    tau_continuity_experiment,
    tau_derivative,
)


def test_stability_ratio_is_deterministic():
    params = neck_params(0.1, gamma=0.5, n_x=16, n_s=101)
    first = stability_ratio(params, samples=2)
    assert np.isfinite(first) and first > 0.0
    assert stability_ratio(params, samples=2) == first


def test_lower_mode_surrogate(neck):
    assert lower_mode_surrogate(neck) <= 1e-6


def test_annulus_samples():
    params = neck_params(0.05, n_x=8, n_s=401)
    field = CylinderField.from_profile(params, params.omega)
    radii = np.linspace(0.5, 1.0, 6)
    samples = annulus_samples(field, radii, "top")
    np.testing.assert_allclose(samples, np.broadcast_to(radii, samples.shape), atol=1e-6)
    samples = annulus_samples(field, radii, "bottom")
    np.testing.assert_allclose(samples, np.broadcast_to(radii, samples.shape), atol=1e-6)


def test_tau_derivative_step_range():
    with pytest.raises(DomainError):
        tau_derivative(0.1, 0.02, 1e-3, n_x=8, n_s=101)
    with pytest.raises(DomainError):
        tau_derivative(0.1, 0.0, 1e-3, n_x=8, n_s=101)


def test_tau_derivative_accepts_the_largest_step():
    derivative = tau_derivative(0.1, 0.1 * 0.1, 0.0, n_x=8, n_s=101)
    assert derivative.sup_norm() == 0.0


def test_tau_derivative_of_the_catenoid_is_zero():
    derivative = tau_derivative(0.1, 0.005, 0.0, n_x=8, n_s=101)
    assert derivative.sup_norm() == 0.0


def test_improved_decay():
    params = neck_params(0.05, gamma=0.5, n_x=8, n_s=201)
    report = improved_decay_experiment(params, 1e-3, n_r=100)
    assert report.solve.converged
    assert 1.7 <= report.fit.exponent <= 2.3
    assert report.lower_ratio == pytest.approx(report.lower_norm / 0.05)


def test_continuity_with_zero_data():
    report = tau_continuity_experiment(0.0, None, (0.1, 0.05), n_r=40, n_x=8, n_s=101)
    assert report.distances == [0.0, 0.0]
    assert report.rescaled_distances == [0.0, 0.0]
    assert report.fit.exponent is None
    assert report.bottom_delta_sign == 1
    assert report.band == (1.0, 1.5)


def test_continuity_with_boundary_data():
    f = BoundaryData.from_modes(8, plus={2: (1e-3, 0.0)})
    report = tau_continuity_experiment(1e-3, f, (0.1, 0.05), n_r=100, n_x=8, n_s=201)
    assert 0.0 < report.distances[1] < report.distances[0]
    assert len(report.rescaled_distances) == 2
    assert all(d > 0.0 for d in report.rescaled_distances)


def test_decay_exponent_at_several_scales():
    reports = decay_sweep((0.1, 0.05), 1e-3, n_x=8, n_s=201, n_r=100)
    for report in reports:
        assert report.solve.converged
        assert 1.7 <= report.fit.exponent <= 2.3
        assert report.rescaled_lower_norm > 0.0
        assert report.rescaled_lower_ratio == pytest.approx(
            report.rescaled_lower_norm / report.tau
        )
    assert lower_norm_fit(reports).exponent is not None
    assert lower_norm_fit(reports, rescaled=True).points == 2


def test_richardson_order():
    taus = [0.1, 0.05, 0.025]
    assert _richardson_order(taus, [2.0, 1.0], 0.5) == pytest.approx(1.0)
    assert _richardson_order(taus, [1.0, 2.0], 0.5) == 0.5
    assert _richardson_order(taus, [1.0], 0.5) == 0.5
    assert _richardson_order(taus, [1e6, 1.0], 0.5) == ORDER_RANGE[1]
    assert _richardson_order(taus, [1.01, 1.0], 0.5) == ORDER_RANGE[0]


def test_derivative_convergence_at_default_step():
    report = derivative_convergence_experiment(1e-3, None, (0.1,), n_x=8, n_s=101)
    assert report.step == 0.1
    assert len(report.distances) == 1 and np.isfinite(report.distances[0])
    assert report.cauchy == []
    assert report.richardson is None and report.within_richardson is None
    assert np.isfinite(report.step_error) and report.step_error >= 0.0


def test_derivative_convergence_richardson_estimate():
    report = derivative_convergence_experiment(
        1e-3, None, (0.1, 0.05, 0.025), n_x=8, n_s=101
    )
    assert len(report.cauchy) == 2
    assert ORDER_RANGE[0] <= report.order <= ORDER_RANGE[1]
    assert report.richardson == pytest.approx(report.cauchy[-1] / (2.0**report.order - 1.0))
    assert report.within_richardson == (report.distances[-1] <= 10.0 * report.richardson)


def test_derivative_convergence_step_range():
    with pytest.raises(DomainError):
        derivative_convergence_experiment(1e-3, None, (0.1,), step=0.2, n_x=8, n_s=101)
    with pytest.raises(DomainError):
        derivative_convergence_experiment(1e-3, None, (0.1,), step=0.0, n_x=8, n_s=101)
