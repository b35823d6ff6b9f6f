import numpy as np
import pytest

from catcmc.base import BoundaryData, DiskField
from catcmc.exceptions import DomainError, InterpolationRangeError, ModeContentError
from catcmc.geometry import neck_params
from catcmc.solvers.disk import (
    cutoff,
    cutoff_band,
    disk_from_function,
    disk_grid,
    disk_zeros,
    interpolate_radial,
    log_source,
    mean_curvature_disk,
    mode_profile,
    normalize_disk,
    origin_jet,
    pullback_to_neck,
    sheet_limits,
    smooth_step,
    solve_cmc_disk,
    solve_disk_laplacian,
    spherical_cap,
)
from catcmc.verify.experiments import derivative_limit_disk


def test_grid_ends_on_the_unit_circle():
    r, theta = disk_grid(50, 8)
    assert r[-1] == pytest.approx(1.0, rel=1e-14)
    assert r[0] == pytest.approx(0.5 * (r[1] - r[0]), rel=1e-12)
    with pytest.raises(DomainError):
        disk_grid(3, 8)


def test_laplacian_exact_on_r_squared():
    r, _ = disk_grid(40, 8)
    rhs = np.full((8, 39), -4.0)
    v = solve_disk_laplacian(rhs, np.ones(8), r)
    np.testing.assert_allclose(v, np.broadcast_to(r**2, (8, 40)), atol=1e-10)


def test_origin_jet_and_normalization():
    g = disk_from_function(
        30, 16, lambda R, T: 0.3 + 0.2 * R * np.cos(T) - 0.1 * R * np.sin(T) + 0.5 * R**2
    )
    np.testing.assert_allclose(origin_jet(g.r, g.values), [0.3, 0.2, -0.1], atol=1e-12)
    normalized = normalize_disk(g)
    np.testing.assert_allclose(
        normalized.values, np.broadcast_to(0.5 * g.r**2, (16, 30)), atol=1e-12
    )


def test_cap_oracle():
    g = solve_cmc_disk(0.1, np.zeros(8), 200)
    cap = spherical_cap(0.1, g.r)
    assert np.max(np.abs(g.values - cap[None, :])) <= 1e-5
    assert np.mean(g.boundary) == pytest.approx(-0.0250156, abs=1e-6)
    assert g.origin == pytest.approx(0.0, abs=1e-8)
    assert np.max(np.abs(mean_curvature_disk(g) - 0.1)) <= 1e-8


def test_zero_data():
    g = solve_cmc_disk(0.0, np.zeros(8), 50)
    assert g.sup_norm() == 0.0


def test_higher_mode_data():
    r, theta = disk_grid(100, 16)
    f = 0.01 * np.cos(2 * theta)
    g = solve_cmc_disk(0.0, f, 100)
    np.testing.assert_allclose(g.boundary, f, atol=1e-9)
    harmonic = 0.01 * np.outer(np.cos(2 * theta), r**2)
    assert np.max(np.abs(g.values - harmonic)) <= 1e-4
    assert np.max(mode_profile(g, 0)) <= 1e-4


def test_disk_data_validation():
    theta = disk_grid(20, 8)[1]
    with pytest.raises(ModeContentError):
        solve_cmc_disk(0.0, 0.01 * np.cos(theta), 20)
    with pytest.raises(DomainError):
        solve_cmc_disk(0.5, np.zeros(8), 20)
    with pytest.raises(DomainError):
        spherical_cap(1.0, 2.5)


def test_spherical_cap():
    assert spherical_cap(0.0, 0.5) == 0.0
    assert spherical_cap(0.1, 1.0) == pytest.approx(-0.0250156, abs=1e-7)
    assert spherical_cap(-0.1, 1.0) == pytest.approx(0.0250156, abs=1e-7)


def test_sheet_limits_use_neck_convention():
    f = BoundaryData.zeros(8)
    top, bottom = sheet_limits(0.1, f, 60)
    expected = solve_cmc_disk(-0.1, np.zeros(8), 60)
    np.testing.assert_allclose(top.values, expected.values, atol=1e-14)
    np.testing.assert_allclose(bottom.values, expected.values, atol=1e-14)
    _, flipped = sheet_limits(0.1, f, 60, bottom_delta_sign=-1)
    np.testing.assert_allclose(flipped.values, -expected.values, atol=1e-12)


def test_smooth_cutoff():
    t = np.linspace(-0.5, 1.5, 41)
    step = smooth_step(t)
    assert np.all(step[t <= 0] == 0.0)
    assert np.all(step[t >= 1] == 1.0)
    assert np.all(np.diff(step) >= 0.0)
    assert float(smooth_step(0.5)) == pytest.approx(0.5)
    np.testing.assert_allclose(cutoff(np.array([0.5, 1.5, 2.5]), (1.0, 2.0))[[0, 2]], [0, 1])


def test_cutoff_bands():
    params = neck_params(0.1, n_x=8, n_s=101)
    assert cutoff_band(params) == pytest.approx((0.4 * params.l, 0.5 * params.l))
    assert cutoff_band(params, (1.0, 1.5)) == (1.0, 1.5)
    with pytest.raises(DomainError):
        cutoff_band(params, "fixed")
    with pytest.raises(DomainError):
        cutoff_band(params, (2.0, 1.0))


def test_interpolation_through_the_origin():
    g = disk_from_function(100, 8, lambda R, T: spherical_cap(0.1, R) + 0 * T)
    radii = np.linspace(0.0, 1.0, 17)
    np.testing.assert_allclose(
        interpolate_radial(g, radii), np.broadcast_to(spherical_cap(0.1, radii), (8, 17)),
        atol=1e-8,
    )


def test_pullback(coarse_neck):
    top = disk_from_function(80, coarse_neck.n_x, lambda R, T: R**2 + 0 * T)
    bottom = disk_zeros(80, coarse_neck.n_x)
    band = (1.0, 1.5)
    pulled = pullback_to_neck(top, bottom, coarse_neck, band)
    sheet = coarse_neck.s >= 1.5
    physical = pulled.values[:, sheet] * coarse_neck.omega[sheet]
    np.testing.assert_allclose(
        physical, np.broadcast_to(coarse_neck.omega[sheet] ** 2, physical.shape), atol=1e-10
    )
    assert np.all(pulled.values[:, coarse_neck.s <= 1.0] == 0.0)


def test_pullback_of_a_quadratic_form(coarse_neck):
    a, b, c = 0.3, -0.7, 1.1

    def form(x):
        return a * np.cos(x) ** 2 + b * np.sin(x) ** 2 + c * np.cos(x) * np.sin(x)

    top = disk_from_function(80, coarse_neck.n_x, lambda R, T: R**2 * form(T))
    pulled = pullback_to_neck(top, disk_zeros(80, coarse_neck.n_x), coarse_neck, (1.0, 1.5))
    sheet = coarse_neck.s >= 1.5
    angular = form(coarse_neck.x)[:, None]
    np.testing.assert_allclose(
        pulled.values[:, sheet], angular * coarse_neck.omega[sheet], atol=1e-10
    )


def test_pullback_checks_grids(coarse_neck):
    wrong = disk_zeros(20, 16)
    with pytest.raises(ValueError):
        pullback_to_neck(wrong, wrong, coarse_neck)


def test_log_source_and_derivative_limit():
    assert np.max(np.abs(log_source(disk_zeros(30, 8)))) == 0.0
    limit = derivative_limit_disk(0.0, np.zeros(8), n_r=30)
    assert limit.sup_norm() == 0.0
    limit = derivative_limit_disk(1e-3, np.zeros(8), n_r=60)
    assert 0.0 < limit.sup_norm() <= 1e-4
    assert isinstance(limit, DiskField)


def test_derivative_limit_vanishes_to_first_order_at_the_origin():
    theta = disk_grid(60, 8)[1]
    limit = derivative_limit_disk(1e-3, 1e-4 * np.cos(2 * theta), n_r=60)
    scale = limit.sup_norm()
    assert scale > 0.0
    a, alpha, beta = origin_jet(limit.r, limit.values)
    assert max(abs(a), abs(alpha), abs(beta)) <= 1e-10 * scale
    assert abs(limit.origin) <= 1e-10 * scale
