import numpy as np
import pytest

from catcmc.base import BoundaryData, CylinderField
from catcmc.geometry import neck_params
from catcmc.verify.norms import boundary_norm, fit_decay_exponent, weighted_norm, window_norms


def test_weighted_norm_of_a_constant(neck):
    u = CylinderField.zeros(neck) + 2.0
    result = weighted_norm(u, 0.5)
    assert result.value == pytest.approx(2.0 * neck.tau**-0.5, rel=1e-10)
    assert result.argmax_latitude == 0.0
    assert result.order == 2


def test_weighted_norm_of_the_weight(neck):
    # omega^gamma has weighted C^0 norm about e^(1/4) at most
    u = CylinderField.from_profile(neck, neck.omega**0.5)
    result = weighted_norm(u, 0.5, order=0)
    assert 1.0 <= result.value <= np.exp(0.3)


def test_weighted_norm_on_a_short_neck():
    params = neck_params(0.9, n_x=8, n_s=33)
    assert params.l < 0.5
    result = weighted_norm(CylinderField.zeros(params) + 1.0, 0.5, order=0)
    assert result.argmax_latitude == 0.0


def test_window_norm_orders(coarse_neck):
    u = CylinderField.from_function(coarse_neck, lambda X, S: np.cos(2 * X))
    np.testing.assert_allclose(window_norms(u, 0), 1.0, atol=1e-12)
    np.testing.assert_allclose(window_norms(u, 2), 7.0, atol=1e-10)
    with pytest.raises(ValueError):
        window_norms(u, 3)


def test_boundary_norm():
    f = BoundaryData.from_modes(16, plus={2: (1e-2, 0.0)}, minus={3: (0.0, 1e-3)})
    assert boundary_norm(f) == pytest.approx(7e-2, rel=1e-10)
    assert boundary_norm(f, order=0) == pytest.approx(1e-2, rel=1e-10)


def test_fit_decay_exponent():
    r = np.linspace(0.1, 1.0, 20)
    fit = fit_decay_exponent(3.0 * r**2, r, (0.25, 1.0))
    assert fit.exponent == pytest.approx(2.0, abs=1e-10)
    assert fit.r_squared == pytest.approx(1.0)
    assert fit.points == np.count_nonzero(r >= 0.25)


def test_fit_of_a_vanishing_quantity():
    r = np.linspace(0.1, 1.0, 20)
    fit = fit_decay_exponent(np.zeros_like(r), r)
    assert fit.exponent is None
    assert fit.points == 0
