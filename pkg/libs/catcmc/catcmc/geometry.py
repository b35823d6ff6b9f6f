"""Closed-form geometry of the catenoid, its scaled necks and the maps used to
compare necks of different scale.

The catenoid is conformally parametrized over the cylinder by
F(x, s) = cosh(s) e_r(x) + s e_z. The neck of scale tau is G_tau = tau F on
|s| <= l_tau = arccosh(1/tau), i.e. the part of tau C inside the unit tube.
"""
import logging
import math
from typing import Optional

import numpy as np
from scipy.optimize import brentq

from catcmc import settings
from catcmc.base.schema import NeckParams
from catcmc.exceptions import DomainError, RootFindError

logger = logging.getLogger(__name__)


def _check_scale(tau: float, name: str = "tau"):
    if not 0.0 < tau < 1.0:
        raise DomainError(f"{name} must lie in (0, 1), got {tau}")


def arccosh_inv(tau: float) -> float:
    """Half-length l_tau = arccosh(1/tau), as ln(z + sqrt(z^2 - 1)), z = 1/tau."""
    _check_scale(tau)
    z = 1.0 / tau
    return math.log(z + math.sqrt(z * z - 1.0))


def catenoid_point(x, s) -> np.ndarray:
    """Points of the unit catenoid; the last axis holds (x, y, z)."""
    x, s = np.broadcast_arrays(np.asarray(x, dtype=float), np.asarray(s, dtype=float))
    c = np.cosh(s)
    return np.stack([c * np.cos(x), c * np.sin(x), s], axis=-1)


def catenoid_normal(x, s) -> np.ndarray:
    """Unit normal sech(s) e_r(x) - tanh(s) e_z."""
    x, s = np.broadcast_arrays(np.asarray(x, dtype=float), np.asarray(s, dtype=float))
    sech = 1.0 / np.cosh(s)
    return np.stack([sech * np.cos(x), sech * np.sin(x), -np.tanh(s)], axis=-1)


def neck_params(
    tau: float,
    gamma: Optional[float] = None,
    n_x: Optional[int] = None,
    n_s: Optional[int] = None,
) -> NeckParams:
    """Build the parameters of the neck of scale `tau`.

    Grid sizes default to the configured ones; an even `n_s` is bumped to the
    next odd number so that the waist s = 0 is a grid latitude.
    """
    gamma = settings.gamma() if gamma is None else gamma
    n_x = settings.n_x() if n_x is None else n_x
    n_s = settings.n_s() if n_s is None else n_s
    if n_s % 2 == 0:
        logger.info("n_s=%d is even, using %d so that s=0 is a grid node", n_s, n_s + 1)
        n_s += 1
    return NeckParams(tau=tau, l=arccosh_inv(tau), gamma=gamma, n_x=n_x, n_s=n_s)


def localization_profile(s0, s):
    """c_{s0}(s) = cosh(s) + tanh(s0) sinh(s) = cosh(s + s0) / cosh(s0)."""
    return np.cosh(s) + np.tanh(s0) * np.sinh(s)


def normalized_localization(x, s, s0: float) -> np.ndarray:
    """The catenoid near latitude s0, rescaled by 1/cosh(s0) and recentred:
    c_{s0}(s) e_r(x) + s e_z / cosh(s0), for offsets s in [-1/2, 1/2]."""
    x, s = np.broadcast_arrays(np.asarray(x, dtype=float), np.asarray(s, dtype=float))
    c = localization_profile(s0, s)
    return np.stack([c * np.cos(x), c * np.sin(x), s / np.cosh(s0)], axis=-1)


def limit_localization(x, s) -> np.ndarray:
    """e^s e_r(x), the limit of the normalized localizations as s0 -> infinity."""
    x, s = np.broadcast_arrays(np.asarray(x, dtype=float), np.asarray(s, dtype=float))
    e = np.exp(s)
    return np.stack([e * np.cos(x), e * np.sin(x), np.zeros_like(s)], axis=-1)


def matching_scale(tau0: float, tau: float) -> float:
    """The dilation lambda making lambda N_tau a normal graph over N_tau0 with
    matching boundary circles."""
    _check_scale(tau0, "tau0")
    _check_scale(tau)
    l0 = arccosh_inv(tau0)
    l = arccosh_inv(tau)
    root0 = math.sqrt(1.0 - tau0 * tau0)
    return (tau0 * tau0 * l0 + root0) / (root0 + tau0 * tau * l)


def matching_scale_rate(tau0: float, step: Optional[float] = None) -> float:
    """d lambda / d tau at tau = tau0 by central difference."""
    step = 1e-4 * tau0 if step is None else step
    return (matching_scale(tau0, tau0 + step) - matching_scale(tau0, tau0 - step)) / (
        2.0 * step
    )


def dilation_jacobi_profile(s):
    """xi(s) = s tanh(s) - 1, the profile of the dilation Jacobi field."""
    return s * np.tanh(s) - 1.0


def singular_length() -> float:
    """The positive root of s tanh(s) = 1 (about 1.19968), where the even
    mode-0 Jacobi field vanishes and the Dirichlet problem degenerates."""
    return brentq(lambda s: s * math.tanh(s) - 1.0, 0.5, 2.0, xtol=1e-15)


def neck_correspondence(s, tau0: float, tau: float) -> np.ndarray:
    """Latitudes sigma(s) such that lambda G_tau(sigma) - G_tau0(s) is normal to
    the neck N_tau0 at G_tau0(s).

    The correspondence is rotationally symmetric and odd in s, and maps the
    boundary latitude l_tau0 to l_tau.
    """
    lam = matching_scale(tau0, tau)
    l_tau = arccosh_inv(tau)
    s = np.asarray(s, dtype=float)
    sigma = np.zeros_like(s)

    for index, value in np.ndenumerate(np.abs(s)):
        if value == 0.0:
            continue

        def tangential(sig, value=value):
            return (
                (lam * tau * math.cosh(sig) - tau0 * math.cosh(value)) * math.sinh(value)
                + lam * tau * sig
                - tau0 * value
            )

        upper = l_tau + 1.0
        if tangential(0.0) > 0.0 or tangential(upper) < 0.0:
            raise RootFindError(
                f"no correspondence for s={value} between tau0={tau0} and tau={tau}"
            )
        sigma[index] = brentq(tangential, 0.0, upper, xtol=1e-14, rtol=1e-14)
    return np.sign(s) * sigma


def reparametrization_rate(s, tau0: float) -> np.ndarray:
    """d sigma / d tau at tau = tau0 in closed form:
    -(tau0 lambda' + 1) (tanh s + s sech^2 s) / tau0."""
    s = np.asarray(s, dtype=float)
    rate = matching_scale_rate(tau0)
    return -(tau0 * rate + 1.0) * (np.tanh(s) + s / np.cosh(s) ** 2) / tau0


def dilation_variation(s, tau0: float) -> np.ndarray:
    """Normal speed of the family lambda G_tau(sigma) at tau = tau0:
    (tau0 lambda' + 1) (F . N) = -(tau0 lambda' + 1) xi(s)."""
    rate = matching_scale_rate(tau0)
    return -(tau0 * rate + 1.0) * dilation_jacobi_profile(np.asarray(s, dtype=float))


def catenoid_points(params: NeckParams, scale: float = 1.0) -> np.ndarray:
    X, S = params.mesh()
    return scale * catenoid_point(X, S)


def sphere_points(params: NeckParams, radius: float) -> np.ndarray:
    """Round sphere of the given radius, parametrized over the same cylinder by
    radius * (sech(s) e_r(x) + tanh(s) e_z)."""
    X, S = params.mesh()
    sech = 1.0 / np.cosh(S)
    return radius * np.stack([sech * np.cos(X), sech * np.sin(X), np.tanh(S)], axis=-1)


def flat_annulus_points(params: NeckParams) -> np.ndarray:
    X, S = params.mesh()
    return limit_localization(X, S)
