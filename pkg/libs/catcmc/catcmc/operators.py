"""Discrete mean curvature of immersions of the cylinder and the operators built
from it: the weighted mean curvature H' on the unit catenoid, its linearization
L' and the conjugate Jacobi operator L''.

Angular derivatives are spectral, latitude derivatives second-order centred
with second-order one-sided stencils on the two boundary latitudes. The normal
is X_x x X_s / |X_x x X_s| and H = (eG - 2fF + gE) / (EG - F^2) is the sum of
the principal curvatures with respect to it. On the catenoid this normal is
sech(s) e_r - tanh(s) e_z and the linearization is +(Laplacian + |A|^2).
"""
import logging
from dataclasses import dataclass
from functools import lru_cache
from typing import Callable, Optional

import numpy as np

from catcmc.base.schema import CylinderField, NeckParams
from catcmc.exceptions import DegenerateImmersionError
from catcmc.geometry import (
    catenoid_normal,
    catenoid_points,
    flat_annulus_points,
    sphere_points,
)
from catcmc.modes import angular_derivative, dealias

logger = logging.getLogger(__name__)

DEFAULT_EPS = 1e-4


def latitude_derivative(values: np.ndarray, h: float) -> np.ndarray:
    return np.gradient(values, h, axis=1, edge_order=2)


def latitude_second_derivative(values: np.ndarray, h: float) -> np.ndarray:
    out = np.empty_like(values)
    out[:, 1:-1] = values[:, 2:] - 2.0 * values[:, 1:-1] + values[:, :-2]
    out[:, 0] = 2.0 * values[:, 0] - 5.0 * values[:, 1] + 4.0 * values[:, 2] - values[:, 3]
    out[:, -1] = (
        2.0 * values[:, -1] - 5.0 * values[:, -2] + 4.0 * values[:, -3] - values[:, -4]
    )
    return out / (h * h)


def _dot(a: np.ndarray, b: np.ndarray) -> np.ndarray:
    return np.einsum("...i,...i->...", a, b)


@dataclass(frozen=True, eq=False)
class DiscreteImmersion:
    """Points X(x_i, s_j) in R^3 of an immersed cylinder, shape (n_x, n_s, 3)."""

    params: NeckParams
    points: np.ndarray

    def __post_init__(self):
        points = np.asarray(self.points, dtype=float)
        expected = (self.params.n_x, self.params.n_s, 3)
        if points.shape != expected:
            raise ValueError(f"points shape {points.shape} does not match {expected}")
        object.__setattr__(self, "points", points)

    def tangents(self) -> tuple[np.ndarray, np.ndarray]:
        return (
            angular_derivative(self.points),
            latitude_derivative(self.points, self.params.h),
        )

    def metric_determinant(self) -> np.ndarray:
        px, ps = self.tangents()
        E, F, G = _dot(px, px), _dot(px, ps), _dot(ps, ps)
        return E * G - F * F

    def check(self) -> "DiscreteImmersion":
        det = self.metric_determinant()
        bad = ~np.isfinite(det) | (det <= 0.0)
        if np.any(bad):
            i, j = np.argwhere(bad)[0]
            raise DegenerateImmersionError(
                f"EG - F^2 = {det[i, j]:.3e} at x={self.params.x[i]:.4f}, "
                f"s={self.params.s[j]:.4f}"
            )
        return self


def catenoid_immersion(params: NeckParams, scale: float = 1.0) -> DiscreteImmersion:
    """The neck scale * F sampled on the grid; scale = tau gives G_tau."""
    return DiscreteImmersion(params, catenoid_points(params, scale))


def sphere_immersion(params: NeckParams, radius: float) -> DiscreteImmersion:
    return DiscreteImmersion(params, sphere_points(params, radius))


def flat_annulus_immersion(params: NeckParams) -> DiscreteImmersion:
    return DiscreteImmersion(params, flat_annulus_points(params))


def catenoid_normal_field(params: NeckParams) -> np.ndarray:
    X, S = params.mesh()
    return catenoid_normal(X, S)


def unit_normal(X: DiscreteImmersion) -> np.ndarray:
    px, ps = X.tangents()
    n = np.cross(px, ps)
    return n / np.linalg.norm(n, axis=-1, keepdims=True)


def graph_immersion(
    base: DiscreteImmersion, normal: np.ndarray, u: CylinderField | np.ndarray
) -> DiscreteImmersion:
    """The normal graph base + u * normal."""
    values = u.values if isinstance(u, CylinderField) else np.asarray(u)
    if normal.shape != base.points.shape:
        raise ValueError("normal field does not match the base immersion")
    return DiscreteImmersion(base.params, base.points + values[..., None] * normal).check()


def mean_curvature(X: DiscreteImmersion) -> CylinderField:
    h = X.params.h
    px = angular_derivative(X.points)
    pxx = angular_derivative(X.points, 2)
    ps = latitude_derivative(X.points, h)
    pss = latitude_second_derivative(X.points, h)
    pxs = latitude_derivative(px, h)

    E, F, G = _dot(px, px), _dot(px, ps), _dot(ps, ps)
    det = E * G - F * F
    if np.any(~np.isfinite(det) | (det <= 0.0)):
        raise DegenerateImmersionError("metric determinant is not positive")

    n = np.cross(px, ps)
    n /= np.linalg.norm(n, axis=-1, keepdims=True)
    e, f, g = _dot(pxx, n), _dot(pxs, n), _dot(pss, n)
    return CylinderField(X.params, (e * G - 2.0 * f * F + g * E) / det)


@lru_cache(maxsize=32)
def _unit_catenoid(params: NeckParams) -> tuple[DiscreteImmersion, np.ndarray]:
    normal = catenoid_normal_field(params)
    normal.setflags(write=False)
    return catenoid_immersion(params), normal


@lru_cache(maxsize=32)
def _background(params: NeckParams, dealiased: bool) -> np.ndarray:
    """Weighted mean curvature of the discrete unit catenoid, i.e. the
    truncation error of the discretization at u = 0."""
    values = _raw_weighted_mc(CylinderField.zeros(params), dealiased)
    values.setflags(write=False)
    return values


def _raw_weighted_mc(u: CylinderField, dealiased: bool) -> np.ndarray:
    base, normal = _unit_catenoid(u.params)
    cosh = u.params.cosh
    H = mean_curvature(graph_immersion(base, normal, u.values * cosh))
    values = H.values * cosh
    return dealias(values) if dealiased else values


def weighted_mc(
    u: CylinderField, balanced: bool = True, dealiased: bool = True
) -> CylinderField:
    """H'(u) = cosh(s) H_F(cosh(s) u) over the unit catenoid F.

    With `balanced` the discrete value at u = 0 is subtracted, so the discrete
    catenoid is an exact discrete minimal surface. Output modes above n_x/3 are
    removed when `dealiased`.
    """
    values = _raw_weighted_mc(u, dealiased)
    if balanced:
        values = values - _background(u.params, dealiased)
    return CylinderField(u.params, values)


def apply_jacobi_conjugate(v: CylinderField) -> CylinderField:
    """L'' v = v_xx + v_ss + 2 sech^2(s) v."""
    params = v.params
    values = (
        angular_derivative(v.values, 2)
        + latitude_second_derivative(v.values, params.h)
        + 2.0 * v.values / params.cosh**2
    )
    return CylinderField(params, values)


def apply_weighted_lin(u: CylinderField) -> CylinderField:
    """L' u = sech(s) L''(cosh(s) u)."""
    cosh = u.params.cosh
    return apply_jacobi_conjugate(u * cosh) / cosh


def _step(w: CylinderField, eps: Optional[float]) -> float:
    if eps is not None:
        return eps
    scale = w.sup_norm()
    return DEFAULT_EPS / scale if scale > 0.0 else DEFAULT_EPS


def central_difference(
    op: Callable[[CylinderField], CylinderField],
    u0: CylinderField,
    w: CylinderField,
    eps: Optional[float] = None,
    second: Optional[CylinderField] = None,
    second_eps: Optional[float] = None,
) -> CylinderField:
    """[op(u0 + eps w) - op(u0 - eps w)] / (2 eps), or with `second` the
    4-point stencil for the mixed second derivative in directions (second, w)
    with step `second_eps` along `second`.

    Default steps make each perturbation 1e-4 in sup norm.
    """
    eps = _step(w, eps)
    if second is None:
        return (op(u0 + eps * w) - op(u0 - eps * w)) / (2.0 * eps)
    eta = _step(second, second_eps)
    return (
        op(u0 + eta * second + eps * w)
        - op(u0 + eta * second - eps * w)
        - op(u0 - eta * second + eps * w)
        + op(u0 - eta * second - eps * w)
    ) / (4.0 * eps * eta)


def directional_dH(
    base: DiscreteImmersion,
    u0: CylinderField,
    w: CylinderField,
    eps: Optional[float] = None,
    normal: Optional[np.ndarray] = None,
    second: Optional[CylinderField] = None,
) -> CylinderField:
    """Finite-difference DH|_{u0}(w) of u -> H(base + u N), N the normal of the
    base (computed from the grid unless given). With `second`, the mixed
    second derivative D^2H|_{u0}(second, w)."""
    normal = unit_normal(base) if normal is None else normal

    def H(u: CylinderField) -> CylinderField:
        return mean_curvature(graph_immersion(base, normal, u))

    return central_difference(H, u0, w, eps, second)


def weighted_directional_dH(
    u0: CylinderField,
    w: CylinderField,
    eps: Optional[float] = None,
    second: Optional[CylinderField] = None,
    second_eps: Optional[float] = None,
) -> CylinderField:
    """Finite-difference derivative of H' at u0 in direction w."""
    return central_difference(weighted_mc, u0, w, eps, second, second_eps)


def richardson_check(
    op: Callable[[CylinderField], CylinderField],
    u0: CylinderField,
    w: CylinderField,
    eps: Optional[float] = None,
) -> tuple[CylinderField, float]:
    """Derivative at step eps/2 and the interior sup change from step eps,
    the Richardson estimate of the O(eps^2) error."""
    eps = _step(w, eps)
    coarse = central_difference(op, u0, w, eps)
    fine = central_difference(op, u0, w, eps / 2.0)
    error = (fine - coarse).sup_norm(interior=True) / 3.0
    logger.debug("Richardson estimate of the difference error: %.3e", error)
    return fine, error
