"""Grid versions of the weighted norms on the neck and the log-log fits used to
read off decay rates.

The norm of order k is sup over latitudes s0 of omega(s0)^-gamma times the C^k
norm of u on the window |s - s0| <= 1/2. Hölder seminorms are not computed.
"""
import logging
from typing import Optional

import numpy as np
from scipy.ndimage import maximum_filter1d

from catcmc.base.schema import BoundaryData, CylinderField, FitResult, WeightedNormResult
from catcmc.modes import angular_derivative
from catcmc.operators import latitude_derivative, latitude_second_derivative

logger = logging.getLogger(__name__)


def _derivatives(u: CylinderField, order: int) -> list[np.ndarray]:
    values = u.values
    h = u.params.h
    terms = [values]
    if order >= 1:
        terms += [angular_derivative(values), latitude_derivative(values, h)]
    if order >= 2:
        terms += [
            angular_derivative(values, 2),
            latitude_derivative(angular_derivative(values), h),
            latitude_second_derivative(values, h),
        ]
    return terms


def window_norms(u: CylinderField, order: int = 2) -> np.ndarray:
    """C^order norm of u on the unit window centred at every grid latitude
    (windows are clipped at the ends of the neck)."""
    if order not in (0, 1, 2):
        raise ValueError(f"order must be 0, 1 or 2, got {order}")
    half = max(1, int(round(0.5 / u.params.h)))
    total = np.zeros(u.params.n_s)
    for term in _derivatives(u, order):
        column = np.max(np.abs(term), axis=0)
        total += maximum_filter1d(column, size=2 * half + 1, mode="nearest")
    return total


def weighted_norm(
    u: CylinderField,
    gamma: float,
    order: int = 2,
    weight_tau: Optional[float] = None,
) -> WeightedNormResult:
    """sup_{s0} omega(s0)^-gamma ||u||_{C^order(window at s0)}.

    Window centres range over |s0| <= l - 1/2 (only s0 = 0 on necks shorter
    than that). `weight_tau` replaces tau in the weight omega = tau cosh(s).
    """
    params = u.params
    tau = params.tau if weight_tau is None else weight_tau
    norms = window_norms(u, order)
    s = params.s
    centres = np.abs(s) <= params.l - 0.5 + 1e-12
    if not np.any(centres):
        centres = s == 0.0
    weighted = np.where(centres, (tau * params.cosh) ** (-gamma) * norms, -np.inf)
    j = int(np.argmax(weighted))
    return WeightedNormResult(
        gamma=gamma, order=order, value=float(weighted[j]), argmax_latitude=float(s[j])
    )


def boundary_norm(f: BoundaryData, order: int = 2) -> float:
    """C^order norm of the boundary data, the larger of the two circles."""
    best = 0.0
    for circle in (f.minus, f.plus):
        total = sum(
            float(np.max(np.abs(angular_derivative(circle, k))))
            for k in range(order + 1)
        )
        best = max(best, total)
    return best


def fit_decay_exponent(
    values: np.ndarray,
    r: np.ndarray,
    window: Optional[tuple[float, float]] = None,
) -> FitResult:
    """Least-squares slope of log|values| against log r on `window`.

    Points where the quantity vanishes are dropped; with fewer than two points
    left the exponent is None.
    """
    values = np.abs(np.asarray(values, dtype=float)).ravel()
    r = np.asarray(r, dtype=float).ravel()
    window = (float(np.min(r)), float(np.max(r))) if window is None else window
    mask = (r >= window[0]) & (r <= window[1]) & (values > 0.0) & (r > 0.0)
    points = int(np.count_nonzero(mask))
    if points < 2:
        logger.debug("decay fit on %s: quantity vanishes, no exponent", window)
        return FitResult(exponent=None, r_squared=0.0, window=window, points=points)

    x = np.log(r[mask])
    y = np.log(values[mask])
    slope, intercept = np.polyfit(x, y, 1)
    total = float(np.sum((y - y.mean()) ** 2))
    residual = float(np.sum((y - (slope * x + intercept)) ** 2))
    r_squared = 1.0 - residual / total if total > 0.0 else 1.0
    return FitResult(
        exponent=float(slope),
        r_squared=float(np.clip(r_squared, 0.0, 1.0)),
        window=window,
        points=points,
    )
