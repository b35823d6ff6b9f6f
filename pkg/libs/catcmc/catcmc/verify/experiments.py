"""Numerical experiments on families of necks: improved decay, O(tau) closeness
to the disk limit, and the tau-derivative of the solutions and its limit.

Sweeps over tau run on a thread pool capped by `settings.threads()`; results are
collected in input order.
"""
from __future__ import annotations

import logging
from concurrent.futures import ThreadPoolExecutor
from typing import Literal, Optional, Sequence

import numpy as np
from pydantic import BaseModel
from scipy.interpolate import CubicSpline

from catcmc import settings
from catcmc.base.schema import (
    BoundaryData,
    CylinderField,
    DiskField,
    FitResult,
    NeckParams,
    SolveReport,
)
from catcmc.exceptions import DomainError, NoConvergenceError
from catcmc.geometry import dilation_jacobi_profile, neck_correspondence, neck_params
from catcmc.modes import higher_part, lower_content, project_lower
from catcmc.operators import weighted_directional_dH
from catcmc.solvers.disk import (
    Band,
    cutoff_band,
    disk_linearized,
    interpolate_radial,
    log_source,
    normalize_disk,
    origin_jet,
    pullback_to_neck,
    sheet_limits,
    solve_cmc_disk,
    solve_disk_laplacian,
)
from catcmc.solvers.linear import solve_modified
from catcmc.solvers.nonlinear import solve_cmc_neck
from catcmc.verify.norms import boundary_norm, fit_decay_exponent, weighted_norm

logger = logging.getLogger(__name__)

ANCHORED_BAND = (1.0, 1.5)
ANNULUS = (0.5, 1.0)
DECAY_WINDOW = (0.25, 1.0)
DTAU_FRACTION = 0.1
ORDER_RANGE = (0.25, 2.0)


class DecayReport(BaseModel):
    tau: float
    delta: float
    fit: FitResult
    weighted_norm_one: float
    lower_norm: float
    lower_ratio: float
    rescaled_lower_norm: float
    rescaled_lower_ratio: float
    solve: SolveReport


class ContinuityReport(BaseModel):
    delta: float
    taus: list[float]
    distances: list[float]
    sheet_distances: list[float]
    fit: FitResult
    rescaled_distances: list[float]
    rescaled_fit: FitResult
    bottom_delta_sign: int
    band: tuple[float, float]


class DerivativeReport(BaseModel):
    delta: float
    taus: list[float]
    step: float
    distances: list[float]
    cauchy: list[float]
    order: Optional[float]
    richardson: Optional[float]
    step_error: float
    monotone: bool
    within_richardson: Optional[bool]
    annulus: tuple[float, float]


def _map(fn, items: Sequence, workers: Optional[int] = None) -> list:
    workers = settings.threads() if workers is None else workers
    if workers <= 1 or len(items) <= 1:
        return [fn(item) for item in items]
    with ThreadPoolExecutor(max_workers=min(workers, len(items))) as executor:
        futures = [executor.submit(fn, item) for item in items]
        return [future.result() for future in futures]


def _zeros_if_none(f: Optional[BoundaryData], n_x: int) -> BoundaryData:
    return BoundaryData.zeros(n_x) if f is None else f


def improved_decay_experiment(
    params: NeckParams,
    delta: float,
    f: Optional[BoundaryData] = None,
    *,
    n_r: Optional[int] = None,
    band: Band = ANCHORED_BAND,
    window: tuple[float, float] = DECAY_WINDOW,
) -> DecayReport:
    """Decay of the solution h' on one neck.

    Reports the radial exponent of the physical h = omega h' on the top sheet
    (where the cutoff is 1), the weighted norm of h' with gamma = 1, and the
    gamma-weighted norm of the lower part of h' - h*, h* the pullback of the
    disk limits, together with its ratio to tau. The lower norm is measured
    with the cutoff on `band` and again on the rescaled band [0.4l, 0.5l].
    """
    f = _zeros_if_none(f, params.n_x)
    u, report = solve_cmc_neck(params, delta, f)
    top, bottom = sheet_limits(delta, f, n_r)

    def lower_norm(cut: Band) -> float:
        pullback = pullback_to_neck(top, bottom, params, cut)
        return weighted_norm(project_lower(u - pullback), params.gamma).value

    interval = cutoff_band(params, band)
    sheet = params.s >= interval[1]
    physical = np.max(np.abs(u.values * params.omega), axis=0)
    fit = fit_decay_exponent(physical[sheet], params.omega[sheet], window)

    lower = lower_norm(band)
    rescaled = lower_norm("rescaled")
    logger.info(
        "decay tau=%g: exponent %s, lower norm %.3e (rescaled band %.3e)",
        params.tau,
        fit.exponent,
        lower,
        rescaled,
    )
    return DecayReport(
        tau=params.tau,
        delta=delta,
        fit=fit,
        weighted_norm_one=report.weighted_norm_one,
        lower_norm=lower,
        lower_ratio=lower / params.tau,
        rescaled_lower_norm=rescaled,
        rescaled_lower_ratio=rescaled / params.tau,
        solve=report,
    )


def decay_sweep(
    taus: Sequence[float],
    delta: float,
    f: Optional[BoundaryData] = None,
    **kwargs,
) -> list[DecayReport]:
    grid = {k: kwargs.pop(k) for k in ("gamma", "n_x", "n_s") if k in kwargs}
    return _map(
        lambda tau: improved_decay_experiment(neck_params(tau, **grid), delta, f, **kwargs),
        list(taus),
    )


def lower_norm_fit(reports: Sequence[DecayReport], rescaled: bool = False) -> FitResult:
    """Slope of log(lower norm) against log(tau) over a decay sweep."""
    norms = [r.rescaled_lower_norm if rescaled else r.lower_norm for r in reports]
    return fit_decay_exponent(np.array(norms), np.array([r.tau for r in reports]))


def _continuity_at(
    tau: float,
    delta: float,
    f: Optional[BoundaryData],
    bottom_delta_sign: int,
    band: Band,
    n_r: Optional[int],
    grid: dict,
) -> tuple[float, float, float]:
    params = neck_params(tau, **grid)
    f = _zeros_if_none(f, params.n_x)
    u, _ = solve_cmc_neck(params, delta, f)
    top, bottom = sheet_limits(delta, f, n_r, bottom_delta_sign)

    def distance_on(cut: Band) -> float:
        difference = u - pullback_to_neck(top, bottom, params, cut)
        support = np.abs(params.s) >= cutoff_band(params, cut)[1]
        return float(np.max(np.abs(difference.values[:, support])))

    # the sheets as graphs over the disk, outside r = 1/4
    outer = params.omega >= 0.25
    physical = u.values * params.omega
    radii = params.omega
    sheet_distance = 0.0
    for side, disk in ((params.s > 0.0, top), (params.s < 0.0, bottom)):
        mask = side & outer
        if np.any(mask):
            limit = interpolate_radial(disk, radii[mask])
            sheet_distance = max(
                sheet_distance, float(np.max(np.abs(physical[:, mask] - limit)))
            )
    return distance_on(band), distance_on("rescaled"), sheet_distance


def tau_continuity_experiment(
    delta: float,
    f: Optional[BoundaryData] = None,
    tau_list: Sequence[float] = (0.1, 0.05, 0.025),
    *,
    bottom_delta_sign: Optional[int] = None,
    band: Band = ANCHORED_BAND,
    n_r: Optional[int] = None,
    **grid,
) -> ContinuityReport:
    """Distance d(tau) = sup |h'_tau - h*_tau| where the cutoff is 1, and the
    slope of log d against log tau, on `band` and on the rescaled band.

    With `bottom_delta_sign` unset both orientations of the bottom sheet are
    tried and the one giving the smaller distance at the smallest tau is kept.
    """
    taus = list(tau_list)
    signs = [1, -1] if bottom_delta_sign is None else [bottom_delta_sign]
    best = None
    for sign in signs:
        results = _map(
            lambda tau, sign=sign: _continuity_at(tau, delta, f, sign, band, n_r, grid),
            taus,
        )
        distances = [d for d, _, _ in results]
        smallest = distances[int(np.argmin(taus))]
        logger.debug("bottom sign %+d: distances %s", sign, distances)
        if best is None or smallest < best[0] * (1.0 - 1e-9):
            best = (smallest, sign, results)
        if delta == 0.0:
            break

    _, sign, results = best
    distances = [d for d, _, _ in results]
    rescaled = [d for _, d, _ in results]
    fit = fit_decay_exponent(np.array(distances), np.array(taus))
    rescaled_fit = fit_decay_exponent(np.array(rescaled), np.array(taus))
    anchor = cutoff_band(neck_params(min(taus), **grid), band)
    logger.info(
        "continuity slope %s, rescaled band slope %s (bottom sign %+d)",
        fit.exponent,
        rescaled_fit.exponent,
        sign,
    )
    return ContinuityReport(
        delta=delta,
        taus=taus,
        distances=distances,
        sheet_distances=[s for _, _, s in results],
        fit=fit,
        rescaled_distances=rescaled,
        rescaled_fit=rescaled_fit,
        bottom_delta_sign=sign,
        band=anchor,
    )


def tau_derivative(
    tau0: float,
    dtau: float,
    delta: float,
    f: Optional[BoundaryData] = None,
    *,
    gamma: Optional[float] = None,
    n_x: Optional[int] = None,
    n_s: Optional[int] = None,
) -> CylinderField:
    """Central difference in tau of the physical solutions h_tau = omega h'_tau,
    pulled back to the tau0 neck by the normal-graph correspondence."""
    if not 0.0 < dtau <= tau0 / 10.0 * (1.0 + 1e-12):
        raise DomainError(f"dtau must lie in (0, tau0/10], got {dtau} for tau0={tau0}")
    base = neck_params(tau0, gamma, n_x, n_s)
    f = _zeros_if_none(f, base.n_x)

    def pulled(tau: float) -> np.ndarray:
        params = neck_params(tau, gamma, n_x, n_s)
        u, _ = solve_cmc_neck(params, delta, f)
        physical = params.omega * u.values
        sigma = np.clip(neck_correspondence(base.s, tau0, tau), -params.l, params.l)
        return CubicSpline(params.s, physical, axis=1)(sigma)

    with ThreadPoolExecutor(max_workers=2) as executor:
        plus, minus = executor.map(pulled, (tau0 + dtau, tau0 - dtau))
    return CylinderField(base, (plus - minus) / (2.0 * dtau))


def derivative_limit_disk(
    delta: float,
    f: Optional[np.ndarray] = None,
    sheet: Literal["top", "bottom"] = "top",
    *,
    n_r: Optional[int] = None,
    n_theta: Optional[int] = None,
    bottom_delta_sign: int = 1,
    rtol: float = 1e-8,
    max_iter: Optional[int] = None,
) -> DiskField:
    """Limit of the tau-derivative on one sheet.

    With u the sheet limit in neck convention, solves
    DH_D|_u(v) = B_u(log r) + DH_D|_u(u u_r / r) for v with zero higher trace
    and vanishing value and gradient at the origin. B_u(log r) is `log_source`.
    """
    if sheet not in ("top", "bottom"):
        raise ValueError(f"sheet must be 'top' or 'bottom', got {sheet!r}")
    sign = -1.0 if sheet == "top" else -float(bottom_delta_sign)
    u = solve_cmc_disk(sign * delta, f, n_r, n_theta)
    max_iter = settings.max_iter() if max_iter is None else max_iter

    transport = u.values * np.gradient(u.values, u.r, axis=1, edge_order=2) / u.r
    rhs = log_source(u) + disk_linearized(u, transport)
    scale = float(np.max(np.abs(rhs)))
    v = DiskField(u.r, u.theta, np.zeros_like(u.values))
    if scale == 0.0:
        return v

    residual = float("inf")
    for iteration in range(1, max_iter + 1):
        residual_field = disk_linearized(u, v) - rhs
        gap = higher_part(v.boundary)
        residual = float(np.max(np.abs(residual_field))) / scale
        logger.debug("derivative limit iteration %d: residual %.3e", iteration, residual)
        if residual < rtol and np.max(np.abs(gap)) < rtol * scale:
            jet = origin_jet(v.r, v.values)
            return DiskField(v.r, v.theta, v.values, origin=jet[0])
        step = solve_disk_laplacian(residual_field, gap, v.r)
        v = normalize_disk(DiskField(v.r, v.theta, v.values - step))

    raise NoConvergenceError(
        f"derivative limit did not converge after {max_iter} iterations "
        f"(relative residual {residual:.3e})"
    )


def annulus_samples(
    field: CylinderField, radii: np.ndarray, side: Literal["top", "bottom"]
) -> np.ndarray:
    """Values of a neck field at the latitudes where omega = radii, on one
    sheet, shape (n_x, len(radii))."""
    params = field.params
    s = np.minimum(np.arccosh(radii / params.tau), params.l)
    s = s if side == "top" else -s
    return CubicSpline(params.s, field.values, axis=1)(s)


def _richardson_order(taus: list[float], cauchy: list[float], fallback: float) -> float:
    """Convergence order in tau0 from the last two Cauchy distances, clipped
    to ORDER_RANGE; `fallback` when they do not decrease."""
    if len(cauchy) < 2 or not cauchy[-2] > cauchy[-1] > 0.0:
        return fallback
    order = np.log(cauchy[-2] / cauchy[-1]) / np.log(taus[-2] / taus[-1])
    return float(np.clip(order, *ORDER_RANGE))


def derivative_convergence_experiment(
    delta: float,
    f: Optional[BoundaryData] = None,
    tau_list: Sequence[float] = (0.1, 0.05, 0.025),
    *,
    step: float = DTAU_FRACTION,
    annulus: tuple[float, float] = ANNULUS,
    samples: int = 41,
    n_r: Optional[int] = None,
    **grid,
) -> DerivativeReport:
    """Distance on the annulus between the finite-difference tau-derivative at
    each tau0 and its disk limit.

    The central difference uses dtau = step * tau0. Alongside the distances the
    report carries the Cauchy distances between consecutive tau0, the
    Richardson estimate c_last / (q^p - 1) of the remaining error at the
    smallest tau0 (q the last tau0 ratio, p the observed order, gamma when it
    cannot be observed), and the difference-step error from halving dtau.
    """
    if not 0.0 < step <= DTAU_FRACTION:
        raise DomainError(f"step must lie in (0, {DTAU_FRACTION}], got {step}")
    taus = sorted(tau_list, reverse=True)
    n_x = grid.get("n_x") or settings.n_x()
    gamma = grid.get("gamma") or settings.gamma()
    f = _zeros_if_none(f, n_x)
    radii = np.linspace(annulus[0], annulus[1], samples)

    limits = {}
    for side, circle in (("top", f.plus), ("bottom", f.minus)):
        disk = derivative_limit_disk(delta, circle, side, n_r=n_r)
        limits[side] = interpolate_radial(disk, radii)

    def sample(tau0: float, fraction: float = step) -> dict:
        derivative = tau_derivative(tau0, fraction * tau0, delta, f, **grid)
        return {side: annulus_samples(derivative, radii, side) for side in limits}

    def sup_distance(a: dict, b: dict) -> float:
        return max(float(np.max(np.abs(a[side] - b[side]))) for side in limits)

    sampled = _map(sample, taus)
    distances = [sup_distance(values, limits) for values in sampled]
    cauchy = [sup_distance(a, b) for a, b in zip(sampled, sampled[1:])]
    step_error = sup_distance(sample(taus[-1], step / 2.0), sampled[-1]) / 3.0

    order = richardson = within = None
    if cauchy:
        order = _richardson_order(taus, cauchy, gamma)
        richardson = cauchy[-1] / ((taus[-2] / taus[-1]) ** order - 1.0)
        within = distances[-1] <= 10.0 * richardson
        if not within:
            logger.warning(
                "distance to the limit %.3e exceeds 10x the Richardson estimate %.3e",
                distances[-1],
                richardson,
            )
    monotone = all(b < a for a, b in zip(distances, distances[1:]))
    logger.info(
        "derivative distances %s, order %s, step error %.3e", distances, order, step_error
    )
    return DerivativeReport(
        delta=delta,
        taus=list(taus),
        step=step,
        distances=distances,
        cauchy=cauchy,
        order=order,
        richardson=richardson,
        step_error=step_error,
        monotone=monotone,
        within_richardson=within,
        annulus=annulus,
    )
