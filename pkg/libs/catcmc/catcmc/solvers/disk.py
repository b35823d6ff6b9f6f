"""The tau = 0 limit: constant mean curvature graphs over the unit disk and their
pullback to the neck.

Disk fields live on the staggered polar grid r_i = (i + 1/2) dr, dr = 1/(n_r - 1/2),
so the last ring is the Dirichlet circle r = 1 and no node sits at the origin.
H_D(g) = -div(grad g / W), W = sqrt(1 + |grad g|^2), is the mean curvature of the
graph z = g with the downward normal, discretized in flux form (radial fluxes at
the half radii, r_{-1/2} = 0) with spectral angular derivatives.
"""
import logging
from typing import Literal, Optional, Union

import numpy as np
from scipy.interpolate import CubicSpline

from catcmc import settings
from catcmc.base.schema import BoundaryData, CylinderField, DiskField, NeckParams, angle_grid
from catcmc.exceptions import (
    DomainError,
    InterpolationRangeError,
    ModeContentError,
    NoConvergenceError,
)
from catcmc.modes import angular_derivative, higher_part, lower_content
from catcmc.solvers.tridiagonal import solve_tridiagonal

logger = logging.getLogger(__name__)

DISK_SMALLNESS = 0.25
MODE_CONTENT_TOL = 1e-12
DEFAULT_EPS = 1e-4

Band = Union[Literal["rescaled", "fixed"], tuple[float, float]]


def disk_grid(n_r: int, n_theta: int) -> tuple[np.ndarray, np.ndarray]:
    if n_r < 4:
        raise DomainError(f"n_r must be at least 4, got {n_r}")
    dr = 1.0 / (n_r - 0.5)
    return (np.arange(n_r) + 0.5) * dr, angle_grid(n_theta)


def disk_zeros(n_r: int, n_theta: int) -> DiskField:
    r, theta = disk_grid(n_r, n_theta)
    return DiskField(r, theta, np.zeros((n_theta, n_r)))


def disk_from_function(n_r: int, n_theta: int, fn) -> DiskField:
    """Sample fn(r, theta) on the grid; the origin value is fn(0, 0)."""
    r, theta = disk_grid(n_r, n_theta)
    R, T = np.meshgrid(r, theta)
    return DiskField(r, theta, fn(R, T), origin=float(fn(0.0, 0.0)))


def _spacing(r: np.ndarray) -> float:
    return float(r[1] - r[0])


def _half_radii(r: np.ndarray) -> np.ndarray:
    """r_{i+1/2} for i = 0..n_r - 2."""
    return r[:-1] + 0.5 * _spacing(r)


def _divergence(r: np.ndarray, flux: np.ndarray, angular: np.ndarray) -> np.ndarray:
    """(1/r) d_r(r Q_r) + (1/r) d_theta(Q_theta) at the interior rings, from the
    radial fluxes r Q_r at the half radii and Q_theta at the nodes."""
    dr = _spacing(r)
    padded = np.concatenate([np.zeros((flux.shape[0], 1)), flux], axis=1)
    radial = (padded[:, 1:] - padded[:, :-1]) / (r[None, :-1] * dr)
    return radial + angular_derivative(angular)[:, :-1] / r[None, :-1]


def _half_gradient(r: np.ndarray, values: np.ndarray):
    """g_r and g_theta / r at the half radii."""
    dr = _spacing(r)
    g_theta = angular_derivative(values)
    g_r = (values[:, 1:] - values[:, :-1]) / dr
    tangential = 0.5 * (g_theta[:, 1:] + g_theta[:, :-1]) / _half_radii(r)[None, :]
    return g_r, tangential


def _node_gradient(r: np.ndarray, values: np.ndarray):
    """g_r and g_theta / r at the nodes."""
    return (
        np.gradient(values, r, axis=1, edge_order=2),
        angular_derivative(values) / r[None, :],
    )


def mean_curvature_disk(g: DiskField) -> np.ndarray:
    """H_D(g) at the interior rings, shape (n_theta, n_r - 1)."""
    r = g.r
    g_r, g_t = _half_gradient(r, g.values)
    flux = _half_radii(r)[None, :] * g_r / np.sqrt(1.0 + g_r**2 + g_t**2)
    n_r, n_t = _node_gradient(r, g.values)
    angular = n_t / np.sqrt(1.0 + n_r**2 + n_t**2)
    return -_divergence(r, flux, angular)


def laplacian_diagonals(r: np.ndarray, ks: np.ndarray):
    """Rows of -Delta_h for the Fourier modes `ks` at the interior rings."""
    dr = _spacing(r)
    nodes = r[:-1]
    outer = nodes + 0.5 * dr
    inner = nodes - 0.5 * dr
    k2 = np.asarray(ks, dtype=float).reshape(-1, 1) ** 2
    lower = np.broadcast_to(-inner / (nodes * dr**2), (k2.shape[0], nodes.shape[0]))
    diag = (outer + inner) / (nodes * dr**2) + k2 / nodes**2
    upper = np.broadcast_to(-outer / (nodes * dr**2), diag.shape)
    return lower, diag, upper


def solve_disk_laplacian(
    rhs: np.ndarray, boundary: np.ndarray, r: np.ndarray
) -> np.ndarray:
    """v with -Delta_h v = rhs at the interior rings and v = boundary on r = 1.

    `rhs` has shape (n_theta, n_r - 1); returns (n_theta, n_r).
    """
    n_theta = rhs.shape[0]
    coefficients = np.fft.rfft(rhs, axis=0)
    edge = np.fft.rfft(boundary)
    ks = np.arange(coefficients.shape[0])
    if n_theta % 2 == 0:
        # odd spectral derivatives drop the Nyquist mode, so H_D sees no
        # angular term there
        ks[-1] = 0
    lower, diag, upper = laplacian_diagonals(r, ks)
    b = np.array(coefficients, dtype=complex)
    b[:, -1] -= upper[:, -1] * edge
    interior = solve_tridiagonal(lower, diag, upper, b)
    solution = np.concatenate([interior, edge[:, None]], axis=1)
    return np.fft.irfft(solution, n=n_theta, axis=0)


def origin_jet(r: np.ndarray, values: np.ndarray) -> tuple[float, float, float]:
    """(a, alpha, beta) of the value and gradient at the origin, from the even
    fit a + b r^2 of mode 0 and the odd fits alpha r + c r^3 of cos and sin on
    the two innermost rings."""
    n = values.shape[0]
    r0, r1 = r[0], r[1]
    c0 = np.fft.rfft(values[:, 0]) / n
    c1 = np.fft.rfft(values[:, 1]) / n
    p0, p1 = c0[0].real, c1[0].real
    a = (r1**2 * p0 - r0**2 * p1) / (r1**2 - r0**2)

    def odd(q0, q1):
        return (r1**3 * q0 - r0**3 * q1) / (r0 * r1 * (r1**2 - r0**2))

    alpha = odd(2.0 * c0[1].real, 2.0 * c1[1].real)
    beta = odd(-2.0 * c0[1].imag, -2.0 * c1[1].imag)
    return float(a), float(alpha), float(beta)


def affine_part(r: np.ndarray, theta: np.ndarray, jet: tuple[float, float, float]):
    a, alpha, beta = jet
    return a + np.outer(alpha * np.cos(theta) + beta * np.sin(theta), r)


def normalize_disk(g: DiskField) -> DiskField:
    """Subtract the affine function with the same origin jet. Affine functions
    are exactly harmonic for -Delta_h and carry no higher modes."""
    jet = origin_jet(g.r, g.values)
    values = g.values - affine_part(g.r, g.theta, jet)
    return DiskField(g.r, g.theta, values, origin=0.0)


def _check_disk_data(delta: float, f: np.ndarray, smallness: float):
    if abs(delta) > smallness or np.max(np.abs(f)) > smallness:
        raise DomainError(
            f"disk data (|delta|={abs(delta):.3e}, |f|={np.max(np.abs(f)):.3e}) "
            f"above the smallness threshold {smallness:.3e}"
        )
    content = lower_content(f)
    if content > MODE_CONTENT_TOL:
        raise ModeContentError(f"disk boundary data carries lower modes of size {content:.3e}")


def solve_cmc_disk(
    delta: float,
    f: Optional[np.ndarray] = None,
    n_r: Optional[int] = None,
    n_theta: Optional[int] = None,
    *,
    tol: Optional[float] = None,
    max_iter: Optional[int] = None,
    smallness: float = DISK_SMALLNESS,
) -> DiskField:
    """The normalized g with H_D(g) = delta, higher trace f on r = 1 and
    g(0) = grad g(0) = 0, by Picard iteration with the disk Laplacian."""
    n_r = settings.n_r() if n_r is None else n_r
    if f is None:
        n_theta = settings.n_x() if n_theta is None else n_theta
        f = np.zeros(n_theta)
    f = np.asarray(f, dtype=float)
    n_theta = f.shape[0]
    max_iter = settings.max_iter() if max_iter is None else max_iter
    tol = settings.tol_factor() * max(1.0, abs(delta)) if tol is None else tol
    _check_disk_data(delta, f, smallness)

    g = disk_zeros(n_r, n_theta)
    residual = mismatch = float("inf")
    for iteration in range(1, max_iter + 1):
        residual_field = mean_curvature_disk(g) - delta
        gap = higher_part(g.boundary) - f
        residual = float(np.max(np.abs(residual_field)))
        mismatch = float(np.max(np.abs(gap)))
        logger.debug(
            "disk iteration %d: residual %.3e, trace mismatch %.3e",
            iteration,
            residual,
            mismatch,
        )
        if residual < tol and mismatch < tol:
            logger.info(
                "disk solve delta=%g converged in %d iterations (residual %.3e)",
                delta,
                iteration,
                residual,
            )
            jet = origin_jet(g.r, g.values)
            return DiskField(g.r, g.theta, g.values, origin=jet[0])
        step = solve_disk_laplacian(residual_field, gap, g.r)
        g = normalize_disk(DiskField(g.r, g.theta, g.values - step))

    raise NoConvergenceError(
        f"disk solve did not converge after {max_iter} iterations (residual "
        f"{residual:.3e}, trace mismatch {mismatch:.3e}, tolerance {tol:.3e})"
    )


def spherical_cap(delta: float, r):
    """Height of the sphere of mean curvature delta through the origin with
    horizontal tangent plane there: sign(delta) (sqrt(R^2 - r^2) - R), R = 2/|delta|."""
    r = np.asarray(r, dtype=float)
    if delta == 0.0:
        return np.zeros_like(r) if r.ndim else 0.0
    if np.any(np.abs(delta * r) >= 2.0):
        raise DomainError(f"|delta r| must be below 2, got delta={delta}")
    R = 2.0 / abs(delta)
    value = np.sign(delta) * (np.sqrt(R * R - r * r) - R)
    return value if r.ndim else float(value)


def sheet_limits(
    delta: float,
    f: BoundaryData,
    n_r: Optional[int] = None,
    bottom_delta_sign: int = 1,
    **kwargs,
) -> tuple[DiskField, DiskField]:
    """Disk limits of the top and bottom sheets, as neck displacements.

    A neck displacement is the height -u on the top sheet and +u on the bottom
    one, and both sheets have mean curvature delta with respect to the neck
    normal, so each limit solves H_D = -delta in neck convention.
    `bottom_delta_sign = -1` flips the bottom sheet.
    """
    if bottom_delta_sign not in (1, -1):
        raise ValueError("bottom_delta_sign must be +1 or -1")
    top = solve_cmc_disk(-delta, f.plus, n_r, **kwargs)
    bottom = solve_cmc_disk(-bottom_delta_sign * delta, f.minus, n_r, **kwargs)
    return top, bottom


def smooth_step(t) -> np.ndarray:
    """C-infinity step: 0 for t <= 0, 1 for t >= 1."""
    t = np.asarray(t, dtype=float)
    with np.errstate(divide="ignore", over="ignore"):
        rise = np.where(t > 0.0, np.exp(-1.0 / np.where(t > 0.0, t, 1.0)), 0.0)
        fall = np.where(t < 1.0, np.exp(-1.0 / np.where(t < 1.0, 1.0 - t, 1.0)), 0.0)
    return rise / (rise + fall)


def cutoff_band(params: NeckParams, band: Band = "rescaled") -> tuple[float, float]:
    if band == "rescaled":
        return 0.4 * params.l, 0.5 * params.l
    if band == "fixed":
        if params.l <= 11.0:
            raise DomainError(
                f"the [10, 11] cutoff band needs l > 11, got l={params.l:.3f}"
            )
        return 10.0, 11.0
    start, end = band
    if not 0.0 <= start < end < params.l:
        raise DomainError(f"cutoff band {band} must satisfy 0 <= start < end < l")
    return float(start), float(end)


def cutoff(s, band: tuple[float, float]) -> np.ndarray:
    """psi(s): 0 for s <= band start, 1 for s >= band end."""
    start, end = band
    return smooth_step((np.asarray(s, dtype=float) - start) / (end - start))


def interpolate_radial(g: DiskField, radii: np.ndarray) -> np.ndarray:
    """g at (theta_i, radii_j) by cubic splines in r through the origin value."""
    r = np.concatenate([[0.0], g.r])
    values = np.concatenate([np.full((g.n_theta, 1), g.origin), g.values], axis=1)
    return CubicSpline(r, values, axis=1)(radii)


def pullback_to_neck(
    top: DiskField, bottom: DiskField, params: NeckParams, band: Band = "rescaled"
) -> CylinderField:
    """h*(x, s) = [psi(s) top(omega, x) + psi(-s) bottom(omega, x)] / omega,
    omega = tau cosh(s)."""
    for sheet in (top, bottom):
        if sheet.n_theta != params.n_x:
            raise ValueError(
                f"disk field has {sheet.n_theta} angles, neck grid has {params.n_x}"
            )
    omega = params.omega
    if omega.max() > 1.0 + 1e-12:
        raise InterpolationRangeError(
            f"neck radius {omega.max():.15f} leaves the unit disk"
        )
    radii = np.minimum(omega, 1.0)
    interval = cutoff_band(params, band)
    values = (
        cutoff(params.s, interval) * interpolate_radial(top, radii)
        + cutoff(-params.s, interval) * interpolate_radial(bottom, radii)
    ) / omega
    return CylinderField(params, values)


def disk_linearized(
    g: DiskField, v: Union[DiskField, np.ndarray], eps: Optional[float] = None
) -> np.ndarray:
    """Central-difference DH_D|_g(v) at the interior rings."""
    direction = v.values if isinstance(v, DiskField) else np.asarray(v, dtype=float)
    if eps is None:
        scale = float(np.max(np.abs(direction)))
        eps = DEFAULT_EPS / scale if scale > 0.0 else DEFAULT_EPS
    plus = DiskField(g.r, g.theta, g.values + eps * direction)
    minus = DiskField(g.r, g.theta, g.values - eps * direction)
    return (mean_curvature_disk(plus) - mean_curvature_disk(minus)) / (2.0 * eps)


def log_source(g: DiskField) -> np.ndarray:
    """DH_D|_g(log r) - DH_D|_0(log r) at the interior rings.

    log r is singular at the origin but the difference is not: it is -div Q
    with Q_r = (1/W - 1)/r - g_r^2/(r W^3) and Q_theta = -g_theta g_r/(r^2 W^3).
    """
    r = g.r
    half = _half_radii(r)[None, :]
    g_r, g_t = _half_gradient(r, g.values)
    W = np.sqrt(1.0 + g_r**2 + g_t**2)
    flux = half * ((1.0 / W - 1.0) / half - g_r**2 / (half * W**3))
    n_r, n_t = _node_gradient(r, g.values)
    W = np.sqrt(1.0 + n_r**2 + n_t**2)
    angular = -n_t * n_r / (r[None, :] * W**3)
    return -_divergence(r, flux, angular)


def mode_profile(g: DiskField, k: int) -> np.ndarray:
    """Amplitude of the mode-k part of g on every ring."""
    c = np.fft.rfft(g.values, axis=0)[k]
    scale = 1.0 if k == 0 or 2 * k == g.n_theta else 2.0
    return scale * np.abs(c) / g.n_theta
