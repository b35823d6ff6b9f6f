"""Mode-decoupled boundary value solves for the Jacobi operator.

Every solve goes through the same discretization: the mode-k operator
u'' - k^2 u + 2 sech^2(s) u with the three-point stencil on the latitude grid,
which is exactly what `apply_jacobi_conjugate` does to a single Fourier mode.
"""
import logging
from dataclasses import dataclass
from functools import lru_cache
from typing import Optional

import numpy as np
from scipy.integrate import cumulative_trapezoid, solve_ivp
from scipy.linalg import eigvalsh_tridiagonal
from scipy.optimize import minimize_scalar

from catcmc.base.schema import BoundaryData, CylinderField, NeckParams, latitude_grid
from catcmc.exceptions import ModeContentError, NearSingularError
from catcmc.geometry import singular_length
from catcmc.modes import (
    JACOBI_PROFILES,
    JacobiBasis,
    boundary_lower_content,
    lower_content,
    normalize,
)
from catcmc.solvers.tridiagonal import solve_tridiagonal

logger = logging.getLogger(__name__)

SINGULAR_GUARD = 1e-3
MODE_CONTENT_TOL = 1e-12


@dataclass(frozen=True, eq=False)
class BVPMode:
    """Forced mode-k problem u'' - k^2 u + 2 sech^2 u = rhs on [-l, l] with
    Dirichlet values; `rhs` is sampled on the latitude grid with len(rhs)
    nodes (odd), boundary entries unused."""

    k: int
    rhs: np.ndarray
    bc_minus: float
    bc_plus: float
    l: float

    def __post_init__(self):
        rhs = np.asarray(self.rhs)
        if rhs.ndim != 1 or rhs.shape[0] < 5 or rhs.shape[0] % 2 == 0:
            raise ValueError("rhs must be sampled on an odd grid of at least 5 nodes")
        object.__setattr__(self, "rhs", rhs)

    @property
    def s(self) -> np.ndarray:
        return latitude_grid(self.l, self.rhs.shape[0])


def mode_diagonals(k, s: np.ndarray):
    """Rows of the mode operator at the interior latitudes; `k` may be an
    array, giving one system per entry."""
    h = s[1] - s[0]
    interior = s[1:-1]
    k = np.asarray(k, dtype=float).reshape(-1, 1)
    diag = -2.0 / h**2 - k**2 + 2.0 / np.cosh(interior) ** 2
    off = np.full(diag.shape, 1.0 / h**2)
    return off, diag, off


def check_singular_length(l: float):
    l_star = singular_length()
    if abs(l - l_star) < SINGULAR_GUARD:
        raise NearSingularError(
            f"l={l:.6f} is within {SINGULAR_GUARD} of the singular length "
            f"{l_star:.6f}; the mode-0 Dirichlet problem is degenerate"
        )


def solve_modes(
    ks: np.ndarray, rhs: np.ndarray, bc_minus: np.ndarray, bc_plus: np.ndarray, l: float
) -> np.ndarray:
    """Solve one Dirichlet problem per row: rhs has shape (len(ks), n)."""
    ks = np.asarray(ks)
    if np.any(ks == 0):
        check_singular_length(l)
    n = rhs.shape[-1]
    s = latitude_grid(l, n)
    h = s[1] - s[0]
    lower, diag, upper = mode_diagonals(ks, s)

    b = np.array(rhs[:, 1:-1], dtype=np.result_type(rhs, bc_minus, bc_plus, float))
    b[:, 0] -= bc_minus / h**2
    b[:, -1] -= bc_plus / h**2
    interior = solve_tridiagonal(lower, diag, upper, b)
    return np.concatenate(
        [np.asarray(bc_minus)[:, None], interior, np.asarray(bc_plus)[:, None]], axis=1
    )


def solve_mode_bvp(m: BVPMode) -> np.ndarray:
    return solve_modes(
        np.array([m.k]),
        m.rhs[None, :],
        np.array([m.bc_minus]),
        np.array([m.bc_plus]),
        m.l,
    )[0]


def apply_mode_operator(k: int, values: np.ndarray, l: float) -> np.ndarray:
    """u'' - k^2 u + 2 sech^2 u at the interior latitudes."""
    s = latitude_grid(l, values.shape[-1])
    h = s[1] - s[0]
    second = (values[2:] - 2.0 * values[1:-1] + values[:-2]) / h**2
    return second + (2.0 / np.cosh(s[1:-1]) ** 2 - k * k) * values[1:-1]


def solve_jacobi_dirichlet(rhs: CylinderField, boundary: BoundaryData) -> CylinderField:
    """v with L''v = rhs at the interior and v = boundary on both circles."""
    params = rhs.params
    coefficients = np.fft.rfft(rhs.values, axis=0)
    ks = np.arange(coefficients.shape[0])
    solution = solve_modes(
        ks,
        coefficients,
        np.fft.rfft(boundary.minus),
        np.fft.rfft(boundary.plus),
        params.l,
    )
    return CylinderField(params, np.fft.irfft(solution, n=params.n_x, axis=0))


@lru_cache(maxsize=32)
def discrete_jacobi_basis(params: NeckParams) -> JacobiBasis:
    """The six Jacobi fields as exact kernel elements of the discrete operator:
    mode profiles solved with zero forcing and the analytic boundary values."""
    s = params.s
    zeros = np.zeros(params.n_s)
    profiles = []
    for k, _, profile in JACOBI_PROFILES:
        exact = profile(s)
        profiles.append(
            solve_mode_bvp(BVPMode(k, zeros, exact[0], exact[-1], params.l))
        )
    return JacobiBasis.from_profiles(params, profiles)


def solve_modified(
    E: CylinderField,
    f: Optional[BoundaryData] = None,
    basis: Optional[JacobiBasis] = None,
) -> CylinderField:
    """The normalized u with L'u = E and higher trace f.

    Solves L''v = cosh(s) E with Dirichlet data cosh(l) f (lower modes of the
    data completed by zeros), sets u = v / cosh(s) and adds the Jacobi field
    that normalizes it.
    """
    params = E.params
    f = BoundaryData.zeros(params.n_x) if f is None else f
    content = boundary_lower_content(f)
    if content > MODE_CONTENT_TOL:
        raise ModeContentError(
            f"boundary data carries lower modes of size {content:.3e}"
        )
    cosh = params.cosh
    v = solve_jacobi_dirichlet(
        E * cosh, BoundaryData(minus=f.minus * cosh[0], plus=f.plus * cosh[-1])
    )
    basis = discrete_jacobi_basis(params).weighted() if basis is None else basis
    u, _ = normalize(v / cosh, basis)
    return u


def solve_decay(E: CylinderField) -> CylinderField:
    """u with L'u = E and zero trace, for E without lower modes."""
    content = lower_content(E.values)
    if content > MODE_CONTENT_TOL * max(1.0, E.sup_norm()):
        raise ModeContentError(f"Poisson data carries lower modes of size {content:.3e}")
    cosh = E.params.cosh
    v = solve_jacobi_dirichlet(E * cosh, BoundaryData.zeros(E.params.n_x))
    return v / cosh


def _cumulative_from_origin(y: np.ndarray, s: np.ndarray) -> np.ndarray:
    """int_0^s y by the trapezoid rule on a grid with s = 0 at the middle."""
    j0 = s.shape[0] // 2
    right = cumulative_trapezoid(y[j0:], s[j0:], initial=0.0)
    left = cumulative_trapezoid(y[j0::-1], s[j0::-1], initial=0.0)[::-1]
    return np.concatenate([left[:-1], right])


def varparam_mode0(a: np.ndarray, s: np.ndarray) -> np.ndarray:
    """Rotationally symmetric solution of L'u = a with u(0) = u'(0) = 0:
    (tanh s / cosh s) int_0^s tanh^-2 int_0^s' sinh(s'') a(s'')."""
    j0 = s.shape[0] // 2
    inner = _cumulative_from_origin(np.sinh(s) * a, s)
    integrand = np.empty_like(inner)
    away = np.arange(s.shape[0]) != j0
    integrand[away] = inner[away] / np.tanh(s[away]) ** 2
    # inner ~ a(0) s^2 / 2 at the waist
    integrand[j0] = 0.5 * a[j0]
    return np.tanh(s) / np.cosh(s) * _cumulative_from_origin(integrand, s)


def varparam_mode1(b: np.ndarray, s: np.ndarray) -> np.ndarray:
    """Profile p with L'(p cos x) = b cos x and p(0) = p'(0) = 0:
    cosh^-2 int_0^s cosh^2 int_0^s' b."""
    inner = _cumulative_from_origin(b, s)
    return _cumulative_from_origin(np.cosh(s) ** 2 * inner, s) / np.cosh(s) ** 2


def min_singular_value(l: float, k: int, n_s: int = 201) -> float:
    """Smallest singular value of the discrete mode-k Dirichlet operator on
    [-l, l]; the matrix is symmetric, so this is the smallest |eigenvalue|."""
    if l <= 0.0:
        raise ValueError(f"l must be positive, got {l}")
    n_s = n_s + 1 if n_s % 2 == 0 else n_s
    s = latitude_grid(l, n_s)
    h = s[1] - s[0]
    _, diag, _ = mode_diagonals(k, s)
    off = np.full(diag.shape[1] - 1, 1.0 / h**2)
    eigenvalues = eigvalsh_tridiagonal(diag[0], off)
    return float(np.min(np.abs(eigenvalues)))


def singular_length_sweep(
    lmin: float, lmax: float, steps: int, k: int = 0, n_s: int = 201
) -> tuple[np.ndarray, np.ndarray]:
    lengths = np.linspace(lmin, lmax, steps + 1)
    sigmas = np.array([min_singular_value(l, k, n_s) for l in lengths])
    return lengths, sigmas


def locate_singular_length(
    lmin: float = 0.5, lmax: float = 3.0, steps: int = 200, n_s: int = 201
) -> float:
    """Length where the mode-0 Dirichlet operator degenerates: the coarse sweep
    minimum refined by a bounded scalar minimization."""
    lengths, sigmas = singular_length_sweep(lmin, lmax, steps, 0, n_s)
    j = int(np.argmin(sigmas))
    bounds = (lengths[max(j - 1, 0)], lengths[min(j + 1, lengths.shape[0] - 1)])
    result = minimize_scalar(
        lambda l: min_singular_value(l, 0, n_s),
        bounds=bounds,
        method="bounded",
        options={"xatol": 1e-10},
    )
    return float(result.x)


def growth_exponent(
    k: int, potential: bool = True, window: tuple[float, float] = (5.0, 10.0)
) -> float:
    """Exponential growth rate of a generic homogeneous mode-k solution:
    the slope of log|y| over `window` for y'' = (k^2 - 2 sech^2 s) y,
    y(0) = y'(0) = 1 (without the potential term when `potential` is off).

    Non-Jacobi solutions grow like e^{ks}; for k = 0, 1 every solution is a
    Jacobi field and grows at most like cosh(s).
    """
    weight = 2.0 if potential else 0.0

    def rhs(s, y):
        return [y[1], (k * k - weight / np.cosh(s) ** 2) * y[0]]

    sample = np.linspace(*window, 51)
    solution = solve_ivp(
        rhs, (0.0, window[1]), [1.0, 1.0], t_eval=sample, rtol=1e-10, atol=1e-12
    )
    slope, _ = np.polyfit(sample, np.log(np.abs(solution.y[0])), 1)
    return float(slope)
