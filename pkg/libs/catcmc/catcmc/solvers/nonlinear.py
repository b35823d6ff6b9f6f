"""Small solutions of the modified CMC Dirichlet problem on a neck.

Given the neck N_tau, a mean curvature delta and higher-mode boundary data f,
find the normalized h' with H'(h') = tau delta cosh(s) and higher trace f. The
physical graph over N_tau is h = tau cosh(s) h'.
"""
import logging
from typing import Optional

import numpy as np

from catcmc import settings
from catcmc.base.schema import BoundaryData, CylinderField, NeckParams, SolveReport
from catcmc.exceptions import (
    ConfigError,
    DomainError,
    ModeContentError,
    NoConvergenceError,
)
from catcmc.modes import (
    boundary_lower_content,
    higher_trace,
    signature,
    spectrum,
)
from catcmc.operators import weighted_mc
from catcmc.solvers.linear import MODE_CONTENT_TOL, discrete_jacobi_basis, solve_modified
from catcmc.verify.norms import weighted_norm

logger = logging.getLogger(__name__)

NEWTON_MAX_UNKNOWNS = 4096
NEWTON_EPS = 1e-7


def target(params: NeckParams, delta: float) -> CylinderField:
    """The Poisson data E = tau delta cosh(s)."""
    return CylinderField(
        params, np.broadcast_to(params.tau * delta * params.cosh, (params.n_x, params.n_s))
    )


def check_boundary_data(f: BoundaryData, n_x: int):
    if f.n_x != n_x:
        raise ValueError(f"boundary data has {f.n_x} angles, grid has {n_x}")
    content = boundary_lower_content(f)
    if content > MODE_CONTENT_TOL:
        raise ModeContentError(f"boundary data carries lower modes of size {content:.3e}")
    cutoff = n_x // 3
    for circle in (f.minus, f.plus):
        coefficients = np.abs(np.fft.rfft(circle)) / n_x
        if np.any(coefficients[cutoff + 1 :] > MODE_CONTENT_TOL):
            raise ModeContentError(
                f"boundary data has modes above n_x/3 = {cutoff}, which the "
                "de-aliased solver cannot represent"
            )


def _higher_coefficients(circle: np.ndarray) -> np.ndarray:
    """Real coordinates of the modes k >= 2 of a circle: Re and Im of
    c_2..c_{n/2-1} and Re of the Nyquist coefficient, n - 3 numbers."""
    n = circle.shape[0]
    c = np.fft.rfft(circle) / n
    return np.concatenate([c[2:-1].real, c[2:-1].imag, c[-1:].real])


def _residual_vector(
    u: CylinderField, E: CylinderField, f: BoundaryData
) -> np.ndarray:
    interior = (weighted_mc(u, dealiased=False) - E).interior.ravel()
    gap = higher_trace(u) - f
    return np.concatenate(
        [
            interior,
            _higher_coefficients(gap.minus),
            _higher_coefficients(gap.plus),
            signature(u).as_array(),
        ]
    )


def _newton_step(u: CylinderField, E: CylinderField, f: BoundaryData) -> CylinderField:
    """Solve J d = -R(u) with the forward-difference Jacobian of the full
    residual map."""
    params = u.params
    base = _residual_vector(u, E, f)
    flat = u.values.ravel()
    jacobian = np.empty((base.shape[0], flat.shape[0]))
    for j in range(flat.shape[0]):
        bumped = flat.copy()
        bumped[j] += NEWTON_EPS
        shifted = CylinderField(params, bumped.reshape(u.values.shape))
        jacobian[:, j] = (_residual_vector(shifted, E, f) - base) / NEWTON_EPS
    step = np.linalg.solve(jacobian, -base)
    return CylinderField(params, step.reshape(u.values.shape))


def solve_cmc_neck(
    params: NeckParams,
    delta: float,
    f: Optional[BoundaryData] = None,
    *,
    tol: Optional[float] = None,
    max_iter: Optional[int] = None,
    smallness: Optional[float] = None,
    newton: bool = False,
) -> tuple[CylinderField, SolveReport]:
    """The normalized h' with H'(h') = tau delta cosh(s) and higher trace f.

    Picard iteration u <- u - A^-1(H'(u) - E, higher trace(u) - f) with A the
    modified linear solve at 0. With `newton` the full residual map (interior
    equations, higher trace coefficients, signature) is solved by Newton's
    method with a dense finite-difference Jacobian, which is only allowed on
    coarse grids.

    Raises:
        DomainError: |delta| or ||f|| above the smallness threshold.
        NoConvergenceError: the iteration did not reach `tol` in `max_iter` steps.
    """
    f = BoundaryData.zeros(params.n_x) if f is None else f
    smallness = settings.smallness() if smallness is None else smallness
    max_iter = settings.max_iter() if max_iter is None else max_iter
    scale = params.tau * abs(delta)
    tol = settings.tol_factor() * max(1.0, scale) if tol is None else tol

    if abs(delta) > smallness or f.sup_norm() > smallness:
        raise DomainError(
            f"data (|delta|={abs(delta):.3e}, |f|={f.sup_norm():.3e}) above the "
            f"smallness threshold {smallness:.3e}"
        )
    check_boundary_data(f, params.n_x)
    if newton and params.n_x * params.n_s > NEWTON_MAX_UNKNOWNS:
        raise ConfigError(
            f"Newton solve needs n_x * n_s <= {NEWTON_MAX_UNKNOWNS}, got "
            f"{params.n_x} * {params.n_s}"
        )

    E = target(params, delta)
    basis = discrete_jacobi_basis(params).weighted()
    u = CylinderField.zeros(params)
    history: list[float] = []
    increments: list[float] = []
    converged = False
    residual = mismatch = float("inf")

    for iteration in range(1, max_iter + 1):
        residual_field = weighted_mc(u, dealiased=not newton) - E
        gap = higher_trace(u) - f
        residual = residual_field.sup_norm(interior=True)
        mismatch = gap.sup_norm()
        history.append(residual)
        logger.debug(
            "iteration %d: residual %.3e, trace mismatch %.3e", iteration, residual, mismatch
        )
        if residual < tol and mismatch < tol:
            converged = True
            break
        if iteration == max_iter:
            break

        if newton:
            step = _newton_step(u, E, f)
            u = u + step
        else:
            step = solve_modified(residual_field, gap, basis)
            u = u - step
        increments.append(step.sup_norm())

    if not converged:
        raise NoConvergenceError(
            f"no convergence after {max_iter} iterations (residual {residual:.3e}, "
            f"trace mismatch {mismatch:.3e}, tolerance {tol:.3e}); the data may be "
            "outside the contraction regime"
        )

    report = SolveReport(
        tau=params.tau,
        delta=delta,
        gamma=params.gamma,
        method="newton" if newton else "picard",
        iterations=iteration,
        residual=residual,
        trace_mismatch=mismatch,
        signature_norm=signature(u).norm(),
        weighted_norm=weighted_norm(u, params.gamma).value,
        weighted_norm_one=weighted_norm(u, 1.0).value,
        converged=converged,
        tolerance=tol,
        smallness=smallness,
        residual_history=history,
        increments=increments,
    )
    logger.info(
        "neck solve tau=%g delta=%g converged in %d iterations (residual %.3e)",
        params.tau,
        delta,
        iteration,
        residual,
    )
    return u, report


def mode_amplitudes(u: CylinderField, modes: Optional[list[int]] = None) -> np.ndarray:
    """Sup-in-angle amplitude of each mode as a function of latitude, shape
    (len(modes), n_s)."""
    spec = spectrum(u)
    modes = list(range(spec.coefficients.shape[0])) if modes is None else modes
    return np.array([spec.amplitude(k) for k in modes])
