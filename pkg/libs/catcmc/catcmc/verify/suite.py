"""Acceptance checks as components.

Each check measures one property of the discretization or of the solutions and
returns a `CheckResult` with the measured values and the thresholds it was held
to. Suites are `all`, `quick` or the name of a single check.
"""
import hashlib
import logging
import math
from typing import Optional

import numpy as np

from catcmc.base import BaseComponent, CylinderField
from catcmc.exceptions import ConfigError
from catcmc.geometry import dilation_jacobi_profile, neck_params, singular_length
from catcmc.modes import JacobiBasis, off_mode_ratio
from catcmc.operators import (
    apply_jacobi_conjugate,
    apply_weighted_lin,
    catenoid_immersion,
    mean_curvature,
    weighted_directional_dH,
)
from catcmc.reports import CheckResult
from catcmc.solvers.disk import solve_cmc_disk, spherical_cap
from catcmc.solvers.linear import locate_singular_length
from catcmc.solvers.nonlinear import solve_cmc_neck
from catcmc.verify.experiments import (
    decay_sweep,
    derivative_convergence_experiment,
    lower_mode_surrogate,
    lower_norm_fit,
    stability_ratio,
    tau_continuity_experiment,
)

logger = logging.getLogger(__name__)


def _order(errors: list[float]) -> float:
    """Smallest observed order of convergence under grid halving."""
    orders = [
        math.log2(a / b) if a > 0.0 and b > 0.0 else math.inf
        for a, b in zip(errors, errors[1:])
    ]
    return min(orders)


def _spread(values: list[float]) -> float:
    low = min(values)
    return max(values) / low if low > 0.0 else math.inf


class AcceptanceCheck(BaseComponent):
    """Base of the acceptance checks; `name` is how suites refer to them."""

    name: str = ""
    tau: float = 0.1
    n_x: int = 32

    def result(self, passed: bool, measured: dict, thresholds: dict, note: str = ""):
        outcome = CheckResult(
            name=self.name,
            passed=bool(passed),
            measured=measured,
            thresholds=thresholds,
            note=note,
        )
        level = logging.INFO if outcome.passed else logging.WARNING
        logger.log(level, "check %s: %s", self.name, "pass" if passed else "FAIL")
        self.report_output(outcome)
        return outcome

    def run(self) -> CheckResult:
        raise NotImplementedError


class MinimalityCheck(AcceptanceCheck):
    name: str = "minimality"
    levels: tuple[int, ...] = (201, 401, 801)

    def run(self) -> CheckResult:
        errors = []
        for n_s in self.levels:
            params = neck_params(self.tau, n_x=self.n_x, n_s=n_s)
            errors.append(mean_curvature(catenoid_immersion(params)).sup_norm())
        order = _order(errors)
        return self.result(
            errors[0] <= 1e-3 and order >= 1.8,
            {"sup_H": errors, "order": order},
            {"sup_H": 1e-3, "order": 1.8},
        )


class JacobiKernelCheck(AcceptanceCheck):
    name: str = "jacobi_kernel"
    levels: tuple[int, ...] = (201, 401, 801)

    def run(self) -> CheckResult:
        errors = []
        for n_s in self.levels:
            basis = JacobiBasis.analytic(neck_params(self.tau, n_x=self.n_x, n_s=n_s))
            errors.append(
                max(apply_jacobi_conjugate(j).sup_norm(interior=True) for j in basis.fields)
            )
        order = _order(errors)
        return self.result(
            errors[0] <= 1e-3 and order >= 1.8,
            {"sup_Lj": errors, "order": order},
            {"sup_Lj": 1e-3, "order": 1.8},
        )


class LinearizationCheck(AcceptanceCheck):
    name: str = "linearization"
    n_s: int = 201
    samples: int = 10
    seed: int = 0

    def run(self) -> CheckResult:
        params = neck_params(self.tau, n_x=self.n_x, n_s=self.n_s)
        rng = np.random.default_rng(self.seed)
        X, S = params.mesh()
        zero = CylinderField.zeros(params)
        worst = 0.0
        for _ in range(self.samples):
            a, b = rng.standard_normal((2, 4))
            centre, width = rng.uniform(-1.0, 1.0), rng.uniform(0.5, 1.5)
            angular = sum(a[k] * np.cos(k * X) + b[k] * np.sin(k * X) for k in range(4))
            w = CylinderField(params, angular * np.exp(-(((S - centre) / width) ** 2)))
            exact = apply_weighted_lin(w)
            difference = weighted_directional_dH(zero, w) - exact
            worst = max(
                worst,
                difference.sup_norm(interior=True) / exact.sup_norm(interior=True),
            )
        return self.result(worst <= 1e-3, {"relative_error": worst}, {"relative_error": 1e-3})


class ModePreservationCheck(AcceptanceCheck):
    name: str = "mode_preservation"
    n_s: int = 201
    modes: tuple[int, ...] = (0, 1, 2, 3)

    def run(self) -> CheckResult:
        params = neck_params(self.tau, n_x=self.n_x, n_s=self.n_s)
        zero = CylinderField.zeros(params)
        xi = CylinderField.from_profile(
            params, dilation_jacobi_profile(params.s) / params.cosh
        )
        eta = 1e-2 / xi.sup_norm()
        profile = np.exp(-(params.s**2) / 2.0)
        first, second = {}, {}
        for k in self.modes:
            w = CylinderField.from_profile(params, profile, k)
            dH = weighted_directional_dH(zero, w)
            d2H = weighted_directional_dH(zero, w, second=xi, second_eps=eta)
            first[str(k)] = off_mode_ratio(dH.interior, k)
            second[str(k)] = off_mode_ratio(d2H.interior, k)
        worst = max(max(first.values()), max(second.values()))
        return self.result(
            worst <= 1e-6,
            {"first_variation": first, "second_variation": second},
            {"off_mode_ratio": 1e-6},
        )


class NondegeneracyCheck(AcceptanceCheck):
    name: str = "nondegeneracy"
    lmin: float = 0.5
    lmax: float = 3.0
    steps: int = 200
    n_s: int = 201

    def run(self) -> CheckResult:
        located = locate_singular_length(self.lmin, self.lmax, self.steps, self.n_s)
        root = singular_length()
        gap = abs(located - root)
        sqrt2 = abs(located - math.sqrt(2.0))
        logger.warning(
            "singular length %.6f differs from sqrt(2) by %.4f (reported only)",
            located,
            sqrt2,
        )
        return self.result(
            gap <= 1e-3,
            {"located": located, "root": root, "distance_to_sqrt2": sqrt2},
            {"distance_to_root": 1e-3},
            note="the distance to sqrt(2) is reported, not asserted",
        )


class UniformInvertibilityCheck(AcceptanceCheck):
    name: str = "uniform_invertibility"
    taus: tuple[float, ...] = (0.2, 0.1, 0.05, 0.025)
    n_s: int = 201
    samples: int = 4

    def run(self) -> CheckResult:
        ratios = {
            str(tau): stability_ratio(
                neck_params(tau, n_x=self.n_x, n_s=self.n_s), self.samples
            )
            for tau in self.taus
        }
        spread = _spread(list(ratios.values()))
        return self.result(
            spread < 3.0, {"ratios": ratios, "spread": spread}, {"spread": 3.0}
        )


class NonlinearSolveCheck(AcceptanceCheck):
    name: str = "nonlinear_solve"
    delta: float = 1e-3
    taus: tuple[float, ...] = (0.2, 0.1, 0.05)
    n_s: int = 201

    def run(self) -> CheckResult:
        _, report = solve_cmc_neck(
            neck_params(self.tau, n_x=self.n_x, n_s=self.n_s), self.delta
        )
        constants = {}
        for tau in self.taus:
            u, _ = solve_cmc_neck(neck_params(tau, n_x=self.n_x, n_s=self.n_s), self.delta)
            constants[str(tau)] = u.sup_norm() / abs(self.delta)
        spread = _spread(list(constants.values()))
        passed = (
            report.converged
            and report.residual <= 1e-9
            and report.signature_norm <= 1e-9
            and spread < 3.0
        )
        return self.result(
            passed,
            {
                "residual": report.residual,
                "signature_norm": report.signature_norm,
                "iterations": report.iterations,
                "constants": constants,
            },
            {"residual": 1e-9, "signature_norm": 1e-9, "constant_spread": 3.0},
        )


class DiskOracleCheck(AcceptanceCheck):
    name: str = "disk_oracle"
    delta: float = 0.1
    n_r: int = 200

    def run(self) -> CheckResult:
        g = solve_cmc_disk(self.delta, np.zeros(self.n_x), self.n_r)
        cap = spherical_cap(self.delta, g.r)
        error = float(np.max(np.abs(g.values - cap[None, :])))
        edge = float(np.mean(g.boundary))
        expected = spherical_cap(self.delta, 1.0)
        return self.result(
            error <= 1e-5 and abs(edge - expected) <= 1e-6,
            {"sup_error": error, "h_at_1": edge, "cap_at_1": expected},
            {"sup_error": 1e-5, "h_at_1": 1e-6},
        )


class ImprovedDecayCheck(AcceptanceCheck):
    name: str = "improved_decay"
    delta: float = 1e-3
    taus: tuple[float, ...] = (0.2, 0.1, 0.05)
    n_s: int = 201

    def run(self) -> CheckResult:
        reports = decay_sweep(self.taus, self.delta, n_x=self.n_x, n_s=self.n_s)
        exponents = [r.fit.exponent for r in reports]
        norms = [r.weighted_norm_one for r in reports]
        ratios = [r.lower_ratio for r in reports]
        lower_fit = lower_norm_fit(reports)
        rescaled_fit = lower_norm_fit(reports, rescaled=True)
        exponent_ok = all(e is not None and 1.8 <= e <= 2.2 for e in exponents)
        passed = exponent_ok and _spread(norms) < 3.0 and _spread(ratios) < 3.0
        return self.result(
            passed,
            {
                "exponents": exponents,
                "weighted_norm_one": norms,
                "lower_ratio": ratios,
                "lower_exponent": lower_fit.exponent,
                "rescaled_lower_ratio": [r.rescaled_lower_ratio for r in reports],
                "rescaled_lower_exponent": rescaled_fit.exponent,
            },
            {"exponent": [1.8, 2.2], "norm_spread": 3.0, "ratio_spread": 3.0},
        )


class ContinuityCheck(AcceptanceCheck):
    name: str = "continuity"
    delta: float = 1e-3
    taus: tuple[float, ...] = (0.1, 0.05, 0.025)
    n_s: int = 201

    def run(self) -> CheckResult:
        report = tau_continuity_experiment(
            self.delta, None, self.taus, n_x=self.n_x, n_s=self.n_s
        )
        slope = report.fit.exponent
        return self.result(
            slope is not None and 0.8 <= slope <= 1.2,
            {
                "slope": slope,
                "distances": report.distances,
                "sheet_distances": report.sheet_distances,
                "rescaled_slope": report.rescaled_fit.exponent,
                "rescaled_distances": report.rescaled_distances,
                "bottom_delta_sign": report.bottom_delta_sign,
            },
            {"slope": [0.8, 1.2]},
        )


class DerivativeConvergenceCheck(AcceptanceCheck):
    name: str = "derivative_convergence"
    delta: float = 1e-3
    taus: tuple[float, ...] = (0.1, 0.05, 0.025)
    n_s: int = 201

    def run(self) -> CheckResult:
        report = derivative_convergence_experiment(
            self.delta, None, self.taus, n_x=self.n_x, n_s=self.n_s
        )
        return self.result(
            report.monotone and bool(report.within_richardson),
            {
                "distances": report.distances,
                "cauchy": report.cauchy,
                "order": report.order,
                "richardson": report.richardson,
                "step_error": report.step_error,
            },
            {"monotone": True, "distance_over_richardson": 10.0},
        )


class DeterminismCheck(AcceptanceCheck):
    name: str = "determinism"
    n_s: int = 101

    def run(self) -> CheckResult:
        from catcmc.config import build_config
        from catcmc.reports import dumps
        from catcmc.cli import run

        config = build_config(
            command="solve-neck", tau=self.tau, delta=1e-3, n_x=8, n_s=self.n_s
        )
        digests = [
            hashlib.sha256(dumps(run(config, write=False)).encode()).hexdigest()
            for _ in range(2)
        ]
        return self.result(digests[0] == digests[1], {"sha256": digests}, {"identical": True})


class LowerModeSurrogateCheck(AcceptanceCheck):
    """Lower modes of D^2H'(xi/omega, w) for a higher-mode w."""

    name: str = "lower_mode_surrogate"
    n_s: int = 201

    def run(self) -> CheckResult:
        ratio = lower_mode_surrogate(neck_params(self.tau, n_x=self.n_x, n_s=self.n_s))
        return self.result(ratio <= 1e-6, {"lower_ratio": ratio}, {"lower_ratio": 1e-6})


CHECKS: dict[str, type[AcceptanceCheck]] = {
    "minimality": MinimalityCheck,
    "jacobi_kernel": JacobiKernelCheck,
    "linearization": LinearizationCheck,
    "mode_preservation": ModePreservationCheck,
    "nondegeneracy": NondegeneracyCheck,
    "uniform_invertibility": UniformInvertibilityCheck,
    "nonlinear_solve": NonlinearSolveCheck,
    "disk_oracle": DiskOracleCheck,
    "improved_decay": ImprovedDecayCheck,
    "continuity": ContinuityCheck,
    "derivative_convergence": DerivativeConvergenceCheck,
    "determinism": DeterminismCheck,
    "lower_mode_surrogate": LowerModeSurrogateCheck,
}

SUITES: dict[str, tuple[str, ...]] = {
    "all": tuple(CHECKS),
    "quick": (
        "minimality",
        "jacobi_kernel",
        "mode_preservation",
        "nondegeneracy",
        "disk_oracle",
    ),
}


def suite_names(suite: str) -> tuple[str, ...]:
    if suite in SUITES:
        return SUITES[suite]
    if suite in CHECKS:
        return (suite,)
    raise ConfigError(
        f"unknown suite {suite!r}; use one of {sorted(SUITES)} or a check name "
        f"{sorted(CHECKS)}"
    )


def run_suite(
    suite: str = "all",
    queue=None,
    tau: Optional[float] = None,
    n_x: Optional[int] = None,
) -> list[CheckResult]:
    """Run the checks of a suite in order; `tau` and `n_x` override the
    defaults of every check."""
    overrides = {k: v for k, v in (("tau", tau), ("n_x", n_x)) if v is not None}
    results = []
    for name in suite_names(suite):
        check = CHECKS[name](**overrides)
        if queue is not None:
            check.set_output_queue(queue)
        results.append(check())
    return results
