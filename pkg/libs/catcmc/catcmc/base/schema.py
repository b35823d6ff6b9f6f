from __future__ import annotations

import math
from dataclasses import dataclass
from functools import cached_property
from typing import Callable, Literal, Optional

import numpy as np
from pydantic import BaseModel, Field, model_validator

from catcmc.exceptions import DomainError


def _readonly(array: np.ndarray) -> np.ndarray:
    array.setflags(write=False)
    return array


def latitude_grid(l: float, n_s: int) -> np.ndarray:
    """Uniform latitudes on [-l, l], antisymmetric, with s = 0 exactly at the
    middle node. `n_s` must be odd."""
    m = n_s // 2
    return (np.arange(n_s) - m) * (l / m)


def angle_grid(n_x: int) -> np.ndarray:
    return 2.0 * np.pi * np.arange(n_x) / n_x


@dataclass(frozen=True)
class NeckParams:
    """Scale, weight and grid of a catenoidal neck over the cylinder
    S^1 x [-l, l] with l = arccosh(1/tau)."""

    tau: float
    l: float
    gamma: float
    n_x: int
    n_s: int

    def __post_init__(self):
        if not 0.0 < self.tau < 1.0:
            raise DomainError(f"tau must lie in (0, 1), got {self.tau}")
        if not 0.0 < self.gamma < 1.0:
            raise DomainError(f"gamma must lie in (0, 1), got {self.gamma}")
        if self.n_x < 8 or self.n_x & (self.n_x - 1):
            raise DomainError(f"n_x must be a power of two >= 8, got {self.n_x}")
        if self.n_s < 17 or self.n_s % 2 == 0:
            raise DomainError(f"n_s must be odd and >= 17, got {self.n_s}")
        expected = math.log(1.0 / self.tau + math.sqrt(1.0 / self.tau**2 - 1.0))
        if not math.isclose(self.l, expected, rel_tol=1e-12, abs_tol=1e-15):
            raise DomainError(f"l={self.l} is not arccosh(1/tau)={expected}")

    @property
    def center(self) -> int:
        """Index of the waist latitude s = 0."""
        return self.n_s // 2

    @property
    def h(self) -> float:
        return self.l / self.center

    @cached_property
    def x(self) -> np.ndarray:
        return _readonly(angle_grid(self.n_x))

    @cached_property
    def s(self) -> np.ndarray:
        return _readonly(latitude_grid(self.l, self.n_s))

    @cached_property
    def cosh(self) -> np.ndarray:
        return _readonly(np.cosh(self.s))

    @cached_property
    def omega(self) -> np.ndarray:
        """The weight tau*cosh(s), i.e. the cylindrical radius along the neck."""
        return _readonly(self.tau * np.cosh(self.s))

    def mesh(self) -> tuple[np.ndarray, np.ndarray]:
        return np.meshgrid(self.x, self.s, indexing="ij")


@dataclass(frozen=True, eq=False)
class CylinderField:
    """Real samples u(x_i, s_j) on the neck grid, shape (n_x, n_s)."""

    params: NeckParams
    values: np.ndarray

    def __post_init__(self):
        values = np.asarray(self.values, dtype=float)
        if values.shape != (self.params.n_x, self.params.n_s):
            raise ValueError(
                f"values shape {values.shape} does not match grid "
                f"{(self.params.n_x, self.params.n_s)}"
            )
        object.__setattr__(self, "values", values)

    @classmethod
    def zeros(cls, params: NeckParams) -> "CylinderField":
        return cls(params, np.zeros((params.n_x, params.n_s)))

    @classmethod
    def from_function(
        cls, params: NeckParams, fn: Callable[[np.ndarray, np.ndarray], np.ndarray]
    ) -> "CylinderField":
        X, S = params.mesh()
        return cls(params, np.broadcast_to(fn(X, S), X.shape).astype(float))

    @classmethod
    def from_profile(cls, params: NeckParams, profile: np.ndarray, k: int = 0,
                     kind: Literal["cos", "sin"] = "cos") -> "CylinderField":
        """cos(kx) * profile(s) (or sin)."""
        angular = np.cos(k * params.x) if kind == "cos" else np.sin(k * params.x)
        return cls(params, np.outer(angular, profile))

    @property
    def interior(self) -> np.ndarray:
        return self.values[:, 1:-1]

    def sup_norm(self, interior: bool = False) -> float:
        values = self.interior if interior else self.values
        return float(np.max(np.abs(values))) if values.size else 0.0

    def _other(self, other):
        if isinstance(other, CylinderField):
            if other.params != self.params:
                raise ValueError("fields live on different grids")
            return other.values
        return other

    def __add__(self, other):
        return CylinderField(self.params, self.values + self._other(other))

    __radd__ = __add__

    def __sub__(self, other):
        return CylinderField(self.params, self.values - self._other(other))

    def __rsub__(self, other):
        return CylinderField(self.params, self._other(other) - self.values)

    def __neg__(self):
        return CylinderField(self.params, -self.values)

    def __mul__(self, other):
        return CylinderField(self.params, self.values * self._other(other))

    __rmul__ = __mul__

    def __truediv__(self, other):
        return CylinderField(self.params, self.values / self._other(other))


@dataclass(frozen=True, eq=False)
class BoundaryData:
    """Dirichlet data on the two boundary circles s = -l and s = +l, sampled at
    the angles of the grid."""

    minus: np.ndarray
    plus: np.ndarray

    def __post_init__(self):
        minus = np.asarray(self.minus, dtype=float)
        plus = np.asarray(self.plus, dtype=float)
        if minus.shape != plus.shape or minus.ndim != 1:
            raise ValueError("boundary circles must be 1d arrays of equal length")
        object.__setattr__(self, "minus", minus)
        object.__setattr__(self, "plus", plus)

    @property
    def n_x(self) -> int:
        return self.minus.shape[0]

    @classmethod
    def zeros(cls, n_x: int) -> "BoundaryData":
        return cls(np.zeros(n_x), np.zeros(n_x))

    @classmethod
    def from_modes(
        cls,
        n_x: int,
        plus: Optional[dict[int, tuple[float, float]]] = None,
        minus: Optional[dict[int, tuple[float, float]]] = None,
    ) -> "BoundaryData":
        """Synthesize sum_k a_k cos(kx) + b_k sin(kx) on each circle."""
        x = angle_grid(n_x)

        def synth(coefficients):
            values = np.zeros(n_x)
            for k, (a, b) in (coefficients or {}).items():
                values += a * np.cos(k * x) + b * np.sin(k * x)
            return values

        return cls(synth(minus), synth(plus))

    def sup_norm(self) -> float:
        return float(max(np.max(np.abs(self.minus)), np.max(np.abs(self.plus))))

    def __add__(self, other: "BoundaryData") -> "BoundaryData":
        return BoundaryData(self.minus + other.minus, self.plus + other.plus)

    def __sub__(self, other: "BoundaryData") -> "BoundaryData":
        return BoundaryData(self.minus - other.minus, self.plus - other.plus)

    def __mul__(self, factor: float) -> "BoundaryData":
        return BoundaryData(factor * self.minus, factor * self.plus)

    __rmul__ = __mul__


@dataclass(frozen=True)
class Signature:
    """Lower-mode Cauchy data along the waist: the mode 0, cos and sin
    coefficients of u(., 0) and of d_s u(., 0)."""

    value0: float
    value_cos: float
    value_sin: float
    slope0: float
    slope_cos: float
    slope_sin: float

    def as_array(self) -> np.ndarray:
        return np.array(
            [
                self.value0,
                self.value_cos,
                self.value_sin,
                self.slope0,
                self.slope_cos,
                self.slope_sin,
            ]
        )

    def norm(self) -> float:
        return float(np.max(np.abs(self.as_array())))


@dataclass(frozen=True, eq=False)
class DiskField:
    """Samples on the staggered polar grid of the unit disk, shape
    (n_theta, n_r); the last ring is r = 1. `origin` is the value at r = 0."""

    r: np.ndarray
    theta: np.ndarray
    values: np.ndarray
    origin: float = 0.0

    def __post_init__(self):
        values = np.asarray(self.values, dtype=float)
        if values.shape != (self.theta.shape[0], self.r.shape[0]):
            raise ValueError(
                f"values shape {values.shape} does not match polar grid "
                f"{(self.theta.shape[0], self.r.shape[0])}"
            )
        object.__setattr__(self, "values", values)

    @property
    def n_r(self) -> int:
        return self.r.shape[0]

    @property
    def n_theta(self) -> int:
        return self.theta.shape[0]

    @property
    def boundary(self) -> np.ndarray:
        return self.values[:, -1]

    def sup_norm(self) -> float:
        return float(max(np.max(np.abs(self.values)), abs(self.origin)))


class WeightedNormResult(BaseModel):
    gamma: float
    order: int
    value: float = Field(ge=0.0)
    argmax_latitude: float


class FitResult(BaseModel):
    """Slope of log(quantity) against log(r). `exponent` is None when the
    quantity vanishes identically."""

    exponent: Optional[float]
    r_squared: float = Field(ge=0.0, le=1.0)
    window: tuple[float, float]
    points: int


class SolveReport(BaseModel):
    tau: float
    delta: float
    gamma: float
    method: Literal["picard", "newton"] = "picard"
    iterations: int
    residual: float
    trace_mismatch: float
    signature_norm: float
    weighted_norm: float
    weighted_norm_one: float
    converged: bool
    tolerance: float
    smallness: float
    residual_history: list[float] = Field(default_factory=list)
    increments: list[float] = Field(default_factory=list)

    @model_validator(mode="after")
    def check_converged(self):
        if self.converged and (
            self.residual >= self.tolerance or self.trace_mismatch >= self.tolerance
        ):
            raise ValueError("converged report with residual above tolerance")
        return self
