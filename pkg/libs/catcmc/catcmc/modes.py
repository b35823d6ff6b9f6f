"""Fourier algebra in the angle: lower/higher splits, signatures and the six
geometric Jacobi fields.

Arrays are sampled with the angle along axis 0, so everything here works for
cylinder fields (n_x, n_s), boundary circles (n_x,) and disk fields
(n_theta, n_r) alike.
"""
import logging
from dataclasses import dataclass
from typing import Callable, Literal, Optional, Sequence

import numpy as np

from catcmc.base.schema import BoundaryData, CylinderField, NeckParams, Signature
from catcmc.exceptions import SingularSystemError

logger = logging.getLogger(__name__)

LOWER_MODES = 2
MAX_CONDITION = 1e12


@dataclass(frozen=True, eq=False)
class ModeSpectrum:
    """Per-latitude coefficients c_k, k = 0..n_x/2, of the real FFT in the
    angle. Negative modes are the conjugates."""

    coefficients: np.ndarray
    n_x: int

    def amplitude(self, k: int) -> np.ndarray:
        """Sup over the angle of the mode-k part, as a function of latitude."""
        scale = 1.0 if k == 0 or 2 * k == self.n_x else 2.0
        return scale * np.abs(self.coefficients[k]) / self.n_x

    def to_values(self) -> np.ndarray:
        return np.fft.irfft(self.coefficients, n=self.n_x, axis=0)


def spectrum(u: CylinderField | np.ndarray) -> ModeSpectrum:
    values = u.values if isinstance(u, CylinderField) else np.asarray(u)
    return ModeSpectrum(np.fft.rfft(values, axis=0), values.shape[0])


def _filter(values: np.ndarray, keep: Callable[[np.ndarray], np.ndarray]) -> np.ndarray:
    n = values.shape[0]
    coefficients = np.fft.rfft(values, axis=0)
    k = np.arange(coefficients.shape[0])
    mask = keep(k).reshape((-1,) + (1,) * (values.ndim - 1))
    return np.fft.irfft(coefficients * mask, n=n, axis=0)


def lower_part(values: np.ndarray) -> np.ndarray:
    return _filter(np.asarray(values, dtype=float), lambda k: k < LOWER_MODES)


def higher_part(values: np.ndarray) -> np.ndarray:
    return _filter(np.asarray(values, dtype=float), lambda k: k >= LOWER_MODES)


def lower_content(values: np.ndarray) -> float:
    return float(np.max(np.abs(lower_part(values))))


def dealias(values: np.ndarray) -> np.ndarray:
    """Zero the modes above n/3 (2/3 rule)."""
    cutoff = values.shape[0] // 3
    return _filter(values, lambda k: k <= cutoff)


def angular_derivative(values: np.ndarray, order: int = 1) -> np.ndarray:
    """Spectral derivative along axis 0; the Nyquist mode of odd orders is
    dropped so the result stays real."""
    n = values.shape[0]
    coefficients = np.fft.rfft(values, axis=0)
    k = np.arange(coefficients.shape[0], dtype=float)
    factor = (1j * k) ** order
    if order % 2 == 1 and n % 2 == 0:
        factor[-1] = 0.0
    factor = factor.reshape((-1,) + (1,) * (values.ndim - 1))
    return np.fft.irfft(coefficients * factor, n=n, axis=0)


def lower_coefficients(values: np.ndarray) -> np.ndarray:
    """(a0, a1, b1) of values ~ a0 + a1 cos x + b1 sin x along axis 0."""
    n = values.shape[0]
    c = np.fft.rfft(values, axis=0)
    return np.array([c[0].real / n, 2.0 * c[1].real / n, -2.0 * c[1].imag / n])


def project_lower(u: CylinderField) -> CylinderField:
    return CylinderField(u.params, lower_part(u.values))


def project_higher(u: CylinderField) -> CylinderField:
    return CylinderField(u.params, higher_part(u.values))


def off_mode_ratio(values: np.ndarray, k: int) -> float:
    """Largest amplitude of any mode m != k relative to the mode-k amplitude."""
    spec = spectrum(values)
    amplitudes = np.array(
        [np.max(spec.amplitude(m)) for m in range(spec.coefficients.shape[0])]
    )
    own = amplitudes[k]
    others = np.delete(amplitudes, k)
    if own == 0.0:
        return float("inf") if np.max(others) > 0.0 else 0.0
    return float(np.max(others) / own)


def signature(u: CylinderField) -> Signature:
    j0 = u.params.center
    h = u.params.h
    value = lower_coefficients(u.values[:, j0])
    slope = lower_coefficients((u.values[:, j0 + 1] - u.values[:, j0 - 1]) / (2.0 * h))
    return Signature(*value, *slope)


def trace(u: CylinderField) -> BoundaryData:
    return BoundaryData(minus=u.values[:, 0], plus=u.values[:, -1])


def higher_trace(u: CylinderField) -> BoundaryData:
    return BoundaryData(
        minus=higher_part(u.values[:, 0]), plus=higher_part(u.values[:, -1])
    )


def boundary_lower_content(f: BoundaryData) -> float:
    return max(lower_content(f.minus), lower_content(f.plus))


def strip_lower(f: BoundaryData) -> BoundaryData:
    return BoundaryData(minus=higher_part(f.minus), plus=higher_part(f.plus))


def _sech(s):
    return 1.0 / np.cosh(s)


# (mode, angular factor, latitude profile) of the six geometric Jacobi fields,
# in signature order: translations along e_z, e_x, e_y, the dilation, and the
# two rotations about horizontal axes.
JACOBI_PROFILES: Sequence[tuple[int, Literal["cos", "sin"], Callable]] = (
    (0, "cos", np.tanh),
    (1, "cos", _sech),
    (1, "sin", _sech),
    (0, "cos", lambda s: s * np.tanh(s) - 1.0),
    (1, "cos", lambda s: np.sinh(s) + s * _sech(s)),
    (1, "sin", lambda s: np.sinh(s) + s * _sech(s)),
)


@dataclass(frozen=True, eq=False)
class JacobiBasis:
    """Six fields spanning the geometric Jacobi fields on a neck grid."""

    fields: tuple[CylinderField, ...]

    @classmethod
    def analytic(cls, params: NeckParams) -> "JacobiBasis":
        return cls(
            tuple(
                CylinderField.from_profile(params, profile(params.s), k, kind)
                for k, kind, profile in JACOBI_PROFILES
            )
        )

    @classmethod
    def from_profiles(
        cls, params: NeckParams, profiles: Sequence[np.ndarray]
    ) -> "JacobiBasis":
        return cls(
            tuple(
                CylinderField.from_profile(params, profile, k, kind)
                for (k, kind, _), profile in zip(JACOBI_PROFILES, profiles)
            )
        )

    @property
    def params(self) -> NeckParams:
        return self.fields[0].params

    def weighted(self) -> "JacobiBasis":
        """The fields divided by cosh(s), the kernel of the weighted
        linearization. Their signatures agree with the unweighted ones up to
        O(h^2) since cosh(0) = 1 and cosh is even."""
        return JacobiBasis(tuple(field / self.params.cosh for field in self.fields))

    def signature_matrix(self) -> np.ndarray:
        return np.column_stack([signature(field).as_array() for field in self.fields])

    def combine(self, coefficients: np.ndarray) -> CylinderField:
        values = sum(c * field.values for c, field in zip(coefficients, self.fields))
        return CylinderField(self.params, values)


def normalize(
    u: CylinderField, basis: Optional[JacobiBasis] = None
) -> tuple[CylinderField, np.ndarray]:
    """Add the unique Jacobi field j with signature(u + j) = 0.

    Returns the normalized field and the coefficients of j in `basis`
    (the analytic basis by default).
    """
    basis = JacobiBasis.analytic(u.params) if basis is None else basis
    matrix = basis.signature_matrix()
    condition = np.linalg.cond(matrix)
    if not np.isfinite(condition) or condition > MAX_CONDITION:
        raise SingularSystemError(
            f"Jacobi signature matrix is ill-conditioned (cond={condition:.3e}); "
            "check that the grid resolves the waist"
        )
    coefficients = np.linalg.solve(matrix, -signature(u).as_array())
    return u + basis.combine(coefficients), coefficients
