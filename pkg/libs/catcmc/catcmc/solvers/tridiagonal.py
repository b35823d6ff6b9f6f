import numpy as np

from catcmc.exceptions import NearSingularError


def solve_tridiagonal(
    lower: np.ndarray, diag: np.ndarray, upper: np.ndarray, rhs: np.ndarray
) -> np.ndarray:
    """Thomas algorithm for systems stacked along the leading axes.

    Row i reads lower[i] x[i-1] + diag[i] x[i] + upper[i] x[i+1] = rhs[i];
    lower[..., 0] and upper[..., -1] are ignored. Real and complex inputs are
    both accepted. No pivoting: raises NearSingularError on a vanishing pivot.
    """
    lower, diag, upper, rhs = np.broadcast_arrays(lower, diag, upper, rhs)
    dtype = np.result_type(lower, diag, upper, rhs, float)
    n = rhs.shape[-1]

    c = np.zeros(rhs.shape, dtype=dtype)
    d = np.zeros(rhs.shape, dtype=dtype)
    scale = np.max(np.abs(diag))

    pivot = diag[..., 0].astype(dtype)
    _check_pivot(pivot, scale, 0)
    c[..., 0] = upper[..., 0] / pivot
    d[..., 0] = rhs[..., 0] / pivot
    for i in range(1, n):
        pivot = diag[..., i] - lower[..., i] * c[..., i - 1]
        _check_pivot(pivot, scale, i)
        if i < n - 1:
            c[..., i] = upper[..., i] / pivot
        d[..., i] = (rhs[..., i] - lower[..., i] * d[..., i - 1]) / pivot

    for i in range(n - 2, -1, -1):
        d[..., i] -= c[..., i] * d[..., i + 1]
    return d


def _check_pivot(pivot, scale: float, row: int):
    if np.any(~np.isfinite(pivot)) or np.any(np.abs(pivot) <= 1e-14 * scale):
        raise NearSingularError(f"vanishing pivot in tridiagonal row {row}")
