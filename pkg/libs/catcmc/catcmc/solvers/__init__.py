from .disk import solve_cmc_disk, spherical_cap
from .linear import solve_decay, solve_jacobi_dirichlet, solve_modified
from .nonlinear import solve_cmc_neck
from .tridiagonal import solve_tridiagonal

__all__ = [
    "solve_cmc_disk",
    "solve_cmc_neck",
    "solve_decay",
    "solve_jacobi_dirichlet",
    "solve_modified",
    "solve_tridiagonal",
    "spherical_cap",
]
