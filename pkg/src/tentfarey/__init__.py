"""Numerics for the interval maps F_r interpolating the tent map (r=0) and the Farey map (r=1)."""

__version__ = "0.1.0"

from .maps import Params, map_eval, induced_map_eval, periodic_points_F, periodic_points_G
from .measures import density_e, density_h, kac_expected_return, lyapunov_closed
from .thermo import free_energy, partition_Z
from .spectral import BasisSpec, matrix_M, matrix_N, matrix_P, borel_transform
from .zeta import q_matrix, fredholm_det, zeta_two_variable, grand_partition_Xi

__all__ = [
    "Params",
    "map_eval",
    "induced_map_eval",
    "periodic_points_F",
    "periodic_points_G",
    "density_e",
    "density_h",
    "kac_expected_return",
    "lyapunov_closed",
    "free_energy",
    "partition_Z",
    "BasisSpec",
    "matrix_M",
    "matrix_N",
    "matrix_P",
    "borel_transform",
    "q_matrix",
    "fredholm_det",
    "zeta_two_variable",
    "grand_partition_Xi",
]
