"""Electromagnetic eigenmodes of intersecting-tube cavities on a Yee grid."""

from .cutoff2d import cutoff_2d
from .grid import DiscretizedDomain, box_domain, discretize, effective_dims
from .modes import (
    EigenMode,
    mode_volume,
    richardson,
    solve_lowest_richardson,
    solve_modes,
)
from .operators import CurlCurlOperator
from .slater import (
    Deformation,
    boundary_faces,
    deformed_domain,
    piezo_tuning_curve,
    slater_shift,
)

__all__ = [
    "CurlCurlOperator",
    "Deformation",
    "DiscretizedDomain",
    "EigenMode",
    "boundary_faces",
    "box_domain",
    "cutoff_2d",
    "deformed_domain",
    "discretize",
    "effective_dims",
    "mode_volume",
    "piezo_tuning_curve",
    "richardson",
    "slater_shift",
    "solve_lowest_richardson",
    "solve_modes",
]
