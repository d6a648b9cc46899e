"""Elastic registration of gridded surfaces in 3D.

The second surface is reparametrized row by row with dynamic programming
while the first one is rotated, alternating until the energy settles.
"""

from .curve_dp import DpConfig, dp_match, row_energy
from .errors import (
    DegenerateSurface,
    DimensionMismatch,
    ESRError,
    GridTooSmall,
    InvalidPartition,
    NonFiniteValue,
    NonSquareReversal,
    ParseError,
    PartitionMismatch,
    UnknownCase,
)
from .generators import Family, GammaWarp, SurfaceFamily, apply_gamma, generate
from .grid import Diffeo1D, Partition, ShapeField, SurfaceGrid, Warp2D, corner_candidates
from .registration import (
    RegistrationConfig,
    RegistrationResult,
    dp_surface_min,
    register_surfaces,
    register_with_corner_search,
)
from .rigid import kabsch_umeyama, svd3
from .shape import normalize_unit_area, shape_function, surface_area, warp_action

__version__ = "0.1.0"
