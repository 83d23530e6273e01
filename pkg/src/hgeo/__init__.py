"""Isoperimetric profiles, graph functionals and variational solvers in the Heisenberg group."""
from __future__ import annotations

from .closed_form import (
    IsoConstants,
    RadialProfile,
    half_perimeter,
    half_volume,
    iso_constant,
    iso_constants,
    profile_height,
    profile_slope,
    radius_for_volume,
)
from .errors import NonConvergence, RejectedInput
from .functionals import (
    h_perimeter_2d,
    h_perimeter_radial,
    mean_curvature_radial,
    volume_2d,
    volume_radial,
)
from .graph import DiskGraph
from .group import GroupContext, HeisenbergPoint, dilate, group_inv, group_mul, inversion_map
from .variational import (
    SolverConfig,
    SolverReport,
    gateaux_derivative,
    lagrange_search,
    solve_2d,
    solve_ode,
    solve_radial,
)

__all__ = [
    "DiskGraph",
    "GroupContext",
    "HeisenbergPoint",
    "IsoConstants",
    "NonConvergence",
    "RadialProfile",
    "RejectedInput",
    "SolverConfig",
    "SolverReport",
    "dilate",
    "gateaux_derivative",
    "group_inv",
    "group_mul",
    "h_perimeter_2d",
    "h_perimeter_radial",
    "half_perimeter",
    "half_volume",
    "inversion_map",
    "iso_constant",
    "iso_constants",
    "lagrange_search",
    "mean_curvature_radial",
    "profile_height",
    "profile_slope",
    "radius_for_volume",
    "solve_2d",
    "solve_ode",
    "solve_radial",
    "volume_2d",
    "volume_radial",
]
