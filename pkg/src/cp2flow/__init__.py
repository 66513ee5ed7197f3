"""Numerical evolution of U(2)-invariant metrics on CP^2 by gauge-fixed
Ricci flow, from unstable conformal perturbations of the round metric to the
onset of a local singularity, with diagnostics that fingerprint the
singularity model (Kahler ratio -> -1, cone angle -> 1/sqrt(2))."""

__version__ = "0.1.0"

from .flow import (
    DiagnosticsRecord,
    FlowConfig,
    FlowState,
    TimeseriesRow,
    fiber_diagnostics,
    inv_kappa23_fiber,
    run,
)
from .geometry import (
    ProfileABC,
    ProfileJet,
    ProfileRFG,
    abc_to_rfg,
    cone_ratio,
    kahler_ratio,
    rfg_to_abc,
    ricci_diagonal,
    sectional_curvatures,
)
from .grid import EVEN, ODD, StaggeredGrid
from .perturbation import PerturbationParams, initial_profiles, psi, volume_integral_checks
from .soliton import SolitonTrajectory, cone_reference, first_integral, integrate_profile

__all__ = [
    "DiagnosticsRecord",
    "EVEN",
    "FlowConfig",
    "FlowState",
    "ODD",
    "PerturbationParams",
    "ProfileABC",
    "ProfileJet",
    "ProfileRFG",
    "SolitonTrajectory",
    "StaggeredGrid",
    "TimeseriesRow",
    "abc_to_rfg",
    "cone_ratio",
    "cone_reference",
    "fiber_diagnostics",
    "first_integral",
    "initial_profiles",
    "integrate_profile",
    "inv_kappa23_fiber",
    "kahler_ratio",
    "psi",
    "rfg_to_abc",
    "ricci_diagonal",
    "run",
    "sectional_curvatures",
    "volume_integral_checks",
]
