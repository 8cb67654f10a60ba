"""Hardware-constrained k-space trajectory learning through an exact NUFFT."""

from .constraints import FeasibilityReport, check_feasibility, project
from .core import HardwareSpec, Trajectory, normalized_bounds, traj_to_profile, undersampling_factor
from .density import pipe_weights
from .nufft import nufft_adjoint, nufft_forward, nufft_location_grad
from .optimizer import OptimConfig, RunHistory, optimize, radial_init

__version__ = "0.1.0"

__all__ = [
    "FeasibilityReport",
    "HardwareSpec",
    "OptimConfig",
    "RunHistory",
    "Trajectory",
    "check_feasibility",
    "normalized_bounds",
    "nufft_adjoint",
    "nufft_forward",
    "nufft_location_grad",
    "optimize",
    "pipe_weights",
    "project",
    "radial_init",
    "traj_to_profile",
    "undersampling_factor",
]
