"""Global action-angle coordinates for the double-well Duffing oscillator.

The phase plane is covered twice by complex squaring; on the covered plane
every orbit turns clockwise around the single center (1, 0), so one global
angle (and an action built on it) describes all three orbit regions at
once.  Subpackage map:

  dynamics     the original vector field, Hamiltonian and fixed points
  covering     the two-sheeted covering map, its inverse and the cut
  integrate    RK4 / adaptive RK45 integration with events and sheets
  actionangle  the global angle, its unwrapping and the action integrals
  verify       seeded numerical cross-checks for every closed formula
  cli          scenario runner, figure export (CSV/SVG) and `verify`
"""

from ._kernels import USING_NUMBA
from .actionangle import (
    EnergyAngleSample,
    PolarState,
    action_covered,
    action_original,
    covered_from_polar,
    dH_dtheta,
    energy_angle_curve,
    polar_of,
    theta_dot_of,
    theta_of,
    unwrap_theta,
)
from .covering import (
    CoveredState,
    Sheet,
    cover_map,
    covered_field,
    crosses_cut,
    inverse_cover,
    toggle_sheet,
)
from .dynamics import (
    Params,
    State,
    duffing_field,
    energy_rate,
    fixed_points,
    hamiltonian,
    state_on_level,
)
from .exceptions import (
    BranchPointApproach,
    CenterSingular,
    ConfigError,
    DegenerateCrossing,
    DuffingError,
    MaxStepsExceeded,
    NoReturn,
    OnSeparatrix,
    OriginSingular,
    StepFailure,
    UnwrapAmbiguous,
)
from .integrate import (
    CUT_CROSSING,
    DEFAULT_CONFIG,
    SECTION_RETURN,
    Event,
    IntegratorConfig,
    Trajectory,
    find_period,
    integrate_covered,
    integrate_original,
)
from .verify import CheckReport, run_all, run_check

__version__ = "0.1.0"

__all__ = [
    "USING_NUMBA",
    "EnergyAngleSample",
    "PolarState",
    "action_covered",
    "action_original",
    "covered_from_polar",
    "dH_dtheta",
    "energy_angle_curve",
    "polar_of",
    "theta_dot_of",
    "theta_of",
    "unwrap_theta",
    "CoveredState",
    "Sheet",
    "cover_map",
    "covered_field",
    "crosses_cut",
    "inverse_cover",
    "toggle_sheet",
    "Params",
    "State",
    "duffing_field",
    "energy_rate",
    "fixed_points",
    "hamiltonian",
    "state_on_level",
    "BranchPointApproach",
    "CenterSingular",
    "ConfigError",
    "DegenerateCrossing",
    "DuffingError",
    "MaxStepsExceeded",
    "NoReturn",
    "OnSeparatrix",
    "OriginSingular",
    "StepFailure",
    "UnwrapAmbiguous",
    "CUT_CROSSING",
    "DEFAULT_CONFIG",
    "SECTION_RETURN",
    "Event",
    "IntegratorConfig",
    "Trajectory",
    "find_period",
    "integrate_covered",
    "integrate_original",
    "CheckReport",
    "run_all",
    "run_check",
]
