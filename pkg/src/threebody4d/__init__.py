"""Numerical toolkit for the three-body problem in R^4 at fixed rank-4 angular momentum."""

__version__ = "0.1.0"

from .bivectors import (
    Bivector4,
    SpectralForm,
    inner,
    nearest_rank2,
    pfaffian,
    spectral_decompose,
    spectral_values,
    wedge,
)
from .dynamics import IntegratorConfig, Trajectory, integrate, stability_probe
from .escape import EscapeParams, escape_state, escape_sweep
from .kepler import (
    CurvePoint,
    circular_binary,
    circular_energy_constant,
    critical_curve_energy,
    curve_point,
    energy_at_infinity,
)
from .minimize import (
    MinimizeConfig,
    MinResult,
    minimize_at_momentum,
    sweep_momentum_ratio,
)
from .phase import (
    CollisionError,
    JacobiState,
    Masses,
    State,
    angular_momentum,
    circularize_binary,
    drop_radial_momentum,
    energy,
    from_jacobi,
    load_state,
    save_state,
    scale_map,
    to_jacobi,
)

__all__ = [
    "__version__",
    "Bivector4",
    "SpectralForm",
    "wedge",
    "inner",
    "pfaffian",
    "spectral_values",
    "spectral_decompose",
    "nearest_rank2",
    "CollisionError",
    "Masses",
    "State",
    "JacobiState",
    "to_jacobi",
    "from_jacobi",
    "angular_momentum",
    "energy",
    "scale_map",
    "drop_radial_momentum",
    "circularize_binary",
    "save_state",
    "load_state",
    "CurvePoint",
    "circular_energy_constant",
    "energy_at_infinity",
    "circular_binary",
    "curve_point",
    "critical_curve_energy",
    "EscapeParams",
    "escape_state",
    "escape_sweep",
    "MinimizeConfig",
    "MinResult",
    "minimize_at_momentum",
    "sweep_momentum_ratio",
    "IntegratorConfig",
    "Trajectory",
    "integrate",
    "stability_probe",
]
