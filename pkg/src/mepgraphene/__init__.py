"""Maximum-entropy moment closure and hydrodynamic solvers for Dirac-cone carriers."""
__version__ = "0.1.0"

from ._backend import BACKEND
from .closure import (
    ClosureTensors, MomentState, Multipliers, RegimeTag, closure_degenerate, closure_diffusive,
    closure_exact, closure_fields, closure_mb, moments_to_multipliers, multipliers_to_moments,
    solve_multipliers,
)
from .errors import (
    CollimationError, ConfigError, ConvergenceError, DomainError, PositivityError,
    QuadratureSpecError,
)
from .fields import BandConfig, Grid, PotentialField
from .oracle import QuadratureSpec, oracle_moments
from .special_fns import (
    angular_fermi, angular_fermi_table, bessel_i, degenerate_angular, fermi_integral,
    fermi_integral_inverse,
)

__all__ = [
    "__version__", "BACKEND", "ClosureTensors", "MomentState", "Multipliers", "RegimeTag",
    "closure_degenerate", "closure_diffusive", "closure_exact", "closure_fields", "closure_mb",
    "moments_to_multipliers", "multipliers_to_moments", "solve_multipliers",
    "CollimationError", "ConfigError", "ConvergenceError", "DomainError", "PositivityError",
    "QuadratureSpecError", "BandConfig", "Grid", "PotentialField", "QuadratureSpec",
    "oracle_moments", "angular_fermi", "angular_fermi_table", "bessel_i", "degenerate_angular",
    "fermi_integral", "fermi_integral_inverse",
]
