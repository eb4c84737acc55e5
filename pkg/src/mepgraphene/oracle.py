"""Brute-force reference moments of an MEP state.

Direct polar quadrature of f(p) in momentum space: periodic trapezoid in the
angle, composite Gauss-Legendre in |p| around the local Fermi edge.  Nothing
here goes through the Fermi-integral or angular-Fermi machinery, which is
what makes it an independent check of the closure formulas.
"""
from dataclasses import dataclass
import math

import numpy as np

from . import kernels
from ._quadrules import EDGE_ABOVE, ORACLE_ORDER
from .closure import ClosureTensors, MomentState, RegimeTag
from .errors import QuadratureSpecError

TAIL_THRESHOLD = 1e-12


@dataclass(frozen=True)
class QuadratureSpec:
    """Oracle resolution.

    ``radial_nodes`` Gauss points cover the Fermi-edge window of every ray;
    ``angular_nodes`` is the minimum trapezoid count (raised automatically
    with |B| unless ``auto_angular`` is off); ``radial_cutoff`` is in units
    of momentum and defaults to (A + |B| + 60) T.
    """

    radial_nodes: int = 400
    angular_nodes: int = 512
    radial_cutoff: float = None
    auto_angular: bool = True

    def __post_init__(self):
        if self.radial_nodes < ORACLE_ORDER or self.angular_nodes < 4:
            raise QuadratureSpecError(f"too few nodes in {self}")
        if self.radial_cutoff is not None and not self.radial_cutoff > 0:
            raise QuadratureSpecError("radial_cutoff must be positive")

    def doubled(self):
        return QuadratureSpec(2 * self.radial_nodes, 2 * self.angular_nodes,
                              self.radial_cutoff, self.auto_angular)


def angular_count(spec, b):
    if not spec.auto_angular:
        return spec.angular_nodes
    need = 24.0 * b + 256.0
    return max(spec.angular_nodes, 1 << int(math.ceil(math.log2(need))))


def oracle_moments(m, spec=None):
    """(MomentState, ClosureTensors) of the multipliers ``m`` by direct quadrature."""
    spec = spec or QuadratureSpec()
    a, b, temp = m.a, m.b, m.temp
    top = max(a + b, 0.0)
    rho_max = (max(a + b + EDGE_ABOVE, EDGE_ABOVE) if spec.radial_cutoff is None
               else spec.radial_cutoff / temp)
    gap = rho_max - top
    # neglected tail ~ int_gap^inf (x + top)^2 e^-x dx relative to the bulk
    tail = math.exp(-gap) * (gap + top + 2.0) ** 2 / max(1.0, top) ** 2 if gap > 0 else 1.0
    if tail > TAIL_THRESHOLD:
        raise QuadratureSpecError(
            f"radial cutoff {rho_max * temp:.4g} leaves tail estimate {tail:.2e} "
            f"> {TAIL_THRESHOLD:g}")
    panels = max(1, spec.radial_nodes // ORACLE_ORDER)
    sums = kernels.oracle_sums(a, m.b_vec[0], m.b_vec[1], temp, angular_count(spec, b),
                               panels, rho_max)
    norm = 1.0 / (4.0 * math.pi ** 2)
    n = norm * temp ** 2 * sums[0]
    nu = norm * temp ** 2 * sums[1:3]
    ne = norm * temp ** 3 * sums[3]
    p = norm * temp ** 2 * np.array([[sums[4], sums[5]], [sums[5], sums[6]]])
    q = norm * temp * np.array([[sums[7], sums[8]], [sums[8], sums[9]]])
    s = norm * temp ** 3 * sums[10:12]
    state = MomentState.__new__(MomentState)
    state.n, state.u, state.e = n, nu / n, ne / n
    return state, ClosureTensors(p, q, s, RegimeTag.EXACT)
