"""Shared constants for the Fermi-integral and angular quadrature kernels."""
import math

import numpy as np
from scipy.special import bernoulli

LN2 = math.log(2.0)
PI2 = math.pi * math.pi
ZETA3 = 1.2020569031595942
ETA2 = PI2 / 12.0
ETA3 = 0.75 * ZETA3

# Taylor coefficients of the logistic function about 0:
# 1/(1+e^-z) = 1/2 + sum_n TANH_C[n-1] z^(2n-1),  TANH_C[n-1] = (4^n - 1) B_2n / (2n)!
_NT = 16
_b = bernoulli(2 * _NT)
TANH_C = np.array(
    [(4.0 ** n - 1.0) * _b[2 * n] / math.factorial(2 * n) for n in range(1, _NT + 1)]
)
# integrated twice and three times (coefficients of z^(2n+1) and z^(2n+2))
TAYLOR2 = np.array([TANH_C[n - 1] / ((2 * n) * (2 * n + 1)) for n in range(1, _NT + 1)])
TAYLOR3 = np.array(
    [TANH_C[n - 1] / ((2 * n) * (2 * n + 1) * (2 * n + 2)) for n in range(1, _NT + 1)]
)

SERIES_TERMS = 60

# theta panels for the angular-Fermi integrals: per side PANELS panels of
# GL_ORDER points in the sinh-stretched variable
GL_ORDER = 16
PANELS = 8
GL_X, GL_W = np.polynomial.legendre.leggauss(GL_ORDER)
NODES_PER_SIDE = PANELS * GL_ORDER
N_THETA = 2 * NODES_PER_SIDE

# smooth integrands of the degenerate functions F_N^s on [0, C(psi)]
DEG_ORDER = 48
DEG_X, DEG_W = np.polynomial.legendre.leggauss(DEG_ORDER)

SMAX = 3
NMAX = 3

# kinetic oracle: radial composite Gauss-Legendre, panels of ORACLE_ORDER points
ORACLE_ORDER = 8
OR_X, OR_W = np.polynomial.legendre.leggauss(ORACLE_ORDER)
BULK_X, BULK_W = np.polynomial.legendre.leggauss(16)
# Fermi-edge window [z - EDGE_BELOW, z + EDGE_ABOVE] in units of T
EDGE_BELOW = 40.0
EDGE_ABOVE = 60.0
