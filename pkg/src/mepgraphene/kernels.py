"""Backend dispatch for the compiled kernels (numba) and their numpy mirror."""
import numpy as np

from ._backend import BACKEND, USE_NUMBA
from . import _kernels_numpy as numpy_kernels

if USE_NUMBA:
    from . import _kernels_numba as numba_kernels
else:  # pragma: no cover
    numba_kernels = None

_impl = numba_kernels if USE_NUMBA else numpy_kernels


def phi_table(z):
    z = np.ascontiguousarray(z, dtype=float)
    return _impl.phi_table(z.ravel()).reshape((4,) + z.shape)


def theta_nodes(a, b):
    return _impl.theta_nodes(np.ascontiguousarray(a, dtype=float),
                             np.ascontiguousarray(b, dtype=float))


def angular_table(a, b):
    return _impl.angular_table(float(a), float(b))


def angular_table_batch(a, b):
    return _impl.angular_table_batch(np.ascontiguousarray(a, dtype=float),
                                     np.ascontiguousarray(b, dtype=float))


def newton_ab_batch(u_t, g_t, a0, b0, tol, maxit):
    args = [np.ascontiguousarray(x, dtype=float) for x in (u_t, g_t, a0, b0)]
    return _impl.newton_ab_batch(*args, float(tol), int(maxit))


def oracle_sums(a, bx, by, temp, n_theta, panels, rho_max):
    return _impl.oracle_sums(float(a), float(bx), float(by), float(temp), int(n_theta),
                             int(panels), float(rho_max))


__all__ = ["BACKEND", "phi_table", "theta_nodes", "angular_table", "angular_table_batch",
           "newton_ab_batch", "oracle_sums", "numpy_kernels", "numba_kernels"]
