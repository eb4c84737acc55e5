"""Loop-level numba kernels; see :mod:`._kernels_numpy` for the mirror."""
import cmath
import math

import numpy as np
from numba import njit

from ._quadrules import (
    ETA2, ETA3, GL_ORDER, GL_W, GL_X, LN2, N_THETA, PANELS,
    PI2, SERIES_TERMS, TAYLOR2, TAYLOR3,
)

_T2 = TAYLOR2.copy()
_T3 = TAYLOR3.copy()
_GX = GL_X.copy()
_K = np.arange(1, SERIES_TERMS + 1, dtype=np.float64)
_INV_K2 = (-1.0) ** (_K + 1) / _K ** 2
_INV_K3 = (-1.0) ** (_K + 1) / _K ** 3
_GW = GL_W.copy()


@njit(cache=True)
def _phi23_nonpos(z):
    if z > -LN2:
        z2 = z * z
        acc2 = 0.0
        acc3 = 0.0
        for i in range(_T2.shape[0] - 1, -1, -1):
            acc2 = acc2 * z2 + _T2[i]
            acc3 = acc3 * z2 + _T3[i]
        p2 = ETA2 + LN2 * z + 0.25 * z2 + acc2 * z2 * z
        p3 = ETA3 + ETA2 * z + 0.5 * LN2 * z2 + z2 * z / 12.0 + acc3 * z2 * z2
        return p2, p3
    x = math.exp(z)
    s2 = 0.0
    s3 = 0.0
    xk = 1.0
    for k in range(SERIES_TERMS):
        xk *= x
        s2 += xk * _INV_K2[k]
        s3 += xk * _INV_K3[k]
        if xk < 1e-17 * s2:
            break
    return s2, s3


@njit(cache=True)
def phi_all(z):
    """(phi_0, phi_1, phi_2, phi_3) at a scalar z."""
    ez = math.exp(-abs(z))
    if z >= 0.0:
        p0 = 1.0 / (1.0 + ez)
        p1 = z + math.log1p(ez)
        n2, n3 = _phi23_nonpos(-z)
        p2 = 0.5 * z * z + PI2 / 6.0 - n2
        p3 = z * z * z / 6.0 + PI2 * z / 6.0 + n3
    else:
        p0 = ez / (1.0 + ez)
        p1 = math.log1p(ez)
        p2, p3 = _phi23_nonpos(z)
    return p0, p1, p2, p3


@njit(cache=True)
def phi_table(z):
    z = z.ravel()
    out = np.empty((4, z.shape[0]))
    for i in range(z.shape[0]):
        p0, p1, p2, p3 = phi_all(z[i])
        out[0, i] = p0
        out[1, i] = p1
        out[2, i] = p2
        out[3, i] = p3
    return out


@njit(cache=True)
def _theta_nodes_into(a, b, theta, w):
    # below this b the integrand is constant to rounding and the pole is far
    if b > 1e-12 * math.hypot(a, math.pi):
        root = cmath.acos(complex((-a) / b, math.pi / b))
        center = min(max(root.real, 0.0), math.pi)
        dist = max(abs(root.imag), 1e-300)
    else:
        center = 0.5 * math.pi
        dist = 1e300
    j = 0
    for side in range(2):
        length = center if side == 0 else math.pi - center
        sgn = -1.0 if side == 0 else 1.0
        h = math.asinh(length / dist) / PANELS
        for k in range(PANELS):
            for g in range(GL_ORDER):
                t = (k + 0.5 * (_GX[g] + 1.0)) * h
                theta[j] = center + sgn * dist * math.sinh(t)
                w[j] = dist * math.cosh(t) * 0.5 * h * _GW[g] / math.pi
                j += 1


@njit(cache=True)
def theta_nodes(a, b):
    m = a.shape[0]
    theta = np.empty((m, N_THETA))
    w = np.empty((m, N_THETA))
    for i in range(m):
        _theta_nodes_into(a[i], b[i], theta[i], w[i])
    return theta, w


@njit(cache=True)
def _table_into(a, b, theta, w, out):
    _theta_nodes_into(a, b, theta, w)
    for s in range(4):
        for n in range(4):
            out[s, n] = 0.0
    for j in range(N_THETA):
        c = math.cos(theta[j])
        p0, p1, p2, p3 = phi_all(a + b * c)
        # cos(n t) by the Chebyshev recurrence
        c0 = 1.0
        c1 = c
        c2 = 2.0 * c * c1 - c0
        c3 = 2.0 * c * c2 - c1
        wj = w[j]
        for s in range(4):
            p = p0 if s == 0 else (p1 if s == 1 else (p2 if s == 2 else p3))
            pw = p * wj
            out[s, 0] += pw
            out[s, 1] += pw * c1
            out[s, 2] += pw * c2
            out[s, 3] += pw * c3


@njit(cache=True)
def angular_table(a, b):
    out = np.empty((4, 4))
    theta = np.empty(N_THETA)
    w = np.empty(N_THETA)
    _table_into(a, b, theta, w, out)
    return out


@njit(cache=True)
def angular_table_batch(a, b):
    m = a.shape[0]
    out = np.empty((m, 4, 4))
    theta = np.empty(N_THETA)
    w = np.empty(N_THETA)
    for i in range(m):
        _table_into(a[i], b[i], theta, w, out[i])
    return out


# --- moment inversion -------------------------------------------------------

@njit(cache=True)
def _residual_jac(t, u_t, g_t):
    """Residual (atanh|u| mismatch, log-energy mismatch) and its (A, B) Jacobian."""
    i20 = t[2, 0]
    i21 = t[2, 1]
    i30 = t[3, 0]
    h1 = i21 / i20
    if h1 >= 1.0:
        h1 = 1.0 - 1e-16
    r1 = math.atanh(h1) - math.atanh(u_t)
    r2 = math.log(2.0 * i30) - 1.5 * math.log(i20) - math.log(g_t)
    da20 = t[1, 0]
    db20 = t[1, 1]
    da21 = t[1, 1]
    db21 = 0.5 * (t[1, 0] + t[1, 2])
    da30 = t[2, 0]
    db30 = t[2, 1]
    f = 1.0 / ((1.0 - h1 * h1) * i20 * i20)
    j11 = (da21 * i20 - i21 * da20) * f
    j12 = (db21 * i20 - i21 * db20) * f
    j21 = da30 / i30 - 1.5 * da20 / i20
    j22 = db30 / i30 - 1.5 * db20 / i20
    return r1, r2, j11, j12, j21, j22


@njit(cache=True)
def newton_ab(u_t, g_t, a0, b0, tol, maxit):
    """Damped Newton for (A, B) given target |u| and e / sqrt(2 pi n).

    Returns ``(a, b, residual, iterations)``; ``residual <= tol`` on success.
    """
    theta = np.empty(N_THETA)
    w = np.empty(N_THETA)
    t = np.empty((4, 4))
    a = a0
    b = abs(b0)
    _table_into(a, b, theta, w, t)
    r1, r2, j11, j12, j21, j22 = _residual_jac(t, u_t, g_t)
    res = max(abs(r1), abs(r2))
    it = 0
    while it < maxit:
        if res <= tol:
            break
        it += 1
        det = j11 * j22 - j12 * j21
        if det == 0.0 or not math.isfinite(det):
            break
        da = -(r1 * j22 - r2 * j12) / det
        db = -(j11 * r2 - j21 * r1) / det
        # keep steps within the range where the model is trustworthy
        big = max(abs(da), abs(db))
        if big > 20.0:
            da *= 20.0 / big
            db *= 20.0 / big
        lam = 1.0
        accepted = False
        for _ in range(40):
            an = a + lam * da
            bn = abs(b + lam * db)
            _table_into(an, bn, theta, w, t)
            q1, q2, k11, k12, k21, k22 = _residual_jac(t, u_t, g_t)
            rn = max(abs(q1), abs(q2))
            if math.isfinite(rn) and rn < res * (1.0 - 1e-4 * lam) or rn <= tol:
                accepted = True
                break
            lam *= 0.5
        if not accepted:
            break
        a = an
        b = bn
        r1, r2, j11, j12, j21, j22 = q1, q2, k11, k12, k21, k22
        res = rn
    return a, b, res, it


@njit(cache=True)
def newton_ab_batch(u_t, g_t, a0, b0, tol, maxit):
    m = u_t.shape[0]
    a = np.empty(m)
    b = np.empty(m)
    res = np.empty(m)
    its = np.empty(m, dtype=np.int64)
    for i in range(m):
        a[i], b[i], res[i], its[i] = newton_ab(u_t[i], g_t[i], a0[i], b0[i], tol, maxit)
    return a, b, res, its


# --- kinetic oracle ---------------------------------------------------------

from ._quadrules import BULK_W, BULK_X, EDGE_ABOVE, EDGE_BELOW, OR_W, OR_X  # noqa: E402

_OX = OR_X.copy()
_OW = OR_W.copy()
_BX = BULK_X.copy()
_BW = BULK_W.copy()


@njit(cache=True)
def _radial_moments(z, rho_max, panels):
    """int rho^k / (exp(rho - z) + 1) d rho on [0, rho_max] for k = 0, 1, 2."""
    lo = max(0.0, z - EDGE_BELOW)
    hi = min(rho_max, max(z, 0.0) + EDGE_ABOVE)
    r0 = 0.0
    r1 = 0.0
    r2 = 0.0
    if lo > 0.0:
        # deep Fermi sea: f = 1 - O(e^-40), smooth
        for g in range(_BX.shape[0]):
            rho = 0.5 * lo * (_BX[g] + 1.0)
            f = 1.0 / (math.exp(rho - z) + 1.0)
            w = 0.5 * lo * _BW[g] * f
            r0 += w
            r1 += w * rho
            r2 += w * rho * rho
    h = (hi - lo) / panels
    for k in range(panels):
        left = lo + k * h
        for g in range(_OX.shape[0]):
            rho = left + 0.5 * h * (_OX[g] + 1.0)
            x = rho - z
            if x > 0.0:
                ex = math.exp(-x)
                f = ex / (1.0 + ex)
            else:
                f = 1.0 / (math.exp(x) + 1.0)
            w = 0.5 * h * _OW[g] * f
            r0 += w
            r1 += w * rho
            r2 += w * rho * rho
    return r0, r1, r2


@njit(cache=True)
def oracle_sums(a, bx, by, temp, n_theta, panels, rho_max):
    """Raw angular sums; index layout documented in :func:`oracle.oracle_moments`."""
    out = np.zeros(12)
    dth = 2.0 * math.pi / n_theta
    for j in range(n_theta):
        th = j * dth
        cx = math.cos(th)
        cy = math.sin(th)
        z = a + bx * cx + by * cy
        r0, r1, r2 = _radial_moments(z, rho_max, panels)
        out[0] += r1
        out[1] += cx * r1
        out[2] += cy * r1
        out[3] += r2
        out[4] += cx * cx * r1
        out[5] += cx * cy * r1
        out[6] += cy * cy * r1
        out[7] += cy * cy * r0
        out[8] += -cx * cy * r0
        out[9] += cx * cx * r0
        out[10] += cx * r2
        out[11] += cy * r2
    for k in range(12):
        out[k] *= dth
    return out
