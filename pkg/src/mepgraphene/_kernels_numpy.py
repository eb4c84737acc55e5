"""Vectorised numpy implementations of the hot kernels.

Array-in, array-out mirrors of :mod:`._kernels_numba`; both must produce the
same numbers to rounding.
"""
import numpy as np
from scipy import special

from ._quadrules import (
    BULK_W, BULK_X, EDGE_ABOVE, EDGE_BELOW, ETA2, ETA3, GL_W, GL_X, LN2, N_THETA, OR_W, OR_X,
    PANELS, PI2, SERIES_TERMS, TAYLOR2, TAYLOR3,
)


def _poly_tail(z, coef, first_power):
    z2 = z * z
    acc = np.zeros_like(z)
    for c in coef[::-1]:
        acc = acc * z2 + c
    return acc * z ** first_power


def _phi23_nonpos(z):
    """phi_2, phi_3 for z <= 0."""
    p2 = np.empty_like(z)
    p3 = np.empty_like(z)
    small = z > -LN2
    if small.any():
        t = z[small]
        p2[small] = ETA2 + LN2 * t + 0.25 * t * t + _poly_tail(t, TAYLOR2, 3)
        p3[small] = (ETA3 + ETA2 * t + 0.5 * LN2 * t * t + t ** 3 / 12.0
                     + _poly_tail(t, TAYLOR3, 4))
    big = ~small
    if big.any():
        x = np.exp(z[big])
        s2 = np.zeros_like(x)
        s3 = np.zeros_like(x)
        xk = np.ones_like(x)
        sign = 1.0
        for k in range(1, SERIES_TERMS + 1):
            xk = xk * x
            s2 += sign * xk / (k * k)
            s3 += sign * xk / (k * k * k)
            sign = -sign
        p2[big] = s2
        p3[big] = s3
    return p2, p3


def phi_table(z):
    """Fermi integrals phi_0..phi_3 of ``z``; result shape ``(4,) + z.shape``."""
    z = np.asarray(z, dtype=float)
    out = np.empty((4,) + z.shape)
    ez = np.exp(-np.abs(z))
    pos = z >= 0
    out[0] = np.where(pos, 1.0 / (1.0 + ez), ez / (1.0 + ez))
    out[1] = np.maximum(z, 0.0) + np.log1p(ez)
    zn = -np.abs(z)
    neg2, neg3 = _phi23_nonpos(zn)
    # reflection for z > 0 (exact for integer order)
    out[2] = np.where(pos, 0.5 * z * z + PI2 / 6.0 - neg2, neg2)
    out[3] = np.where(pos, z ** 3 / 6.0 + PI2 * z / 6.0 + neg3, neg3)
    return out


def theta_nodes(a, b):
    """Nodes and weights (including the 1/pi) for theta in [0, pi].

    The panels are stretched with a sinh map around the real part of the
    complex angle where a + b cos(theta) hits the first pole of the Fermi
    function, so the rule resolves the Fermi edge for any b.
    ``a`` and ``b`` are 1-d arrays; output shape ``(len(a), N_THETA)``.
    """
    a = np.atleast_1d(np.asarray(a, dtype=float))
    b = np.atleast_1d(np.asarray(b, dtype=float))
    # b negligible next to |i pi - a|: constant integrand, plain panels
    tilted = b > 1e-12 * np.hypot(a, np.pi)
    bsafe = np.where(tilted, b, 1.0)
    root = np.arccos((1j * np.pi - a) / bsafe + 0j)
    center = np.where(tilted, np.clip(root.real, 0.0, np.pi), 0.5 * np.pi)
    dist = np.where(tilted, np.maximum(np.abs(root.imag), 1e-300), 1e300)
    lengths = np.stack([center, np.pi - center], axis=-1)  # (m, 2)
    tmax = np.arcsinh(lengths / dist[:, None])
    h = tmax / PANELS  # (m, 2)
    k = np.arange(PANELS)
    # t at each node: (m, 2, PANELS, G)
    t = (k[None, None, :, None] + 0.5 * (GL_X[None, None, None, :] + 1.0)) * h[:, :, None, None]
    wt = 0.5 * h[:, :, None, None] * GL_W[None, None, None, :]
    off = dist[:, None, None, None] * np.sinh(t)
    w = dist[:, None, None, None] * np.cosh(t) * wt
    # uniform fallback when dist is huge relative to the side (avoid overflow in sinh*dist)
    side = np.array([-1.0, 1.0])[None, :, None, None]
    theta = center[:, None, None, None] + side * off
    theta = theta.reshape(len(a), N_THETA)
    w = (w / np.pi).reshape(len(a), N_THETA)
    return theta, w


def angular_table_batch(a, b):
    """Table  I[m, s, N] = (1/pi) int_0^pi cos(N t) phi_s(a + b cos t) dt, s, N = 0..3."""
    a = np.atleast_1d(np.asarray(a, dtype=float))
    b = np.atleast_1d(np.asarray(b, dtype=float))
    theta, w = theta_nodes(a, b)
    phi = phi_table(a[:, None] + b[:, None] * np.cos(theta))  # (4, m, nt)
    cosn = np.stack([np.cos(n * theta) for n in range(4)])  # (4, m, nt)
    return np.einsum("smt,nmt,mt->msn", phi, cosn, w)


def angular_table(a, b):
    return angular_table_batch(np.array([a]), np.array([b]))[0]


def _residual_jac(t, u_t, g_t):
    i20, i21, i30 = t[:, 2, 0], t[:, 2, 1], t[:, 3, 0]
    h1 = np.minimum(i21 / i20, 1.0 - 1e-16)
    r1 = np.arctanh(h1) - np.arctanh(u_t)
    r2 = np.log(2.0 * i30) - 1.5 * np.log(i20) - np.log(g_t)
    da20, db20 = t[:, 1, 0], t[:, 1, 1]
    da21, db21 = t[:, 1, 1], 0.5 * (t[:, 1, 0] + t[:, 1, 2])
    da30, db30 = t[:, 2, 0], t[:, 2, 1]
    f = 1.0 / ((1.0 - h1 * h1) * i20 * i20)
    j11 = (da21 * i20 - i21 * da20) * f
    j12 = (db21 * i20 - i21 * db20) * f
    j21 = da30 / i30 - 1.5 * da20 / i20
    j22 = db30 / i30 - 1.5 * db20 / i20
    return r1, r2, j11, j12, j21, j22


def newton_ab_batch(u_t, g_t, a0, b0, tol, maxit):
    """Vectorised damped Newton; same iteration as the numba kernel."""
    a = np.array(a0, dtype=float)
    b = np.abs(np.array(b0, dtype=float))
    its = np.zeros(a.shape, dtype=np.int64)
    # state[k]: r1, r2, j11, j12, j21, j22 per cell
    state = np.array(_residual_jac(angular_table_batch(a, b), u_t, g_t))
    res = np.maximum(np.abs(state[0]), np.abs(state[1]))
    active = res > tol
    for _ in range(maxit):
        idx = np.flatnonzero(active)
        if idx.size == 0:
            break
        r1, r2, j11, j12, j21, j22 = state[:, idx]
        det = j11 * j22 - j12 * j21
        with np.errstate(divide="ignore", invalid="ignore"):
            da = -(r1 * j22 - r2 * j12) / det
            db = -(j11 * r2 - j21 * r1) / det
        big = np.maximum(np.abs(da), np.abs(db))
        scale = np.where(big > 20.0, 20.0 / np.where(big > 0, big, 1.0), 1.0)
        da, db = da * scale, db * scale
        lam = np.ones(idx.size)
        pending = np.isfinite(det) & (det != 0)
        accepted = np.zeros(idx.size, dtype=bool)
        for _ in range(40):
            p = np.flatnonzero(pending)
            if p.size == 0:
                break
            cells = idx[p]
            an = a[cells] + lam[p] * da[p]
            bn = np.abs(b[cells] + lam[p] * db[p])
            q = np.array(_residual_jac(angular_table_batch(an, bn), u_t[cells], g_t[cells]))
            rn = np.maximum(np.abs(q[0]), np.abs(q[1]))
            ok = (np.isfinite(rn) & (rn < res[cells] * (1.0 - 1e-4 * lam[p]))) | (rn <= tol)
            good = cells[ok]
            a[good], b[good] = an[ok], bn[ok]
            state[:, good] = q[:, ok]
            res[good] = rn[ok]
            accepted[p[ok]] = True
            pending[p[ok]] = False
            lam[p[~ok]] *= 0.5
        its[idx[accepted]] += 1
        active[idx] = accepted & (res[idx] > tol)
    return a, b, res, its


# --- kinetic oracle ---------------------------------------------------------

def _radial_moments(z, rho_max, panels):
    lo = np.maximum(0.0, z - EDGE_BELOW)
    hi = np.minimum(rho_max, np.maximum(z, 0.0) + EDGE_ABOVE)
    # bulk panel (zero width when lo == 0)
    rho = 0.5 * lo[:, None] * (BULK_X[None, :] + 1.0)
    w = 0.5 * lo[:, None] * BULK_W[None, :] * special.expit(z[:, None] - rho)
    r = [np.sum(w * rho ** k, axis=1) for k in range(3)]
    h = (hi - lo) / panels
    k = np.arange(panels)
    left = lo[:, None, None] + k[None, :, None] * h[:, None, None]
    rho = left + 0.5 * h[:, None, None] * (OR_X[None, None, :] + 1.0)
    w = 0.5 * h[:, None, None] * OR_W[None, None, :] * special.expit(z[:, None, None] - rho)
    for p in range(3):
        r[p] = r[p] + np.sum(w * rho ** p, axis=(1, 2))
    return r


def oracle_sums(a, bx, by, temp, n_theta, panels, rho_max):
    dth = 2.0 * np.pi / n_theta
    th = np.arange(n_theta) * dth
    cx, cy = np.cos(th), np.sin(th)
    r0, r1, r2 = _radial_moments(a + bx * cx + by * cy, rho_max, panels)
    rows = [r1, cx * r1, cy * r1, r2, cx * cx * r1, cx * cy * r1, cy * cy * r1,
            cy * cy * r0, -cx * cy * r0, cx * cx * r0, cx * r2, cy * r2]
    return np.array([np.sum(v) for v in rows]) * dth


__all__ = ["phi_table", "theta_nodes", "angular_table", "angular_table_batch",
           "newton_ab_batch", "oracle_sums"]
