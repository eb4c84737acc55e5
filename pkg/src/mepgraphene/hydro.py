"""Finite-volume integrator for the Dirac-cone moment system.

Conservative variables per band are (n, n u_x, n u_y, n e).  Transport uses
the Rusanov flux with wave-speed bound c = 1 (optionally MUSCL/minmod with
SSP-RK2); potential and relaxation sources are Strang-split around it.  The
collimation solvers integrate the reduced direction-field systems with
first-order upwinding.
"""
from dataclasses import dataclass, field
import logging
import math

import numpy as np
from scipy import integrate

from .closure import (
    RegimeTag, closure_fields, energy_ratio, realizability_floor,
)
from .errors import CollimationError, ConfigError, ConvergenceError, PositivityError
from .fields import BandConfig, Grid, total

log = logging.getLogger(__name__)

N_FLOOR = 1e-14
CFL_MAX = 0.9
IMAG_TOL = 1e-7


@dataclass
class BandFields:
    n: np.ndarray
    ux: np.ndarray
    uy: np.ndarray
    e: np.ndarray

    def copy(self):
        return BandFields(self.n.copy(), self.ux.copy(), self.uy.copy(), self.e.copy())

    def conserved(self):
        return np.stack([self.n, self.n * self.ux, self.n * self.uy, self.n * self.e])

    @property
    def speed(self):
        return np.hypot(self.ux, self.uy)


@dataclass
class FieldState:
    """Moment fields of every active band at one time level.

    ``fields`` maps species name to :class:`BandFields` (arrays shaped like
    ``grid.shape``); ``warm`` keeps exact-closure multipliers per species.
    """

    grid: Grid
    fields: dict
    time: float = 0.0
    warm: dict = field(default_factory=dict, repr=False)

    def __post_init__(self):
        for name, f in self.fields.items():
            for arr in (f.n, f.ux, f.uy, f.e):
                if arr.shape != self.grid.shape:
                    raise ConfigError(f"band {name}: field shape {arr.shape} != {self.grid.shape}")
                if not np.all(np.isfinite(arr)):
                    raise PositivityError(f"band {name}: non-finite field", time=self.time)
            if np.any(f.n < 0) or np.any(f.e <= 0):
                raise PositivityError(f"band {name}: need n >= 0 and e > 0", time=self.time)
            if np.any(f.speed > 1.0):
                raise CollimationError(f"band {name}: |u| > 1")

    def copy(self):
        return FieldState(self.grid, {k: v.copy() for k, v in self.fields.items()}, self.time,
                          {k: tuple(a.copy() for a in v) for k, v in self.warm.items()})

    def totals(self, species):
        f = self.fields[species]
        return (total(self.grid, f.n), total(self.grid, f.n * f.ux),
                total(self.grid, f.n * f.uy), total(self.grid, f.n * f.e))


@dataclass(frozen=True)
class Scheme:
    order: int = 1
    cfl: float = 0.45
    regime: RegimeTag = RegimeTag.EXACT
    isothermal: bool = False

    def __post_init__(self):
        if self.order not in (1, 2):
            raise ConfigError(f"scheme.order must be 1 or 2, got {self.order}")
        if not 0 < self.cfl <= CFL_MAX:
            raise ConfigError(f"scheme.cfl must lie in (0, {CFL_MAX}], got {self.cfl}")
        object.__setattr__(self, "regime", RegimeTag.parse(self.regime))


# --- fluxes -----------------------------------------------------------------

def _fluxes(regime, n, ux, uy, e, warm=None):
    """x- and y-fluxes (each shaped (4, m)) and the closure used."""
    cl = closure_fields(regime, n, ux, uy, e, warm)
    fx = np.stack([n * ux, cl.pxx, cl.pxy, cl.sx])
    fy = np.stack([n * uy, cl.pxy, cl.pyy, cl.sy])
    return fx, fy, cl


def flux_and_sources(cell, band, grad_v, regime, warm=None):
    """Fluxes and sources of one cell.

    Returns ``(flux, source)`` where ``flux[k, j]`` is the flux of conserved
    component k = (n, n u_x, n u_y, n e) in direction j, and ``source`` is
    the right-hand side of the same four balance laws.
    """
    grad_v = np.asarray(grad_v, dtype=float).reshape(2)
    n, e = np.array([cell.n]), np.array([cell.e])
    ux, uy = np.array([cell.u[0]]), np.array([cell.u[1]])
    try:
        fx, fy, cl = _fluxes(regime, n, ux, uy, e, warm)
    except ConvergenceError as err:
        err.cell = 0
        raise
    sig = band.sign
    src = np.zeros(4)
    src[1] = -sig * (cl.qxx[0] * grad_v[0] + cl.qxy[0] * grad_v[1])
    src[2] = -sig * (cl.qxy[0] * grad_v[0] + cl.qyy[0] * grad_v[1])
    src[3] = -sig * cell.n * (cell.u[0] * grad_v[0] + cell.u[1] * grad_v[1])
    if band.relaxation_tau is not None:
        src[1:3] -= cell.n * cell.u / band.relaxation_tau
    return np.stack([fx[:, 0], fy[:, 0]], axis=1), src


# --- discrete operators -------------------------------------------------------

def _pad(arr, width, grid, axis):
    """Ghost cells along one spatial axis (-1 = x, -2 = y) of a stacked array."""
    mode = "wrap" if (grid.boundary_x if axis == -1 else grid.boundary_y) == "periodic" else "edge"
    pad = [(0, 0)] * arr.ndim
    pad[axis] = (width, width)
    return np.pad(arr, pad, mode=mode)


def _minmod(a, b):
    return np.where(a * b > 0, np.sign(a) * np.minimum(np.abs(a), np.abs(b)), 0.0)


def _primitive(u_cons):
    n = u_cons[0]
    inv = 1.0 / np.maximum(n, N_FLOOR)
    return np.stack([n, u_cons[1] * inv, u_cons[2] * inv, u_cons[3] * inv])


def _face_states(w, grid, axis, order, regime):
    """Left/right primitive states at the faces i+1/2 for i = -1 .. N-1."""
    if order == 1:
        wp = _pad(w, 1, grid, axis)
        sl = [slice(None)] * w.ndim
        left = wp[_sl(sl, axis, slice(0, -1))]
        right = wp[_sl(sl, axis, slice(1, None))]
        return left, right
    wp = _pad(w, 2, grid, axis)
    sl = [slice(None)] * w.ndim
    dm = wp[_sl(sl, axis, slice(1, -1))] - wp[_sl(sl, axis, slice(0, -2))]
    dp = wp[_sl(sl, axis, slice(2, None))] - wp[_sl(sl, axis, slice(1, -1))]
    slope = _minmod(dm, dp)
    centre = wp[_sl(sl, axis, slice(1, -1))]
    lo, hi = centre - 0.5 * slope, centre + 0.5 * slope
    left = hi[_sl(sl, axis, slice(0, -1))]
    right = lo[_sl(sl, axis, slice(1, None))]
    c_left = centre[_sl(sl, axis, slice(0, -1))]
    c_right = centre[_sl(sl, axis, slice(1, None))]
    left = _realizable_or(left, c_left, regime)
    right = _realizable_or(right, c_right, regime)
    return left, right


def _sl(base, axis, s):
    out = list(base)
    out[axis] = s
    return tuple(out)


def _realizable_or(rec, fallback, regime):
    """Replace reconstructed face states that leave the admissible set."""
    speed = np.hypot(rec[1], rec[2])
    ok = (rec[0] > 0) & (rec[3] > 0) & (speed < 1.0 - 1e-9)
    if regime is RegimeTag.EXACT and np.any(ok):
        g = np.full(speed.shape, np.inf)
        idx = np.nonzero(ok)
        g_min = realizability_floor(speed[idx].ravel()).reshape(speed[idx].shape)
        g[idx] = energy_ratio(rec[0][idx], rec[3][idx]) / g_min
        ok &= g > 1.0 + 1e-6
    return np.where(ok[None], rec, fallback)


def _face_flux(regime, state, axis, warm=None):
    fx, fy, _ = _fluxes(regime, *(state[k].ravel() for k in range(4)), warm)
    return (fx if axis == -1 else fy).reshape(state.shape)


def _face_warm(warm_cell, grid, axis):
    """Multipliers of the cells on either side of each face, as warm starts."""
    if warm_cell is None:
        return None, None
    ab = _pad(np.stack([w.reshape(grid.shape) for w in warm_cell]), 1, grid, axis)
    sl = [slice(None)] * ab.ndim
    lo, hi = ab[_sl(sl, axis, slice(0, -1))], ab[_sl(sl, axis, slice(1, None))]
    return (lo[0].ravel(), lo[1].ravel()), (hi[0].ravel(), hi[1].ravel())


def _rusanov_divergence(u_cons, grid, scheme, warm_cell):
    """-(div F) of the conservative update; returns it with the cell closure."""
    w = _primitive(u_cons)
    rhs = np.zeros_like(u_cons)
    axes = [(-1, grid.dx)] + ([(-2, grid.dy)] if grid.dim == 2 else [])
    cell_flux = None
    for axis, h in axes:
        left, right = _face_states(w, grid, axis, scheme.order, scheme.regime)
        if scheme.order == 1:
            # face states are the cell states, so the cell fluxes are reused
            if cell_flux is None:
                fx, fy, cl = _fluxes(scheme.regime, *(w[k].ravel() for k in range(4)),
                                     warm_cell)
                cell_flux = (fx.reshape(u_cons.shape), fy.reshape(u_cons.shape), cl)
            f = _pad(cell_flux[0] if axis == -1 else cell_flux[1], 1, grid, axis)
            sl = [slice(None)] * f.ndim
            f_left, f_right = f[_sl(sl, axis, slice(0, -1))], f[_sl(sl, axis, slice(1, None))]
        else:
            w_left, w_right = _face_warm(warm_cell, grid, axis)
            f_left = _face_flux(scheme.regime, left, axis, w_left)
            f_right = _face_flux(scheme.regime, right, axis, w_right)
        u_left = np.stack([left[0], left[0] * left[1], left[0] * left[2], left[0] * left[3]])
        u_right = np.stack([right[0], right[0] * right[1], right[0] * right[2],
                            right[0] * right[3]])
        face = 0.5 * (f_left + f_right) - 0.5 * (u_right - u_left)
        sl = [slice(None)] * face.ndim
        rhs -= (face[_sl(sl, axis, slice(1, None))] - face[_sl(sl, axis, slice(0, -1))]) / h
    return rhs, (cell_flux[2] if cell_flux else None)


def _source_update(u_cons, grad, band, regime, h, warm):
    """Exact integration of the frozen-Q force plus linear relaxation over h."""
    w = _primitive(u_cons)
    shape = u_cons.shape[1:]
    cl = closure_fields(regime, *(w[k].ravel() for k in range(4)), warm)
    qxx, qxy, qyy = (c.reshape(shape) for c in (cl.qxx, cl.qxy, cl.qyy))
    sig = band.sign
    fx = -sig * (qxx * grad[0] + qxy * grad[1])
    fy = -sig * (qxy * grad[0] + qyy * grad[1])
    mx0, my0 = u_cons[1], u_cons[2]
    tau = band.relaxation_tau
    if tau is None:
        mx, my = mx0 + h * fx, my0 + h * fy
        ix, iy = mx0 * h + 0.5 * h * h * fx, my0 * h + 0.5 * h * h * fy
    else:
        decay = -math.expm1(-h / tau)          # 1 - exp(-h/tau)
        mx = mx0 * (1.0 - decay) + fx * tau * decay
        my = my0 * (1.0 - decay) + fy * tau * decay
        lag = h - tau * decay
        ix = mx0 * tau * decay + fx * tau * lag
        iy = my0 * tau * decay + fy * tau * lag
    out = u_cons.copy()
    out[1], out[2] = mx, my
    out[3] = u_cons[3] - sig * (ix * grad[0] + iy * grad[1])
    warm_out = (cl.a, cl.b) if cl.a is not None else warm
    return out, warm_out


def _check(u_cons, grid, time, species):
    n = u_cons[0]
    bad = ~np.isfinite(u_cons).all(axis=0)
    if bad.any():
        cell = _where(bad)
        raise PositivityError(f"{species}: non-finite state at cell {cell}", cell=cell, time=time)
    if np.any(n <= 0):
        cell = _where(n <= 0)
        raise PositivityError(f"{species}: n = {n[cell]:.3e} <= 0 at cell {cell}, t = {time}",
                              cell=cell, time=time)
    speed = np.hypot(u_cons[1], u_cons[2]) / np.maximum(n, N_FLOOR)
    if np.any(speed >= 1.0):
        cell = _where(speed >= 1.0)
        raise PositivityError(f"{species}: |u| = {speed[cell]:.6f} >= 1 at cell {cell}, t = {time}",
                              cell=cell, time=time)
    if np.any(u_cons[3] <= 0):
        cell = _where(u_cons[3] <= 0)
        raise PositivityError(f"{species}: e <= 0 at cell {cell}, t = {time}", cell=cell, time=time)


def _where(mask):
    return tuple(int(i) for i in np.argwhere(mask)[0])


def _attach_cell(err, grid):
    if isinstance(err.cell, (int, np.integer)):
        err.cell = tuple(int(i) for i in np.unravel_index(err.cell, grid.shape))
    return err


def check_cfl(grid, dt, cfl=CFL_MAX):
    limit = cfl * grid.min_spacing
    if not 0 < dt <= limit * (1.0 + 1e-12):
        raise ConfigError(f"dt = {dt} violates CFL bound {limit} (cfl = {cfl}, c = 1)")


def step(state, pot, band, dt, scheme=Scheme(), warn=True):
    """Advance every band in ``state`` by one time step ``dt``.

    ``band`` is a :class:`BandConfig` or a sequence of them; each band in
    ``state.fields`` is advanced with the config of the same species.
    ``warn`` controls the isothermal-compatibility warning.
    """
    grid = state.grid
    check_cfl(grid, dt)
    bands = [band] if isinstance(band, BandConfig) else list(band)
    out = state.copy()
    grad = pot.grad
    for b in bands:
        f = state.fields[b.species]
        u_cons = f.conserved()
        warm = state.warm.get(b.species)
        if scheme.isothermal:
            e_iso = float(f.e.flat[0])
            if np.any(np.abs(f.e - e_iso) > 1e-12 * e_iso):
                raise ConfigError("isothermal runs need a uniform initial e")
            drift = np.abs(f.ux * grad[0] + f.uy * grad[1])
            if warn and drift.max() > 1e-12:
                log.warning("isothermal closure with u.grad V != 0 (max %.3e): energy "
                            "equation is dropped regardless", drift.max())
        try:
            u_cons, warm = _source_update(u_cons, grad, b, scheme.regime, 0.5 * dt, warm)
            u_cons = _iso(u_cons, scheme, f)
            _check(u_cons, grid, state.time, b.species)
            rhs, cl = _rusanov_divergence(u_cons, grid, scheme, warm)
            if cl is not None and cl.a is not None:
                warm = (cl.a, cl.b)
            stage = _iso(u_cons + dt * rhs, scheme, f)
            if scheme.order == 2:
                _check(stage, grid, state.time + dt, b.species)
                rhs2, _ = _rusanov_divergence(stage, grid, scheme, warm)
                stage = _iso(0.5 * (u_cons + stage + dt * rhs2), scheme, f)
            _check(stage, grid, state.time + dt, b.species)
            u_cons, warm = _source_update(stage, grad, b, scheme.regime, 0.5 * dt, warm)
            u_cons = _iso(u_cons, scheme, f)
            _check(u_cons, grid, state.time + dt, b.species)
        except ConvergenceError as err:
            raise _attach_cell(err, grid)
        w = _primitive(u_cons)
        out.fields[b.species] = BandFields(w[0], w[1], w[2], w[3])
        if warm is not None:
            out.warm[b.species] = warm
    out.time = state.time + dt
    return out


def _iso(u_cons, scheme, f0):
    if scheme.isothermal:
        u_cons = u_cons.copy()
        u_cons[3] = u_cons[0] * float(f0.e.flat[0])
    return u_cons


def run_hydro(state, pot, band, t_end, scheme=Scheme(), snapshot_every=None, dt=None,
              callback=None):
    """Integrate to ``t_end``; returns (final state, list of snapshot states)."""
    dt_max = scheme.cfl * state.grid.min_spacing if dt is None else dt
    check_cfl(state.grid, dt_max)
    snaps = [state.copy()]
    next_snap = snapshot_every if snapshot_every else np.inf
    first = True
    while state.time < t_end * (1.0 - 1e-14):
        h = min(dt_max, t_end - state.time)
        if snapshot_every:
            h = min(h, next_snap - state.time)
        state = step(state, pot, band, h, scheme, warn=first)
        first = False
        if callback is not None:
            callback(state)
        if snapshot_every and state.time >= next_snap * (1.0 - 1e-14):
            snaps.append(state.copy())
            next_snap += snapshot_every
    if snaps[-1].time != state.time:
        snaps.append(state.copy())
    return state, snaps


# --- collimation regimes ------------------------------------------------------

class CausticError(PositivityError):
    """Direction field lost smoothness (crossing characteristics)."""

    def __init__(self, message, cell=None, time=None, partial=None):
        super().__init__(message, cell=cell, time=time)
        self.partial = partial


CAUSTIC_NORM = 0.5


def _upwind_gradient(w, vel, grid):
    """Upwinded (vel . grad) w for a stacked field ``w`` of shape (k, ny, nx)."""
    out = np.zeros_like(w)
    axes = [(-1, grid.dx, vel[0])] + ([(-2, grid.dy, vel[1])] if grid.dim == 2 else [])
    for axis, h, v in axes:
        wp = _pad(w, 1, grid, axis)
        sl = [slice(None)] * w.ndim
        back = (w - wp[_sl(sl, axis, slice(0, -2))]) / h
        fwd = (wp[_sl(sl, axis, slice(2, None))] - w) / h
        out += np.maximum(v, 0.0) * back + np.minimum(v, 0.0) * fwd
    return out


def _upwind_continuity(n, vel, grid):
    rhs = np.zeros_like(n)
    axes = [(-1, grid.dx, vel[0])] + ([(-2, grid.dy, vel[1])] if grid.dim == 2 else [])
    for axis, h, v in axes:
        npd, vp = _pad(n[None], 1, grid, axis)[0], _pad(v[None], 1, grid, axis)[0]
        sl = [slice(None)] * n.ndim
        nl, nr = npd[_sl(sl, axis, slice(0, -1))], npd[_sl(sl, axis, slice(1, None))]
        vf = 0.5 * (vp[_sl(sl, axis, slice(0, -1))] + vp[_sl(sl, axis, slice(1, None))])
        flux = np.maximum(vf, 0.0) * nl + np.minimum(vf, 0.0) * nr
        rhs -= (flux[_sl(sl, axis, slice(1, None))] - flux[_sl(sl, axis, slice(0, -1))]) / h
    return rhs


def _collimation(state, pot, band, t_end, dt, with_force):
    grid = state.grid
    dt = 0.45 * grid.min_spacing if dt is None else dt
    check_cfl(grid, dt)
    f = state.fields[band.species]
    speed = f.speed
    if np.any(np.abs(speed - 1.0) > 1e-12):
        raise ConfigError("collimation runs need |u| = 1 in every cell")
    n, e = f.n.copy(), f.e.copy()
    u = np.stack([f.ux, f.uy])
    gx, gy = pot.grad
    sig = band.sign
    t = state.time
    while t < t_end * (1.0 - 1e-14):
        h = min(dt, t_end - t)
        du = -_upwind_gradient(u, u, grid)
        de = -_upwind_gradient(e[None], u, grid)[0] - sig * (u[0] * gx + u[1] * gy)
        if with_force:
            px, py = -u[1], u[0]
            tr = px * gx + py * gy
            du[0] -= sig * 2.0 / e * px * tr
            du[1] -= sig * 2.0 / e * py * tr
        n = n + h * _upwind_continuity(n, u, grid)
        u = u + h * du
        e = e + h * de
        t += h
        norm = np.hypot(u[0], u[1])
        bad = ~np.isfinite(norm) | (norm < CAUSTIC_NORM) | ~np.isfinite(e) | (e <= 0)
        if bad.any():
            cell = _where(bad)
            partial = _collimated_state(state, band, n, u, e, t)
            raise CausticError(f"direction field broke down at cell {cell}, t = {t:.6g}",
                               cell=cell, time=t, partial=partial)
        u = u / norm
    return _collimated_state(state, band, n, u, e, t)


def _collimated_state(state, band, n, u, e, t):
    fields = dict(state.fields)
    fields[band.species] = BandFields(n, u[0], u[1], e)
    out = FieldState.__new__(FieldState)
    out.grid, out.fields, out.time, out.warm = state.grid, fields, t, {}
    return out


def run_collimation_mb(state, pot, band, t_end, dt=None):
    """Collimated Maxwell-Boltzmann system: direction field bent by the
    transverse force with strength 2/e, energy advected with the u.grad V source."""
    return _collimation(state, pot, band, t_end, dt, with_force=True)


def run_collimation_degenerate(state, pot, band, t_end, dt=None):
    """Collimated degenerate system: pressureless u, V enters only through e."""
    return _collimation(state, pot, band, t_end, dt, with_force=False)


def trace_ray(pot, start, angle, length, band=BandConfig(), e0=1.0, energy="frozen",
              rtol=1e-10, atol=1e-12):
    """Geometrical-optics ray through the index N = exp(-/+ 2 V / e).

    ``energy="frozen"`` keeps e = e0 (the constant-index optics model);
    ``energy="transported"`` lets e follow de/ds = -/+ t . grad V along the
    ray, which is the characteristic of the collimated MB system.  Returns
    the ``solve_ivp`` solution with state (x, y, tx, ty, e).
    """
    sig = band.sign

    def rhs(_, z):
        x, y, tx, ty, e = z
        gx, gy = pot.gradient_at(x, y)
        gx, gy = float(gx), float(gy)
        ee = e if energy == "transported" else e0
        tr = -ty * gx + tx * gy
        dtx = -sig * 2.0 / ee * (-ty) * tr
        dty = -sig * 2.0 / ee * tx * tr
        de = -sig * (tx * gx + ty * gy) if energy == "transported" else 0.0
        return [tx, ty, dtx, dty, de]

    z0 = [start[0], start[1], math.cos(angle), math.sin(angle), e0]
    return integrate.solve_ivp(rhs, (0.0, length), z0, method="DOP853", rtol=rtol, atol=atol,
                               dense_output=True)


# --- hyperbolicity ------------------------------------------------------------

@dataclass
class EigenReport:
    eigenvalues: np.ndarray
    max_imag: float
    max_speed: float
    real: bool
    bounded: bool
    jacobian: np.ndarray


_FD_STENCIL = (np.array([-2.0, -1.0, 1.0, 2.0]), np.array([1.0, -8.0, 8.0, -1.0]) / 12.0)


def _fd_jacobian(fun, x0, steps):
    cols = []
    for k in range(x0.size):
        acc = 0.0
        for off, wgt in zip(*_FD_STENCIL):
            x = x0.copy()
            x[k] += off * steps[k]
            acc = acc + wgt * fun(x)
        cols.append(acc / steps[k])
    return np.stack(cols, axis=1)


def _direction_flux(regime, direction):
    def from_conserved(u):
        n = u[0]
        fx, fy, _ = _fluxes(regime, np.array([n]), np.array([u[1] / n]), np.array([u[2] / n]),
                            np.array([u[3] / n]))
        return direction[0] * fx[:, 0] + direction[1] * fy[:, 0]
    return from_conserved


def _exact_maps(direction):
    from .closure import Multipliers, closure_exact, multipliers_to_moments

    def moments(lam):
        m = Multipliers(lam[0], lam[1:3], lam[3])
        st = multipliers_to_moments(m)
        return st, m

    def cons(lam):
        st, _ = moments(lam)
        return np.array([st.n, st.n * st.u[0], st.n * st.u[1], st.n * st.e])

    def flux(lam):
        st, m = moments(lam)
        cl = closure_exact(st, m)
        fvec = np.array([st.n * st.u[0], st.n * st.u[1]])
        pd = cl.p @ direction
        return np.array([fvec @ direction, pd[0], pd[1], cl.s_flux @ direction])

    return cons, flux


def hyperbolicity_probe(sample, band=BandConfig(), regime=RegimeTag.EXACT, direction=(1.0, 0.0)):
    """Eigenvalues of the directional flux Jacobian dF/dU at ``sample``.

    The exact closure is differentiated through its multipliers (A, B, T),
    where the map is explicit; the asymptotic closures are differentiated
    directly in the conservative variables.  Sources do not enter the
    principal part, so ``band`` only matters for bookkeeping.
    """
    del band
    regime = RegimeTag.parse(regime)
    direction = np.asarray(direction, dtype=float)
    direction = direction / np.hypot(*direction)
    if sample.speed >= 1.0:
        raise CollimationError("probe needs |u| < 1")
    if regime is RegimeTag.EXACT:
        from .closure import moments_to_multipliers
        m = moments_to_multipliers(sample)
        lam = np.array([m.a, m.b_vec[0], m.b_vec[1], m.temp])
        cons, flux = _exact_maps(direction)
        steps = 1e-3 * np.array([max(1.0, abs(lam[0])), max(1.0, abs(m.b)), max(1.0, abs(m.b)),
                                 lam[3]])
        du = _fd_jacobian(cons, lam, steps)
        df = _fd_jacobian(flux, lam, steps)
        jac = np.linalg.solve(du.T, df.T).T
    else:
        u0 = sample.as_array()
        u0 = np.array([u0[0], u0[0] * u0[1], u0[0] * u0[2], u0[0] * u0[3]])
        h = 1e-4 * u0[0] * (1.0 - sample.speed)
        steps = np.array([h, h, h, 1e-4 * u0[3]])
        jac = _fd_jacobian(_direction_flux(regime, direction), u0, steps)
    ev = np.linalg.eigvals(jac)
    max_imag = float(np.max(np.abs(ev.imag)))
    max_speed = float(np.max(np.abs(ev)))
    return EigenReport(ev, max_imag, max_speed, max_imag <= IMAG_TOL,
                       max_speed <= 1.0 + 1e-6, jac)


def uniform_state(grid, n, u, e, species="electron_upper"):
    shape = grid.shape
    f = BandFields(np.full(shape, float(n)), np.full(shape, float(u[0])),
                   np.full(shape, float(u[1])), np.full(shape, float(e)))
    return FieldState(grid, {species: f})


__all__ = ["BandFields", "FieldState", "Scheme", "flux_and_sources", "step", "run_hydro",
           "run_collimation_mb", "run_collimation_degenerate", "trace_ray", "CausticError",
           "hyperbolicity_probe", "EigenReport", "check_cfl", "uniform_state"]
