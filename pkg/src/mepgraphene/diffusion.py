"""Drift-diffusion limit of the relaxed moment system.

    dn/dt = (tau0 / 2) div( grad n  +/-  mu(n) grad V )

with mobility mu(n) = (n_T / T) phi_1(phi_2^{-1}(n / n_T)) (general Fermi),
n / T (Maxwell-Boltzmann) or sqrt(n / pi) (degenerate).  Divergence-form
central differences with face mobilities from the arithmetic mean of n;
non-periodic axes are no-flux walls.
"""
from dataclasses import dataclass, field
import math

import numpy as np
from scipy import sparse
from scipy.sparse import linalg as sparse_linalg

from .closure import RegimeTag, thermal_density
from .errors import ConfigError, ConvergenceError, PositivityError
from .fields import BandConfig, Grid, PotentialField, total
from .special_fns import fermi_integral, fermi_integral_inverse

VARIANTS = ("general_fermi", "maxwell_boltzmann", "degenerate")
EXPLICIT_SAFETY = 0.4


@dataclass(frozen=True)
class DiffusionModel:
    variant: str = "maxwell_boltzmann"
    tau0: float = 1.0
    temp: float = 1.0

    def __post_init__(self):
        errs = []
        if self.variant not in VARIANTS:
            errs.append(f"diffusion variant {self.variant!r} not in {VARIANTS}")
        if not self.tau0 > 0:
            errs.append("tau0 must be positive")
        if self.variant != "degenerate" and not self.temp > 0:
            errs.append("temperature must be positive for this variant")
        if errs:
            raise ConfigError(errs)

    @property
    def coefficient(self):
        return 0.5 * self.tau0

    def mobility(self, n):
        """mu(n) and d mu / dn."""
        n = np.asarray(n, dtype=float)
        if self.variant == "maxwell_boltzmann":
            return n / self.temp, np.full(n.shape, 1.0 / self.temp)
        if self.variant == "degenerate":
            root = np.sqrt(np.maximum(n, 0.0) / math.pi)
            with np.errstate(divide="ignore"):
                d = np.where(n > 0, 0.5 / (math.pi * np.where(root > 0, root, 1.0)), 0.0)
            return root, d
        n_t = float(thermal_density(self.temp))
        mu = np.zeros(n.shape)
        dmu = np.zeros(n.shape)
        pos = n > 0
        if np.any(pos):
            a = np.atleast_1d(fermi_integral_inverse(2, n[pos] / n_t))
            p0, p1 = fermi_integral(0, a), fermi_integral(1, a)
            mu[pos] = n_t / self.temp * p1
            dmu[pos] = p0 / (self.temp * p1)
        return mu, dmu


def _axes(grid):
    return [(-1, grid.dx, grid.boundary_x)] + (
        [(-2, grid.dy, grid.boundary_y)] if grid.dim == 2 else [])


def _face_pairs(arr, axis, periodic):
    """Values left/right of every interior (or periodic) face along ``axis``."""
    if periodic:
        return arr, np.roll(arr, -1, axis)
    sl_l = [slice(None)] * arr.ndim
    sl_r = [slice(None)] * arr.ndim
    sl_l[axis] = slice(0, -1)
    sl_r[axis] = slice(1, None)
    return arr[tuple(sl_l)], arr[tuple(sl_r)]


def face_fluxes(n, pot, model, band=BandConfig()):
    """Particle flux J = -(tau0/2)(dn + s mu dV) through every face, per axis."""
    out = []
    for axis, h, bc in _axes(pot.grid):
        periodic = bc == "periodic"
        nl, nr = _face_pairs(n, axis, periodic)
        vl, vr = _face_pairs(pot.values, axis, periodic)
        mu, _ = model.mobility(0.5 * (nl + nr))
        dv = vr - vl
        if periodic and pot.kind == "uniform_slope":
            # the potential itself wraps with a jump; its slope does not
            dv = pot.grad[0 if axis == -1 else 1] * h
        j = -model.coefficient * ((nr - nl) + band.sign * mu * dv) / h
        out.append(j)
    return out


def _divergence(fluxes, grid):
    rhs = np.zeros(grid.shape)
    for (axis, h, bc), j in zip(_axes(grid), fluxes):
        if bc == "periodic":
            rhs -= (j - np.roll(j, 1, axis)) / h
        else:
            pad = [(0, 0)] * j.ndim
            pad[axis] = (1, 1)
            jp = np.pad(j, pad)            # zero flux through the walls
            sl_l = [slice(None)] * j.ndim
            sl_r = [slice(None)] * j.ndim
            sl_l[axis] = slice(0, -1)
            sl_r[axis] = slice(1, None)
            rhs -= (jp[tuple(sl_r)] - jp[tuple(sl_l)]) / h
    return rhs


def rate(n, pot, model, band=BandConfig()):
    return _divergence(face_fluxes(n, pot, model, band), pot.grid)


def max_explicit_dt(grid, model):
    return EXPLICIT_SAFETY * grid.min_spacing ** 2 / model.tau0


def _jacobian(n, pot, model, band):
    """Sparse d(rate)/dn for the current discretisation."""
    grid = pot.grid
    idx = np.arange(n.size).reshape(grid.shape)
    rows, cols, vals = [], [], []
    for axis, h, bc in _axes(grid):
        periodic = bc == "periodic"
        il, ir = _face_pairs(idx, axis, periodic)
        nl, nr = _face_pairs(n, axis, periodic)
        vl, vr = _face_pairs(pot.values, axis, periodic)
        dv = vr - vl
        if periodic and pot.kind == "uniform_slope":
            dv = pot.grad[0 if axis == -1 else 1] * h
        _, dmu = model.mobility(0.5 * (nl + nr))
        c = model.coefficient / h
        # J = -c (nr - nl + s mu dv); dJ/dnl and dJ/dnr
        djl = -c * (-1.0 + band.sign * 0.5 * dmu * dv)
        djr = -c * (1.0 + band.sign * 0.5 * dmu * dv)
        # the face flux leaves the left cell and enters the right one
        for target, sgn in ((il, -1.0 / h), (ir, 1.0 / h)):
            rows += [target.ravel(), target.ravel()]
            cols += [il.ravel(), ir.ravel()]
            vals += [sgn * djl.ravel(), sgn * djr.ravel()]
    return sparse.csr_matrix((np.concatenate(vals), (np.concatenate(rows), np.concatenate(cols))),
                             shape=(n.size, n.size))


def _newton(residual, jac, n0, tol, maxit, what):
    n = n0.copy()
    res = residual(n)
    norm = np.max(np.abs(res))
    for _ in range(maxit):
        if norm <= tol:
            return n
        delta = sparse_linalg.spsolve(jac(n).tocsc(), -res.ravel()).reshape(n.shape)
        lam = 1.0
        while lam > 1e-6:
            trial = n + lam * delta
            if np.all(trial > 0):
                r_new = residual(trial)
                n_new = np.max(np.abs(r_new))
                if n_new < norm * (1.0 - 1e-4 * lam) or n_new <= tol:
                    n, res, norm = trial, r_new, n_new
                    break
            lam *= 0.5
        else:
            raise ConvergenceError(f"{what}: line search stalled", residual=float(norm))
    if norm <= tol:
        return n
    raise ConvergenceError(f"{what}: Newton did not converge", residual=float(norm))


def diffusion_step(n, pot, model, dt, band=BandConfig(), implicit=False, tol=1e-12, maxit=50):
    """One explicit (forward Euler) or backward-Euler step of the drift-diffusion equation."""
    n = np.asarray(n, dtype=float).reshape(pot.grid.shape)
    if not implicit:
        limit = max_explicit_dt(pot.grid, model)
        if dt > limit * (1.0 + 1e-12):
            raise ConfigError(f"explicit diffusion step dt = {dt} exceeds {limit}")
        out = n + dt * rate(n, pot, model, band)
    else:
        scale = max(float(np.max(np.abs(n))), 1e-300)

        def residual(m):
            return (m - n - dt * rate(m, pot, model, band)) / scale

        def jac(m):
            eye = sparse.identity(m.size, format="csr")
            return (eye - dt * _jacobian(m, pot, model, band)) / scale

        out = _newton(residual, jac, n, tol, maxit, "backward Euler step")
    if np.any(out <= 0) or not np.all(np.isfinite(out)):
        cell = tuple(int(i) for i in np.argwhere(~(out > 0))[0])
        raise PositivityError(f"diffusion update produced n <= 0 at cell {cell}", cell=cell)
    return out


def run_diffusion(n, pot, model, t_end, band=BandConfig(), dt=None, implicit=False,
                  snapshot_every=None):
    """Integrate to ``t_end``; returns (final n, list of (time, n) snapshots)."""
    n = np.asarray(n, dtype=float).reshape(pot.grid.shape)
    if dt is None:
        dt = max_explicit_dt(pot.grid, model)
    t = 0.0
    snaps = [(0.0, n.copy())]
    next_snap = snapshot_every if snapshot_every else np.inf
    while t < t_end * (1.0 - 1e-14):
        h = min(dt, t_end - t, (next_snap - t) if snapshot_every else np.inf)
        n = diffusion_step(n, pot, model, h, band, implicit)
        t += h
        if snapshot_every and t >= next_snap * (1.0 - 1e-14):
            snaps.append((t, n.copy()))
            next_snap += snapshot_every
    if snaps[-1][0] != t:
        snaps.append((t, n.copy()))
    return n, snaps


def steady_state(n0, pot, model, band=BandConfig(), tol=1e-13, maxit=100):
    """Zero-flux state with the mass of ``n0``, by Newton on rate(n) = 0.

    One row of the (singular) conservative system is replaced by the mass
    constraint sum(n) = sum(n0).
    """
    n0 = np.asarray(n0, dtype=float).reshape(pot.grid.shape)
    mass = math.fsum(n0.ravel())
    scale = float(np.max(n0))

    def residual(m):
        r = rate(m, pot, model, band).ravel() * pot.grid.min_spacing ** 2 / scale
        r[0] = (math.fsum(m.ravel()) - mass) / (scale * m.size)
        return r.reshape(m.shape)

    def jac(m):
        j = (_jacobian(m, pot, model, band) * (pot.grid.min_spacing ** 2 / scale)).tolil()
        j[0, :] = np.full(m.size, 1.0 / (scale * m.size))
        return j.tocsr()

    return _newton(residual, jac, n0, tol, maxit, "steady state")


def max_face_flux(n, pot, model, band=BandConfig()):
    return max(float(np.max(np.abs(j))) for j in face_fluxes(n, pot, model, band))


# --- relaxation-limit study --------------------------------------------------

@dataclass
class StudyScenario:
    """Shared setup of the relaxed hyperbolic runs and the diffusion reference.

    ``t_star`` is the final time in the diffusive time variable t* = tau t,
    so each hyperbolic run with relaxation time tau integrates to t*/tau
    while the (tau-independent) reference solves the limit equation with
    tau0 = 1 up to t*.
    """

    grid: Grid
    n0: np.ndarray
    potential: PotentialField
    temp: float = 1.0
    t_star: float = 0.05
    band: BandConfig = field(default_factory=BandConfig)
    order: int = 2
    cfl: float = 0.45


@dataclass
class StudyReport:
    taus: list
    distances: list
    rates: list
    reference: np.ndarray
    profiles: list
    complete: bool = True
    error: str = None

    @property
    def monotone(self):
        d = self.distances
        return all(b < a for a, b in zip(d, d[1:]))

    def rows(self):
        out = []
        for k, (tau, d) in enumerate(zip(self.taus, self.distances)):
            out.append((tau, d, self.rates[k - 1] if k > 0 else float("nan")))
        return out


def _l1(grid, a, b):
    return total(grid, np.abs(a - b))


def relaxation_limit_study(scenario, tau_list, regime=RegimeTag.MAXWELL_BOLTZMANN):
    """L1 distance between relaxed hyperbolic and drift-diffusion n at t*.

    The hyperbolic runs use the Maxwell-Boltzmann closure with the
    isothermal energy e = 2T and start at rest; ``tau_list`` must be
    decreasing.  A failing sub-run stops the study and returns the partial
    report with ``complete = False``.
    """
    from .hydro import BandFields, FieldState, Scheme, run_hydro

    regime = RegimeTag.parse(regime)
    if regime is not RegimeTag.MAXWELL_BOLTZMANN:
        raise ConfigError("relaxation study is defined for the maxwell_boltzmann regime")
    taus = [float(t) for t in tau_list]
    if any(b >= a for a, b in zip(taus, taus[1:])):
        raise ConfigError("tau_list must be strictly decreasing")
    grid, n0 = scenario.grid, np.asarray(scenario.n0, dtype=float).reshape(scenario.grid.shape)
    model = DiffusionModel("maxwell_boltzmann", 1.0, scenario.temp)
    reference, _ = run_diffusion(n0, scenario.potential, model, scenario.t_star, scenario.band)
    report = StudyReport([], [], [], reference, [])
    scheme = Scheme(order=scenario.order, cfl=scenario.cfl, regime=regime, isothermal=True)
    for tau in taus:
        band = BandConfig(scenario.band.species, tau)
        zero = np.zeros(grid.shape)
        state = FieldState(grid, {band.species: BandFields(n0.copy(), zero, zero.copy(),
                                                           np.full(grid.shape, 2.0 * scenario.temp))})
        try:
            final, _ = run_hydro(state, scenario.potential, band, scenario.t_star / tau, scheme)
        except (ArithmeticError, ValueError) as err:
            report.complete, report.error = False, f"tau = {tau}: {err}"
            return report
        n_h = final.fields[band.species].n
        report.taus.append(tau)
        report.distances.append(_l1(grid, n_h, reference))
        report.profiles.append(n_h)
        if len(report.distances) > 1:
            d0, d1 = report.distances[-2:]
            report.rates.append(math.log(d0 / d1) / math.log(report.taus[-2] / tau))
    return report


__all__ = ["DiffusionModel", "diffusion_step", "run_diffusion", "steady_state", "rate",
           "face_fluxes", "max_face_flux", "max_explicit_dt", "StudyScenario", "StudyReport",
           "relaxation_limit_study", "VARIANTS"]
