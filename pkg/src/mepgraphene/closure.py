"""Maximum-entropy closure for Dirac-cone carriers.

Scaled units throughout: c = hbar = k_B = 1, so the thermal density is
n_T = T^2 / (2 pi) and the MEP state is

    f(p) = 1 / (exp(|p| / T - nu(p) . B - A) + 1).

The moment map (A, B, T) -> (n, u, e) is explicit in the angular-Fermi table;
its inverse eliminates T analytically and solves a 2x2 system in (A, |B|) by
damped Newton.
"""
from dataclasses import dataclass, field
import enum
import math

import numpy as np
from scipy import special

from . import kernels
from ._quadrules import DEG_W, DEG_X
from .errors import CollimationError, ConvergenceError, DomainError
from .special_fns import (
    PSI_MAX, bessel_ratio_inverse, degenerate_table, fermi_integral,
    fermi_integral_inverse,
)

ISOTROPIC_U = 1e-7
NEWTON_TOL = 1e-12
NEWTON_MAXIT = 50
NEWTON_RESTARTS = 5
PSI_EPS = 1e-9


class RegimeTag(enum.Enum):
    EXACT = "exact"
    MAXWELL_BOLTZMANN = "maxwell_boltzmann"
    DEGENERATE = "degenerate"
    DIFFUSIVE = "diffusive"

    @classmethod
    def parse(cls, value):
        if isinstance(value, cls):
            return value
        key = str(value).strip().lower()
        aliases = {"mb": "maxwell_boltzmann", "deg": "degenerate", "diff": "diffusive"}
        key = aliases.get(key, key)
        for tag in cls:
            if tag.value == key or tag.name.lower() == key:
                return tag
        raise ValueError(f"unknown regime {value!r}; valid: {[t.value for t in cls]}")


@dataclass
class MomentState:
    n: float
    u: np.ndarray
    e: float

    def __post_init__(self):
        self.u = np.asarray(self.u, dtype=float).reshape(2)
        if not self.n >= 0:
            raise DomainError(f"density must be nonnegative, got {self.n}")
        if not self.e > 0:
            raise DomainError(f"energy per particle must be positive, got {self.e}")
        if np.hypot(*self.u) > 1.0:
            raise CollimationError(f"|u| = {np.hypot(*self.u)} exceeds 1")

    @property
    def speed(self):
        return float(np.hypot(*self.u))

    def as_array(self):
        return np.array([self.n, self.u[0], self.u[1], self.e])


@dataclass
class Multipliers:
    a: float
    b_vec: np.ndarray
    temp: float

    def __post_init__(self):
        self.b_vec = np.asarray(self.b_vec, dtype=float).reshape(2)
        if not self.temp > 0:
            raise DomainError(f"temperature must be positive, got {self.temp}")

    @property
    def b(self):
        return float(np.hypot(*self.b_vec))


@dataclass
class ClosureTensors:
    p: np.ndarray
    q: np.ndarray
    s_flux: np.ndarray
    regime: RegimeTag = field(default=RegimeTag.EXACT)

    def eigenvalues(self, which="p"):
        return np.linalg.eigvalsh(getattr(self, which))


def thermal_density(temp):
    return np.asarray(temp) ** 2 / (2.0 * math.pi)


def _unit(vec):
    """Direction and its 90-degree rotation; x axis when vec == 0."""
    norm = math.hypot(vec[0], vec[1])
    if norm == 0.0:
        d = np.array([1.0, 0.0])
    else:
        d = np.asarray(vec, dtype=float) / norm
    return d, np.array([-d[1], d[0]])


def _dyads(coef_par, coef_perp, d, dp):
    return coef_par * np.outer(d, d) + coef_perp * np.outer(dp, dp)


# --- forward map ------------------------------------------------------------

def multipliers_to_moments(m):
    t = kernels.angular_table(m.a, m.b)
    n_t = thermal_density(m.temp)
    n = n_t * t[2, 0]
    d, _ = _unit(m.b_vec)
    speed = t[2, 1] / t[2, 0] if m.b > 0 else 0.0
    e = 2.0 * m.temp * t[3, 0] / t[2, 0]
    return MomentState(float(n), speed * d, float(e))


def closure_from_table(t, n, temp, d, dp, isotropic=False):
    """Closure tensors from an angular table at (A, |B|); shared by all exact paths."""
    i20 = t[2, 0]
    if isotropic:
        p = 0.5 * n * np.eye(2)
        q = (n / temp) * 0.5 * t[1, 0] / i20 * np.eye(2)
    else:
        p = n * _dyads(0.5 * (i20 + t[2, 2]) / i20, 0.5 * (i20 - t[2, 2]) / i20, d, dp)
        q = (n / temp) * _dyads(0.5 * (t[1, 0] - t[1, 2]) / i20,
                                0.5 * (t[1, 0] + t[1, 2]) / i20, d, dp)
    s = 2.0 * temp * n * t[3, 1] / i20 * d
    return p, q, s


def closure_exact(state, m):
    """P, Q, S of the MEP state ``m`` whose moments are ``state``."""
    t = kernels.angular_table(m.a, m.b)
    d, dp = _unit(m.b_vec if m.b > 0 else state.u)
    iso = state.speed < ISOTROPIC_U
    p, q, s = closure_from_table(t, state.n, m.temp, d, dp, isotropic=iso)
    if m.b == 0.0:
        s = np.zeros(2)
    return ClosureTensors(p, q, s, RegimeTag.EXACT)


def mep_distribution(m, p):
    """Occupation f(p) of the MEP state for momentum ``p`` (nonzero)."""
    p = np.asarray(p, dtype=float)
    r = np.hypot(p[..., 0], p[..., 1])
    if np.any(r == 0):
        raise DomainError("MEP distribution direction undefined at p = 0")
    nu_b = (p[..., 0] * m.b_vec[0] + p[..., 1] * m.b_vec[1]) / r
    x = r / m.temp - nu_b - m.a
    return special.expit(-x)


# --- inverse map ------------------------------------------------------------

def energy_ratio(n, e):
    """Target of the energy equation once T is eliminated: e / sqrt(2 pi n)."""
    return np.asarray(e) / np.sqrt(2.0 * math.pi * np.asarray(n))


def _mb_guess(u_t, g_t):
    b0 = bessel_ratio_inverse(np.minimum(u_t, 1.0 - 1e-15))
    log_i0 = np.log(special.ive(0, b0)) + b0
    a0 = -2.0 * (np.log(0.5 * g_t) + 0.5 * log_i0)
    return a0, b0


_RAY_R = np.logspace(-1.0, 3.7, 24)


def initial_guess(u_t, g_t):
    """Best of the MB closed-form guess and a coarse scan along the degenerate ray."""
    u_t = np.atleast_1d(np.asarray(u_t, dtype=float))
    g_t = np.atleast_1d(np.asarray(g_t, dtype=float))
    a_mb, b_mb = _mb_guess(u_t, g_t)
    psi = psi_from_u(np.minimum(u_t, 1.0 - 1e-12))
    cand_a = [a_mb[:, None], _RAY_R[None, :] * np.cos(psi)[:, None]]
    cand_b = [b_mb[:, None], _RAY_R[None, :] * np.sin(psi)[:, None]]
    ca = np.concatenate(cand_a, axis=1)
    cb = np.concatenate(cand_b, axis=1)
    ca = np.clip(ca, -700.0, 1e5)
    m, k = ca.shape
    t = kernels.angular_table_batch(ca.ravel(), cb.ravel()).reshape(m, k, 4, 4)
    with np.errstate(divide="ignore", invalid="ignore"):
        h1 = np.minimum(t[..., 2, 1] / t[..., 2, 0], 1.0 - 1e-16)
        r1 = np.arctanh(h1) - np.arctanh(u_t)[:, None]
        r2 = np.log(2.0 * t[..., 3, 0]) - 1.5 * np.log(t[..., 2, 0]) - np.log(g_t)[:, None]
        score = np.where(np.isfinite(r1) & np.isfinite(r2), np.maximum(abs(r1), abs(r2)), np.inf)
    best = np.argmin(score, axis=1)
    rows = np.arange(m)
    return ca[rows, best], cb[rows, best]


def realizability_floor(speed):
    """Smallest e / sqrt(2 pi n) of any Fermi-Dirac state with mean direction |u|.

    It is attained by the zero-temperature (degenerate) states, for which
    the ratio is 2 F_0^3 / (F_0^2)^{3/2} at psi(|u|).
    """
    speed = np.atleast_1d(np.asarray(speed, dtype=float))
    f = degenerate_table(psi_from_u(np.minimum(speed, 1.0 - 1e-12)))
    return 2.0 * f[:, 3, 0] / f[:, 2, 0] ** 1.5


def solve_multipliers(n, speed, e, a0=None, b0=None, tol=NEWTON_TOL, seed=0):
    """Vectorised inverse map: arrays (n, |u|, e) -> arrays (A, |B|, T).

    ``a0``/``b0`` warm-start the Newton iteration; cells that fail are
    retried from the cold guess and then from randomised perturbations.
    Raises :class:`ConvergenceError` (with ``cell``) if any cell fails.
    """
    n = np.atleast_1d(np.asarray(n, dtype=float))
    speed = np.atleast_1d(np.asarray(speed, dtype=float))
    e = np.atleast_1d(np.asarray(e, dtype=float))
    if np.any(speed >= 1.0):
        cell = int(np.flatnonzero(speed >= 1.0)[0])
        raise CollimationError(f"|u| = {speed[cell]} >= 1 at cell {cell}")
    if np.any(~(n > 0)) or np.any(~(e > 0)):
        raise DomainError("moment inversion needs n > 0 and e > 0")
    g_t = energy_ratio(n, e)
    if a0 is None or b0 is None:
        a0, b0 = initial_guess(speed, g_t)
    a, b, res, _ = kernels.newton_ab_batch(speed, g_t, a0, b0, tol, NEWTON_MAXIT)
    bad = ~(res <= tol)
    if bad.any():
        idx = np.flatnonzero(bad)
        ga, gb = initial_guess(speed[idx], g_t[idx])
        rng = np.random.default_rng(seed)
        for attempt in range(NEWTON_RESTARTS + 1):
            if attempt > 0:
                ga = ga + rng.normal(0.0, 1.0, idx.size) * (1.0 + 0.1 * np.abs(ga))
                gb = np.abs(gb + rng.normal(0.0, 1.0, idx.size) * (1.0 + 0.1 * gb))
            ra, rb, rr, _ = kernels.newton_ab_batch(speed[idx], g_t[idx], ga, gb, tol,
                                                    NEWTON_MAXIT)
            ok = rr <= tol
            a[idx[ok]], b[idx[ok]], res[idx[ok]] = ra[ok], rb[ok], rr[ok]
            keep = ~ok
            better = rr < res[idx]
            res[idx[better & keep]] = rr[better & keep]
            idx, ga, gb = idx[keep], ga[keep], gb[keep]
            if idx.size == 0:
                break
        if idx.size:
            cell = int(idx[0])
            floor = float(realizability_floor(speed[cell])[0])
            if g_t[cell] <= floor:
                raise DomainError(
                    f"moments not realizable at cell {cell}: e/sqrt(2 pi n) = {g_t[cell]:.6g} "
                    f"is at or below the zero-temperature value {floor:.6g} for "
                    f"|u| = {speed[cell]:.6g}")
            raise ConvergenceError(
                f"moment inversion failed at cell {cell} (n={n[cell]}, |u|={speed[cell]}, "
                f"e={e[cell]}); last residual {res[cell]:.3e}",
                residual=float(res[cell]), cell=cell)
    i20 = kernels.angular_table_batch(a, b)[:, 2, 0]
    temp = np.sqrt(2.0 * math.pi * n / i20)
    return a, b, temp


def moments_to_multipliers(state, guess=None):
    """Multipliers (A, B, T) reproducing ``state``; B is parallel to u."""
    if state.speed >= 1.0:
        raise CollimationError("|u| = 1 lies on the collimation boundary")
    a0 = b0 = None
    if guess is not None:
        a0, b0 = np.array([guess.a]), np.array([guess.b])
    a, b, temp = solve_multipliers(state.n, state.speed, state.e, a0, b0)
    d, _ = _unit(state.u)
    b_vec = b[0] * d if state.speed > 0 else np.zeros(2)
    return Multipliers(float(a[0]), b_vec, float(temp[0]))


# --- asymptotic closures ----------------------------------------------------

def mb_coefficient(speed):
    """X(|u|) = (I_0(B) + I_2(B)) / (2 I_0(B)) with B = (I_1/I_0)^{-1}(|u|)."""
    speed = np.asarray(speed, dtype=float)
    b = bessel_ratio_inverse(speed)
    with np.errstate(invalid="ignore"):
        x = 0.5 * (1.0 + special.ive(2, b) / special.ive(0, b))
    return np.where(speed == 0, 0.5, x)


def closure_mb(state):
    n, e = state.n, state.e
    d, dp = _unit(state.u)
    x = float(mb_coefficient(min(state.speed, 1.0 - 1e-16)))
    p = n * _dyads(x, 1.0 - x, d, dp)
    q = (2.0 / e) * n * _dyads(1.0 - x, x, d, dp)
    return ClosureTensors(p, q, n * e * state.u, RegimeTag.MAXWELL_BOLTZMANN)


def _degenerate_speed(psi):
    """F_1^2(psi) / F_0^2(psi) on the degenerate quadrature rule."""
    psi = np.asarray(psi, dtype=float)
    cot = np.cos(psi) / np.sin(np.where(psi > 0, psi, 1.0))
    cmax = np.where(psi <= 0.25 * np.pi, np.pi, np.arccos(np.clip(-cot, -1.0, 1.0)))
    theta = 0.5 * cmax[..., None] * (DEG_X + 1.0)
    base = np.maximum(np.cos(psi)[..., None] + np.sin(psi)[..., None] * np.cos(theta), 0.0)
    w = DEG_W * base * base
    return np.sum(w * np.cos(theta), axis=-1) / np.sum(w, axis=-1)


_PSI_GRID = np.linspace(0.0, PSI_MAX - PSI_EPS, 2049)
_U_GRID = None


def psi_from_u(speed):
    """Invert |u| = F_1^2(psi) / F_0^2(psi) by bisection inside a tabulated bracket."""
    global _U_GRID
    speed = np.atleast_1d(np.asarray(speed, dtype=float))
    if np.any((speed < 0) | (speed >= 1)):
        raise DomainError("psi_from_u needs 0 <= |u| < 1")
    if _U_GRID is None:
        _U_GRID = np.maximum.accumulate(_degenerate_speed(_PSI_GRID))
    k = np.clip(np.searchsorted(_U_GRID, speed) - 1, 0, _PSI_GRID.size - 2)
    lo, hi = _PSI_GRID[k], _PSI_GRID[k + 1]
    for _ in range(44):
        mid = 0.5 * (lo + hi)
        above = _degenerate_speed(mid) > speed
        hi = np.where(above, mid, hi)
        lo = np.where(above, lo, mid)
    return 0.5 * (lo + hi)


def degenerate_coefficients(speed):
    """(Y, Z, Z_perp, W) of the degenerate closure as arrays over |u|."""
    speed = np.asarray(speed, dtype=float)
    psi = psi_from_u(speed.ravel())
    f = degenerate_table(psi)
    f20 = f[:, 2, 0]
    root = np.sqrt(2.0 * f20)
    y = 0.5 * (f20 + f[:, 2, 2]) / f20
    z = 0.5 * (f[:, 1, 0] - f[:, 1, 2]) / root
    zp = 0.5 * (f[:, 1, 0] + f[:, 1, 2]) / root
    w = f[:, 3, 1] / f[:, 3, 0]
    return tuple(v.reshape(speed.shape) for v in (y, z, zp, w))


def closure_degenerate(state):
    n, e = state.n, state.e
    d, dp = _unit(state.u)
    y, z, zp, w = (float(v) for v in degenerate_coefficients(state.speed))
    p = n * _dyads(y, 1.0 - y, d, dp)
    q = math.sqrt(n / math.pi) * _dyads(z, zp, d, dp)
    return ClosureTensors(p, q, w * n * e * d, RegimeTag.DEGENERATE)


def diffusive_mobility(n, temp):
    """(n_T / 2T) phi_1(phi_2^{-1}(n / n_T)), the isotropic Q at B = 0 (vectorised)."""
    n = np.asarray(n, dtype=float)
    temp = np.broadcast_to(np.asarray(temp, dtype=float), n.shape)
    n_t = thermal_density(temp)
    out = np.zeros(n.shape)
    pos = n > 0
    if np.any(pos):
        a = fermi_integral_inverse(2, np.atleast_1d(n[pos] / n_t[pos]))
        out[pos] = n_t[pos] / (2.0 * temp[pos]) * fermi_integral(1, a)
    return out if out.ndim else float(out)


def closure_diffusive(n, temp):
    if not n >= 0 or not temp > 0:
        raise DomainError("closure_diffusive needs n >= 0 and T > 0")
    q = diffusive_mobility(float(n), float(temp))
    return ClosureTensors(0.5 * n * np.eye(2), q * np.eye(2), np.zeros(2), RegimeTag.DIFFUSIVE)


def temperature_at_rest(n, e, tol=1e-13):
    """(A, T) of the isotropic (B = 0) MEP state with density n and energy e.

    At B = 0 the energy ratio e / sqrt(2 pi n) = 2 phi_3(A) / phi_2(A)^{3/2}
    is strictly decreasing in A, so a bracketed Newton iteration on its
    logarithm converges from the Maxwell-Boltzmann guess.
    """
    n = np.atleast_1d(np.asarray(n, dtype=float))
    e = np.atleast_1d(np.asarray(e, dtype=float))
    if np.any(~(n > 0)) or np.any(~(e > 0)):
        raise DomainError("temperature_at_rest needs n > 0 and e > 0")
    log_g = np.log(energy_ratio(n, e))
    if np.any(log_g <= math.log(2.0 * math.sqrt(2.0) / 3.0)):
        cell = int(np.flatnonzero(log_g <= math.log(2.0 * math.sqrt(2.0) / 3.0))[0])
        raise DomainError(f"moments not realizable at rest at cell {cell}")
    lo = np.full_like(n, -1400.0)
    hi = np.full_like(n, 1e8)
    a = np.clip(-2.0 * (log_g - math.log(2.0)), -700.0, 1e7)
    for _ in range(200):
        t = kernels.phi_table(a)
        h = np.log(2.0 * t[3]) - 1.5 * np.log(t[2]) - log_g
        dh = t[2] / t[3] - 1.5 * t[1] / t[2]
        lo = np.where(h > 0, a, lo)
        hi = np.where(h > 0, hi, a)
        new = a - h / dh
        bad = ~((new > lo) & (new < hi))
        new = np.where(bad, 0.5 * (lo + hi), new)
        done = np.abs(h) <= tol
        a = np.where(done, a, new)
        if np.all(done):
            break
    else:
        raise ConvergenceError("temperature_at_rest did not converge",
                               residual=float(np.max(np.abs(h))))
    temp = np.sqrt(2.0 * math.pi * n / kernels.phi_table(a)[2])
    return a, temp


# --- field-level closure ----------------------------------------------------

@dataclass
class ClosureFields:
    """Closure tensor components over flat cell arrays.

    ``a``/``b``/``temp`` carry the exact-regime multipliers (warm starts for
    the next call); they are ``None`` for the asymptotic regimes.
    """

    pxx: np.ndarray
    pxy: np.ndarray
    pyy: np.ndarray
    qxx: np.ndarray
    qxy: np.ndarray
    qyy: np.ndarray
    sx: np.ndarray
    sy: np.ndarray
    a: np.ndarray = None
    b: np.ndarray = None
    temp: np.ndarray = None


def _field_dyads(c_par, c_perp, dx, dy):
    return (c_par * dx * dx + c_perp * dy * dy, (c_par - c_perp) * dx * dy,
            c_par * dy * dy + c_perp * dx * dx)


def closure_fields(regime, n, ux, uy, e, warm=None):
    """Vectorised closure P, Q, S for arrays of moments in the given regime.

    ``warm`` is an optional ``(a, b)`` pair of multiplier arrays used to
    warm-start the exact inversion.  Failures carry the flat cell index.
    """
    regime = RegimeTag.parse(regime)
    n, ux, uy, e = (np.ascontiguousarray(v, dtype=float).ravel() for v in (n, ux, uy, e))
    speed = np.hypot(ux, uy)
    safe = np.where(speed > 0, speed, 1.0)
    dx = np.where(speed > 0, ux / safe, 1.0)
    dy = np.where(speed > 0, uy / safe, 0.0)
    if regime is RegimeTag.EXACT:
        a0, b0 = (None, None) if warm is None else warm
        a, b, temp = solve_multipliers(n, speed, e, a0, b0)
        t = kernels.angular_table_batch(a, b)
        i20 = t[:, 2, 0]
        iso = speed < ISOTROPIC_U
        c_par = np.where(iso, 0.5, 0.5 * (i20 + t[:, 2, 2]) / i20)
        p = _field_dyads(n * c_par, n * (1.0 - c_par), dx, dy)
        qa = 0.5 * (t[:, 1, 0] - t[:, 1, 2]) / i20
        qb = 0.5 * (t[:, 1, 0] + t[:, 1, 2]) / i20
        qa = np.where(iso, 0.5 * t[:, 1, 0] / i20, qa)
        qb = np.where(iso, 0.5 * t[:, 1, 0] / i20, qb)
        q = _field_dyads(n / temp * qa, n / temp * qb, dx, dy)
        smag = np.where(b > 0, 2.0 * temp * n * t[:, 3, 1] / i20, 0.0)
        return ClosureFields(*p, *q, smag * dx, smag * dy, a, b, temp)
    if regime is RegimeTag.MAXWELL_BOLTZMANN:
        x = mb_coefficient(np.minimum(speed, 1.0 - 1e-16))
        p = _field_dyads(n * x, n * (1.0 - x), dx, dy)
        q = _field_dyads(2.0 * n / e * (1.0 - x), 2.0 * n / e * x, dx, dy)
        return ClosureFields(*p, *q, n * e * ux, n * e * uy)
    if regime is RegimeTag.DEGENERATE:
        y, z, zp, w = degenerate_coefficients(np.minimum(speed, 1.0 - 1e-15))
        root = np.sqrt(n / math.pi)
        p = _field_dyads(n * y, n * (1.0 - y), dx, dy)
        q = _field_dyads(root * z, root * zp, dx, dy)
        return ClosureFields(*p, *q, w * n * e * dx, w * n * e * dy)
    _, temp = temperature_at_rest(n, e)
    mob = diffusive_mobility(n, temp)
    zero = np.zeros_like(n)
    return ClosureFields(0.5 * n, zero, 0.5 * n, mob, zero.copy(), mob.copy(), zero.copy(),
                         zero.copy(), temp=temp)
