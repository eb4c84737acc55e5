"""Scalar special functions behind the closure.

Fermi integrals phi_s, modified Bessel functions I_n, the angular-Fermi
functions  I_N^s(A, B) = (1/pi) int_0^pi cos(N t) phi_s(A + B cos t) dt  and
their degenerate (R -> infinity) profiles F_N^s(psi).

Integer orders s <= 3 with N <= 3 go through the compiled tables in
:mod:`.kernels`; anything else falls back to scipy quadrature on the same
node layout.
"""
from dataclasses import dataclass
import math

import numpy as np
from scipy import integrate, optimize, special

from . import kernels
from ._quadrules import DEG_W, DEG_X, SERIES_TERMS
from .errors import ConvergenceError, DomainError

RTOL = 1e-10
PSI_MAX = 0.75 * math.pi


@dataclass(frozen=True)
class AngularFermiArgs:
    order_n: int
    order_s: float
    a: float
    b: float

    def __post_init__(self):
        if int(self.order_n) != self.order_n or self.order_n < 0:
            raise DomainError(f"order_n must be a nonnegative integer, got {self.order_n}")
        if not self.order_s > 0:
            raise DomainError(f"order_s must be positive, got {self.order_s}")
        if not (math.isfinite(self.a) and math.isfinite(self.b)) or self.b < 0:
            raise DomainError(f"need finite a and b >= 0, got a={self.a}, b={self.b}")


@dataclass(frozen=True)
class PolarMultiplier:
    """A = r cos(psi), B = r sin(psi)."""

    r: float
    psi: float

    def __post_init__(self):
        if self.r < 0 or not 0 <= self.psi < PSI_MAX:
            raise DomainError(f"need r >= 0 and 0 <= psi < 3pi/4, got {self}")

    @property
    def a(self):
        return self.r * math.cos(self.psi)

    @property
    def b(self):
        return self.r * math.sin(self.psi)

    @classmethod
    def from_ab(cls, a, b):
        return cls(math.hypot(a, b), math.atan2(b, a))


def _integer_order(s):
    si = int(round(s))
    return si if abs(s - si) < 1e-14 and 0 <= si <= 3 else None


def _phi_generic_scalar(s, z):
    if z <= -math.log(2.0):
        k = np.arange(1, SERIES_TERMS + 1, dtype=float)
        return float(np.sum((-1.0) ** (k + 1) * np.exp(k * z) / k ** s))
    # t^(s-1) / (e^(t-z) + 1): split at the Fermi edge t = z
    pts = [max(z, 0.0)]
    lo = integrate.quad(lambda t: t ** (s - 1) / (math.exp(t - z) + 1.0), 0.0, pts[0],
                        epsabs=0, epsrel=1e-13, limit=400)[0] if pts[0] > 0 else 0.0
    hi = integrate.quad(lambda t: t ** (s - 1) * math.exp(z - t) / (1.0 + math.exp(z - t)),
                        pts[0], np.inf, epsabs=0, epsrel=1e-13, limit=400)[0]
    return (lo + hi) / math.gamma(s)


def fermi_integral(s, z):
    """Complete Fermi-Dirac integral phi_s(z) = -Li_s(-e^z).

    Vectorised over ``z``.  Integer orders 0..3 use the polylogarithm
    series, a Taylor expansion about z = 0 and the exact reflection formula;
    other orders use the series for e^z <= 1/2 and adaptive quadrature
    otherwise.
    """
    if not s > 0 and s != 0:
        raise DomainError(f"Fermi order must be positive, got {s}")
    z_arr = np.asarray(z, dtype=float)
    if not np.all(np.isfinite(z_arr)):
        raise DomainError("fermi_integral needs finite arguments")
    si = _integer_order(s)
    if si is not None:
        out = kernels.phi_table(z_arr.ravel())[si].reshape(z_arr.shape)
    else:
        out = np.array([_phi_generic_scalar(float(s), float(v)) for v in z_arr.ravel()])
        out = out.reshape(z_arr.shape)
    return float(out) if out.ndim == 0 else out


def fermi_integral_inverse(s, y, rtol=RTOL):
    """Inverse of ``fermi_integral(s, .)`` for y > 0 (vectorised)."""
    y_arr = np.asarray(y, dtype=float)
    if np.any(~(y_arr > 0)) or not np.all(np.isfinite(y_arr)):
        raise DomainError("fermi_integral_inverse needs finite y > 0")
    si = _integer_order(s)
    if si is None or si == 0:
        def solve(v):
            lo, hi = _inverse_bracket(s, v)
            return optimize.brentq(lambda z: fermi_integral(s, z) - v, lo, hi,
                                   xtol=1e-14, rtol=4 * np.finfo(float).eps)
        out = np.array([solve(v) for v in y_arr.ravel()]).reshape(y_arr.shape)
        return float(out) if out.ndim == 0 else out
    yv = y_arr.ravel()
    if si == 1:
        z = np.where(yv > 30.0, yv + np.log1p(-np.exp(-yv)), np.log(np.expm1(np.minimum(yv, 30.0))))
    else:
        # Boltzmann tail guess below 1, degenerate power law above; Newton on
        # log phi_s, which is concave, so the iteration is monotone after one step
        z = np.where(yv < 1.0, np.log(yv), (math.gamma(si + 1) * yv) ** (1.0 / si))
        for _ in range(100):
            tab = kernels.phi_table(z)
            step = (np.log(tab[si]) - np.log(yv)) * tab[si] / tab[si - 1]
            z = z - step
            if np.all(np.abs(step) <= 1e-3 * rtol * np.maximum(1.0, np.abs(z))):
                break
        else:
            raise ConvergenceError("fermi_integral_inverse did not converge",
                                   residual=float(np.max(np.abs(step))))
    out = z.reshape(y_arr.shape)
    return float(out) if out.ndim == 0 else out


def _inverse_bracket(s, y):
    lo, hi = -1.0, 1.0
    while fermi_integral(s, lo) > y:
        lo *= 2.0
    while fermi_integral(s, hi) < y:
        hi *= 2.0
    return lo, hi


def bessel_i(n, b):
    """Modified Bessel function of the first kind I_n(b)."""
    if n < 0 or int(n) != n:
        raise DomainError(f"bessel order must be a nonnegative integer, got {n}")
    b_arr = np.asarray(b, dtype=float)
    if np.any(b_arr < 0) or not np.all(np.isfinite(b_arr)):
        raise DomainError("bessel_i needs finite b >= 0")
    out = special.iv(n, b_arr)
    return float(out) if np.ndim(out) == 0 else out


def bessel_ratio_inverse(u, tol=1e-15):
    """Solve I_1(B) / I_0(B) = u for B >= 0 (vectorised, 0 <= u < 1)."""
    u = np.asarray(u, dtype=float)
    if np.any((u < 0) | (u >= 1)):
        raise DomainError("Bessel-ratio inverse needs 0 <= u < 1")
    # rational start (exact at both ends to leading order), then Newton
    b = u * (2.0 - u * u) / (1.0 - u * u)
    for _ in range(60):
        r = special.ive(1, b) / special.ive(0, b)
        dr = 1.0 - r * r - np.divide(r, b, out=np.full_like(b, 0.5), where=b > 0)
        step = (r - u) / dr
        b = np.maximum(b - step, 0.5 * b)
        if np.all(np.abs(step) <= tol * np.maximum(b, 1.0)):
            break
    return float(b) if b.ndim == 0 else b


def angular_fermi(args=None, *, n=None, s=None, a=None, b=None):
    """Angular-Fermi function I_N^s(A, B)."""
    if args is None:
        args = AngularFermiArgs(n, s, a, b)
    si = _integer_order(args.order_s)
    if si is not None and args.order_n <= 3:
        return float(kernels.angular_table(float(args.a), float(args.b))[si, args.order_n])
    theta, w = kernels.theta_nodes(np.array([float(args.a)]), np.array([float(args.b)]))
    theta, w = theta[0], w[0]
    phi = fermi_integral(args.order_s, args.a + args.b * np.cos(theta))
    val = float(np.sum(w * np.cos(args.order_n * theta) * phi))
    if not math.isfinite(val):
        raise ConvergenceError(f"angular_fermi quadrature failed for {args}")
    return val


def angular_fermi_table(a, b):
    """All I_N^s(a, b) for s, N in 0..3 as a ``(4, 4)`` array indexed [s, N]."""
    return kernels.angular_table(float(a), float(b))


def critical_angle(a, b):
    """C(A, B) = Re arccos(-A/B), in [0, pi]."""
    if a == 0 and b == 0:
        raise DomainError("critical angle undefined at (0, 0)")
    if a >= b:
        return math.pi
    if a <= -b:
        return 0.0
    return math.acos(-a / b)


def critical_angle_psi(psi):
    """C(psi) = Re arccos(-cot psi) for the polar parametrisation."""
    if psi <= 0.25 * math.pi:
        return math.pi
    return math.acos(min(1.0, max(-1.0, -math.cos(psi) / math.sin(psi))))


def _check_psi(psi):
    psi = np.asarray(psi, dtype=float)
    if np.any((psi < 0) | (psi >= PSI_MAX)) or not np.all(np.isfinite(psi)):
        raise DomainError("psi must lie in [0, 3pi/4)")
    return psi


def degenerate_table(psi):
    """F_N^s(psi) for s, N in 0..3; shape ``psi.shape + (4, 4)`` indexed [..., s, N].

    The integrand is smooth on [0, C(psi)], so a single high-order
    Gauss-Legendre rule is exact to rounding.
    """
    psi = _check_psi(psi)
    flat = psi.ravel()
    cot = np.cos(flat) / np.sin(np.where(flat > 0, flat, 1.0))
    cmax = np.where(flat <= 0.25 * np.pi, np.pi, np.arccos(np.clip(-cot, -1.0, 1.0)))
    theta = 0.5 * cmax[:, None] * (DEG_X[None, :] + 1.0)
    w = 0.5 * cmax[:, None] * DEG_W[None, :]
    base = np.maximum(np.cos(flat)[:, None] + np.sin(flat)[:, None] * np.cos(theta), 0.0)
    out = np.empty((flat.size, 4, 4))
    for s in range(4):
        ps = base ** s * w / (math.pi * math.gamma(s + 1))
        for k in range(4):
            out[:, s, k] = np.sum(ps * np.cos(k * theta), axis=1)
    return out.reshape(psi.shape + (4, 4))


def degenerate_angular(n, s, psi):
    """F_N^s(psi) = 1/(pi Gamma(s+1)) int_0^C(psi) cos(N t)(cos psi + sin psi cos t)^s dt."""
    psi = float(_check_psi(psi))
    if not s > 0:
        raise DomainError(f"order s must be positive, got {s}")
    si = _integer_order(s)
    if si is not None and n <= 3:
        return float(degenerate_table(psi)[si, n])
    cmax = critical_angle_psi(psi)
    c, sn = math.cos(psi), math.sin(psi)
    val = integrate.quad(lambda t: math.cos(n * t) * max(c + sn * math.cos(t), 0.0) ** s,
                         0.0, cmax, epsabs=0, epsrel=1e-12, limit=400)[0]
    return val / (math.pi * math.gamma(s + 1))
