"""Grids, prescribed potentials and carrier species."""
from dataclasses import dataclass, field
import math

import numpy as np

from .errors import ConfigError

BOUNDARIES = ("periodic", "outflow")
SPECIES = ("electron_upper", "hole_lower")


@dataclass(frozen=True)
class Grid:
    dim: int = 1
    cells_x: int = 100
    cells_y: int = 1
    dx: float = 0.01
    dy: float = 1.0
    boundary_x: str = "periodic"
    boundary_y: str = "periodic"

    def __post_init__(self):
        errs = []
        if self.dim not in (1, 2):
            errs.append(f"grid.dim must be 1 or 2, got {self.dim}")
        if self.cells_x < 4 or (self.dim == 2 and self.cells_y < 4):
            errs.append("grid needs at least 4 cells per active axis")
        if self.dim == 1 and self.cells_y != 1:
            errs.append("1D grid must have cells_y = 1")
        if not (self.dx > 0 and self.dy > 0):
            errs.append("grid spacings must be positive")
        for b in (self.boundary_x, self.boundary_y):
            if b not in BOUNDARIES:
                errs.append(f"boundary {b!r} not in {BOUNDARIES}")
        if errs:
            raise ConfigError(errs)

    @property
    def shape(self):
        return (self.cells_y, self.cells_x)

    @property
    def cell_volume(self):
        return self.dx * (self.dy if self.dim == 2 else 1.0)

    def centers(self):
        x = (np.arange(self.cells_x) + 0.5) * self.dx
        y = (np.arange(self.cells_y) + 0.5) * self.dy if self.dim == 2 else np.zeros(1)
        return np.meshgrid(x, y)

    @property
    def min_spacing(self):
        return min(self.dx, self.dy) if self.dim == 2 else self.dx


@dataclass
class PotentialField:
    """Prescribed potential energy V on a grid with its gradient.

    ``kind`` is one of ``zero``, ``uniform_slope``, ``gaussian_bump``,
    ``step`` or ``tabulated``; analytic kinds can also be evaluated off-grid
    (used by the ray tracer).
    """

    grid: Grid
    kind: str = "zero"
    params: dict = field(default_factory=dict)
    values: np.ndarray = None
    grad: np.ndarray = None

    def __post_init__(self):
        if self.kind == "tabulated":
            self.values = np.asarray(self.values, dtype=float).reshape(self.grid.shape)
            self.grad = self._fd_gradient(self.values)
        else:
            x, y = self.grid.centers()
            self.values = self.value_at(x, y)
            self.grad = np.stack(self.gradient_at(x, y))

    def _fd_gradient(self, v):
        g = np.zeros((2,) + v.shape)
        periodic = self.grid.boundary_x == "periodic"
        if periodic:
            g[0] = (np.roll(v, -1, 1) - np.roll(v, 1, 1)) / (2 * self.grid.dx)
        else:
            g[0] = np.gradient(v, self.grid.dx, axis=1)
        if self.grid.dim == 2:
            if self.grid.boundary_y == "periodic":
                g[1] = (np.roll(v, -1, 0) - np.roll(v, 1, 0)) / (2 * self.grid.dy)
            else:
                g[1] = np.gradient(v, self.grid.dy, axis=0)
        return g

    def value_at(self, x, y):
        k, p = self.kind, self.params
        x = np.asarray(x, dtype=float)
        y = np.asarray(y, dtype=float)
        if k == "zero":
            return np.zeros(np.broadcast(x, y).shape)
        if k == "uniform_slope":
            return p.get("slope_x", 0.0) * x + p.get("slope_y", 0.0) * y + p.get("offset", 0.0)
        if k == "gaussian_bump":
            r2 = (x - p.get("x0", 0.0)) ** 2 + (y - p.get("y0", 0.0)) ** 2
            return p["amplitude"] * np.exp(-0.5 * r2 / p["width"] ** 2)
        if k == "step":
            s = self._step_coord(x, y)
            return 0.5 * p["height"] * (1.0 + np.tanh((s - p.get("position", 0.0)) / p["width"]))
        raise ValueError(f"potential kind {k!r} has no analytic form")

    def _step_coord(self, x, y):
        return x if self.params.get("axis", "x") == "x" else y

    def gradient_at(self, x, y):
        k, p = self.kind, self.params
        x = np.asarray(x, dtype=float)
        y = np.asarray(y, dtype=float)
        shape = np.broadcast(x, y).shape
        if k == "zero":
            return np.zeros(shape), np.zeros(shape)
        if k == "uniform_slope":
            return (np.full(shape, p.get("slope_x", 0.0)), np.full(shape, p.get("slope_y", 0.0)))
        if k == "gaussian_bump":
            v = self.value_at(x, y)
            return (-(x - p.get("x0", 0.0)) / p["width"] ** 2 * v,
                    -(y - p.get("y0", 0.0)) / p["width"] ** 2 * v)
        if k == "step":
            s = self._step_coord(x, y)
            d = 0.5 * p["height"] / p["width"] / np.cosh((s - p.get("position", 0.0)) / p["width"]) ** 2
            d = np.broadcast_to(d, shape)
            zero = np.zeros(shape)
            return (d, zero) if p.get("axis", "x") == "x" else (zero, d)
        raise ValueError(f"potential kind {k!r} has no analytic form")

    def scaled(self, factor):
        """Same shape of potential with amplitude multiplied by ``factor``."""
        p = dict(self.params)
        if self.kind == "tabulated":
            return PotentialField(self.grid, "tabulated", p, values=self.values * factor)
        for key in ("slope_x", "slope_y", "offset", "amplitude", "height"):
            if key in p:
                p[key] = p[key] * factor
        return PotentialField(self.grid, self.kind, p)


@dataclass(frozen=True)
class BandConfig:
    species: str = "electron_upper"
    relaxation_tau: float = None

    def __post_init__(self):
        if self.species not in SPECIES:
            raise ConfigError(f"band.species must be one of {SPECIES}, got {self.species!r}")
        if self.relaxation_tau is not None and not self.relaxation_tau > 0:
            raise ConfigError("band.relaxation_tau must be positive or unset")

    @property
    def sign(self):
        """+1 for upper-cone electrons, -1 for lower-cone holes (force sign)."""
        return 1.0 if self.species == "electron_upper" else -1.0


def total(grid, arr):
    """Cell-volume-weighted sum, compensated against rounding drift."""
    return math.fsum(np.asarray(arr).ravel()) * grid.cell_volume
