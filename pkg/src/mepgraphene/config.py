"""Scenario configuration: flat ``key = value`` text with dotted sections.

Blank lines and lines starting with ``#`` are ignored.  Every problem in a
file is collected (with its line number) before a single
:class:`~mepgraphene.errors.ConfigError` is raised.
"""
from dataclasses import dataclass, field
import math
from pathlib import Path

import numpy as np

from .closure import RegimeTag
from .errors import ConfigError
from .fields import BOUNDARIES, SPECIES

SOLVERS = ("hydro", "collimation_mb", "collimation_degenerate", "diffusion",
           "relaxation_study", "closure_table")
POTENTIALS = ("zero", "uniform_slope", "gaussian_bump", "step", "tabulated")
PROFILES = ("uniform", "gaussian", "sine", "multipliers", "collimated")
UNIT_SYSTEMS = ("scaled", "physical")


def _bool(text):
    low = text.strip().lower()
    if low in ("true", "yes", "1", "on"):
        return True
    if low in ("false", "no", "0", "off"):
        return False
    raise ValueError(f"expected a boolean, got {text!r}")


def _opt_float(text):
    return None if text.strip().lower() in ("none", "") else float(text)


def _floats(text):
    return [float(v) for v in text.replace(",", " ").split()]


def _words(text):
    return [w for w in text.replace(",", " ").split()]


def _choice(options):
    def parse(text):
        v = text.strip()
        if v not in options:
            raise ValueError(f"{v!r} is not one of {', '.join(options)}")
        return v
    parse.options = options
    return parse


def _regime(text):
    return RegimeTag.parse(text).value


# key -> (parser, default); defaults are the documented values
SCHEMA = {
    "solver": (_choice(SOLVERS), "hydro"),
    "regime": (_regime, "exact"),
    "t_end": (float, 1.0),
    "snapshot_every": (_opt_float, None),
    "seed": (int, 0),
    "grid.dim": (int, 1),
    "grid.cells_x": (int, 200),
    "grid.cells_y": (int, 1),
    "grid.dx": (float, 0.005),
    "grid.dy": (float, 1.0),
    "grid.boundary_x": (_choice(BOUNDARIES), "periodic"),
    "grid.boundary_y": (_choice(BOUNDARIES), "periodic"),
    "band.species": (_words, ["electron_upper"]),
    "band.relaxation_tau": (_opt_float, None),
    "potential.kind": (_choice(POTENTIALS), "zero"),
    "potential.slope_x": (float, 0.0),
    "potential.slope_y": (float, 0.0),
    "potential.offset": (float, 0.0),
    "potential.amplitude": (float, 0.0),
    "potential.height": (float, 0.0),
    "potential.x0": (float, 0.0),
    "potential.y0": (float, 0.0),
    "potential.width": (float, 0.1),
    "potential.position": (float, 0.0),
    "potential.axis": (_choice(("x", "y")), "x"),
    "potential.file": (str, ""),
    "initial.profile": (_choice(PROFILES), "uniform"),
    "initial.n": (float, 1.0),
    "initial.u_x": (float, 0.0),
    "initial.u_y": (float, 0.0),
    "initial.e": (float, 3.0),
    "initial.amplitude": (float, 0.0),
    "initial.width": (float, 0.1),
    "initial.x0": (float, 0.0),
    "initial.y0": (float, 0.0),
    "initial.wavenumber": (float, 1.0),
    "initial.angle": (float, 0.0),
    "initial.a": (float, 0.0),
    "initial.b_x": (float, 0.0),
    "initial.b_y": (float, 0.0),
    "initial.temp": (float, 1.0),
    "initial.noise": (float, 0.0),
    "scheme.order": (int, 1),
    "scheme.cfl": (float, 0.45),
    "scheme.dt": (_opt_float, None),
    "scheme.isothermal": (_bool, False),
    "scheme.implicit": (_bool, False),
    "diffusion.variant": (_choice(("general_fermi", "maxwell_boltzmann", "degenerate")),
                          "maxwell_boltzmann"),
    "diffusion.tau0": (float, 1.0),
    "diffusion.temp": (float, 1.0),
    "study.taus": (_floats, [0.4, 0.2, 0.1, 0.05]),
    "study.temp": (float, 1.0),
    "study.t_star": (float, 0.05),
    "table.a_min": (float, -15.0),
    "table.a_max": (float, 150.0),
    "table.a_count": (int, 15),
    "table.b_factor": (float, 1.8),
    "table.b_count": (int, 15),
    "table.temps": (_floats, [0.5, 1.0, 2.0]),
    "units.system": (_choice(UNIT_SYSTEMS), "scaled"),
    "units.c": (float, 1.0e6),
    "units.t_ref": (float, 300.0),
}


@dataclass
class ScenarioConfig:
    """Validated scenario; ``values`` maps every schema key to its value."""

    values: dict
    source_lines: dict = field(default_factory=dict)
    base_dir: Path = field(default_factory=Path)

    def __getitem__(self, key):
        return self.values[key]

    @property
    def solver(self):
        return self.values["solver"]

    def section(self, prefix):
        p = prefix + "."
        return {k[len(p):]: v for k, v in self.values.items() if k.startswith(p)}

    def to_text(self):
        """Resolved config in the input format; parses back to an equal config."""
        lines = []
        for key in SCHEMA:
            lines.append(f"{key} = {_format(self.values[key])}")
        return "\n".join(lines) + "\n"

    def __eq__(self, other):
        return isinstance(other, ScenarioConfig) and self.values == other.values


def _format(value):
    if value is None:
        return "none"
    if isinstance(value, bool):
        return "true" if value else "false"
    if isinstance(value, float):
        return repr(value)
    if isinstance(value, list):
        return ", ".join(_format(v) for v in value)
    return str(value)


def parse_config(text, base_dir="."):
    """Parse and validate ``text``; raises ConfigError listing every problem."""
    errors = []
    values = {k: (list(d) if isinstance(d, list) else d) for k, (_, d) in SCHEMA.items()}
    lines = {}
    for lineno, raw in enumerate(text.splitlines(), start=1):
        line = raw.strip()
        if not line or line.startswith("#"):
            continue
        if "=" not in line:
            errors.append(f"line {lineno}: expected 'key = value', got {line!r}")
            continue
        key, _, val = (s.strip() for s in line.partition("="))
        if key not in SCHEMA:
            errors.append(f"line {lineno}: unknown key {key!r}")
            continue
        if key in lines:
            errors.append(f"line {lineno}: duplicate key {key!r} (first set on line {lines[key]})")
            continue
        parser = SCHEMA[key][0]
        try:
            values[key] = parser(val)
        except (ValueError, TypeError) as err:
            extra = ""
            if key == "solver":
                extra = f" (valid solvers: {', '.join(SOLVERS)})"
            errors.append(f"line {lineno}: {key}: {err}{extra}")
            continue
        lines[key] = lineno
    if values["potential.file"]:
        # absolute, so a manifest written elsewhere re-parses to the same config
        values["potential.file"] = str((Path(base_dir) / values["potential.file"]).resolve())
    cfg = ScenarioConfig(values, lines, Path(base_dir))
    errors.extend(_validate(cfg))
    if errors:
        raise ConfigError(errors)
    return cfg


def load_config(path):
    path = Path(path)
    return parse_config(path.read_text(encoding="utf-8"), base_dir=path.parent)


def _validate(cfg):
    v, errs = cfg.values, []

    def err(key, msg):
        line = cfg.source_lines.get(key)
        where = f"line {line}: " if line else ""
        errs.append(f"{where}{key}: {msg}")

    if not v["t_end"] > 0:
        err("t_end", "must be positive")
    if v["snapshot_every"] is not None and not v["snapshot_every"] > 0:
        err("snapshot_every", "must be positive")
    if v["grid.dim"] not in (1, 2):
        err("grid.dim", "must be 1 or 2")
    if v["grid.cells_x"] < 4:
        err("grid.cells_x", "needs at least 4 cells")
    if v["grid.dim"] == 2 and v["grid.cells_y"] < 4:
        err("grid.cells_y", "needs at least 4 cells in 2D")
    if v["grid.dim"] == 1 and v["grid.cells_y"] != 1:
        err("grid.cells_y", "must be 1 for a 1D grid")
    for key in ("grid.dx", "grid.dy"):
        if not v[key] > 0:
            err(key, "must be positive")
    for s in v["band.species"]:
        if s not in SPECIES:
            err("band.species", f"{s!r} is not one of {', '.join(SPECIES)}")
    if not v["band.species"]:
        err("band.species", "needs at least one species")
    tau = v["band.relaxation_tau"]
    if tau is not None and not tau > 0:
        err("band.relaxation_tau", "must be positive or none")
    if v["potential.kind"] in ("gaussian_bump", "step") and not v["potential.width"] > 0:
        err("potential.width", "must be positive")
    if v["potential.kind"] == "tabulated":
        if not v["potential.file"]:
            err("potential.file", "tabulated potential needs a file")
        elif not (cfg.base_dir / v["potential.file"]).is_file():
            err("potential.file", f"file {v['potential.file']!r} not found")
    prof = v["initial.profile"]
    collimated = v["solver"] in ("collimation_mb", "collimation_degenerate")
    if collimated and prof != "collimated":
        err("initial.profile", "collimation solvers need the 'collimated' profile (|u| = 1)")
    if not collimated and prof == "collimated":
        err("initial.profile", "'collimated' (|u| = 1) is only valid for collimation solvers")
    if prof != "multipliers":
        speed = math.hypot(v["initial.u_x"], v["initial.u_y"])
        if speed >= 1.0 and not collimated:
            err("initial.u_x", f"|u| = {speed:g} violates the invariant |u| < 1")
        if not v["initial.n"] > 0:
            err("initial.n", "density must be positive")
        if not v["initial.e"] > 0:
            err("initial.e", "energy per particle must be positive")
        dip = {"gaussian": min(v["initial.amplitude"], 0.0),
               "sine": -abs(v["initial.amplitude"])}.get(prof, 0.0)
        if v["initial.n"] + dip <= 0:
            err("initial.amplitude", "profile would make n <= 0")
        if prof == "gaussian" and not v["initial.width"] > 0:
            err("initial.width", "must be positive")
    elif not v["initial.temp"] > 0:
        err("initial.temp", "must be positive")
    if not 0 <= v["initial.noise"] < 1:
        err("initial.noise", "relative noise must lie in [0, 1)")
    if v["scheme.order"] not in (1, 2):
        err("scheme.order", "must be 1 or 2")
    if not 0 < v["scheme.cfl"] <= 0.9:
        err("scheme.cfl", "must lie in (0, 0.9]")
    dt = v["scheme.dt"]
    if dt is not None:
        h = min(v["grid.dx"], v["grid.dy"]) if v["grid.dim"] == 2 else v["grid.dx"]
        if not dt > 0:
            err("scheme.dt", "must be positive")
        elif v["solver"] in ("hydro", "collimation_mb", "collimation_degenerate") \
                and dt > 0.9 * h * (1 + 1e-12):
            err("scheme.dt", f"violates the CFL bound 0.9 * min(dx, dy) / c = {0.9 * h:g}")
    if v["scheme.isothermal"] and v["solver"] == "hydro" and v["initial.profile"] == "multipliers":
        err("scheme.isothermal", "isothermal runs need a uniform initial e (use a moment profile)")
    if not v["diffusion.tau0"] > 0:
        err("diffusion.tau0", "must be positive")
    if not v["diffusion.temp"] > 0:
        err("diffusion.temp", "must be positive")
    taus = v["study.taus"]
    if v["solver"] == "relaxation_study":
        if len(taus) < 2 or any(b >= a for a, b in zip(taus, taus[1:])) or min(taus) <= 0:
            err("study.taus", "needs at least two positive, strictly decreasing values")
        if v["regime"] != "maxwell_boltzmann":
            err("regime", "relaxation_study uses the maxwell_boltzmann regime")
    if not v["study.temp"] > 0:
        err("study.temp", "must be positive")
    if not v["study.t_star"] > 0:
        err("study.t_star", "must be positive")
    if v["table.a_count"] < 1 or v["table.b_count"] < 1:
        err("table.a_count", "sample counts must be positive")
    if v["table.a_max"] < v["table.a_min"]:
        err("table.a_max", "must not be below table.a_min")
    if not v["table.b_factor"] >= 0:
        err("table.b_factor", "must be nonnegative")
    if not v["table.temps"] or min(v["table.temps"]) <= 0:
        err("table.temps", "needs positive temperatures")
    if not (v["units.c"] > 0 and v["units.t_ref"] > 0):
        err("units.c", "physical scales must be positive")
    return errs


# --- builders -------------------------------------------------------------------

def build_grid(cfg):
    from .fields import Grid
    g = cfg.section("grid")
    return Grid(g["dim"], g["cells_x"], g["cells_y"], g["dx"], g["dy"],
                g["boundary_x"], g["boundary_y"])


def build_potential(cfg, grid):
    from .fields import PotentialField
    p = cfg.section("potential")
    kind = p.pop("kind")
    path = p.pop("file")
    if kind == "tabulated":
        values = np.loadtxt(cfg.base_dir / path, delimiter=None, ndmin=1,
                            converters=None, comments="#").ravel()
        if values.size != grid.cells_x * grid.cells_y:
            raise ConfigError(f"potential.file: {values.size} values for "
                              f"{grid.cells_x * grid.cells_y} cells")
        return PotentialField(grid, "tabulated", {}, values=values)
    keep = {"zero": (), "uniform_slope": ("slope_x", "slope_y", "offset"),
            "gaussian_bump": ("amplitude", "x0", "y0", "width"),
            "step": ("height", "position", "width", "axis")}[kind]
    return PotentialField(grid, kind, {k: p[k] for k in keep})


def build_bands(cfg):
    from .fields import BandConfig
    return [BandConfig(s, cfg["band.relaxation_tau"]) for s in cfg["band.species"]]


def build_scheme(cfg):
    from .hydro import Scheme
    s = cfg.section("scheme")
    return Scheme(s["order"], s["cfl"], RegimeTag.parse(cfg["regime"]), s["isothermal"])


def build_initial(cfg, grid):
    """Initial (n, u_x, u_y, e) arrays shaped like the grid."""
    from .closure import Multipliers, multipliers_to_moments
    p = cfg.section("initial")
    x, y = grid.centers()
    shape = grid.shape
    prof = p["profile"]
    if prof == "multipliers":
        st = multipliers_to_moments(Multipliers(p["a"], [p["b_x"], p["b_y"]], p["temp"]))
        n = np.full(shape, st.n)
        ux, uy, e = (np.full(shape, st.u[0]), np.full(shape, st.u[1]), np.full(shape, st.e))
    else:
        n = np.full(shape, p["n"])
        if prof == "gaussian":
            r2 = (x - p["x0"]) ** 2 + ((y - p["y0"]) ** 2 if grid.dim == 2 else 0.0)
            n = n + p["amplitude"] * np.exp(-0.5 * r2 / p["width"] ** 2)
        elif prof == "sine":
            length = grid.cells_x * grid.dx
            n = n + p["amplitude"] * np.sin(2.0 * math.pi * p["wavenumber"] * x / length)
        if prof == "collimated":
            ux = np.full(shape, math.cos(p["angle"]))
            uy = np.full(shape, math.sin(p["angle"]))
        else:
            ux, uy = np.full(shape, p["u_x"]), np.full(shape, p["u_y"])
        e = np.full(shape, p["e"])
    if p["noise"] > 0:
        rng = np.random.default_rng(cfg["seed"])
        n = n * (1.0 + p["noise"] * rng.uniform(-1.0, 1.0, shape))
    return n, ux, uy, e


__all__ = ["ScenarioConfig", "SCHEMA", "SOLVERS", "parse_config", "load_config", "build_grid",
           "build_potential", "build_bands", "build_scheme", "build_initial"]
