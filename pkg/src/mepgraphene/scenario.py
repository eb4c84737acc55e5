"""Execute a validated scenario and write its outputs."""
from dataclasses import dataclass, field
import math
from pathlib import Path
import platform
import time

import numpy as np

from . import __version__
from ._backend import BACKEND
from .closure import Multipliers, RegimeTag, closure_exact, multipliers_to_moments
from .config import (
    build_bands, build_grid, build_initial, build_potential, build_scheme,
)
from .errors import ConfigError
from .fields import total
from .output import Units, column, read_csv, write_csv, write_json

TRACE_RTOL = 1e-12


@dataclass
class ExitReport:
    code: int
    message: str
    files: list = field(default_factory=list)
    diagnostics: dict = field(default_factory=dict)


def _coords(grid):
    x, y = grid.centers()
    cols = [("x", "length", x)]
    if grid.dim == 2:
        cols.append(("y", "length", y))
    return cols


def _snapshot_name(k):
    return f"snapshot_{k:04d}.csv"


def _meta(cfg, t):
    return [f"solver: {cfg.solver}", f"regime: {cfg['regime']}", f"time [scaled]: {t!r}"]


def _moment_columns(grid, state):
    cols = _coords(grid)
    for sp, f in state.fields.items():
        cols += [(f"n_{sp}", "density", f.n), (f"u_x_{sp}", "dimensionless", f.ux),
                 (f"u_y_{sp}", "dimensionless", f.uy), (f"e_{sp}", "energy", f.e)]
    return cols


def _run_hydro(cfg, out, units):
    from .hydro import BandFields, FieldState, run_hydro
    grid = build_grid(cfg)
    pot = build_potential(cfg, grid)
    bands = build_bands(cfg)
    scheme = build_scheme(cfg)
    n, ux, uy, e = build_initial(cfg, grid)
    state = FieldState(grid, {b.species: BandFields(n.copy(), ux.copy(), uy.copy(), e.copy())
                              for b in bands})
    mass0 = {b.species: total(grid, state.fields[b.species].n) for b in bands}
    drift = {b.species: 0.0 for b in bands}

    def audit(st):
        for sp, m0 in mass0.items():
            drift[sp] = max(drift[sp], abs(total(grid, st.fields[sp].n) - m0) / m0)

    final, snaps = run_hydro(state, pot, bands, cfg["t_end"], scheme, cfg["snapshot_every"],
                             cfg["scheme.dt"], callback=audit)
    files = []
    for k, snap in enumerate(snaps):
        files.append(write_csv(out / _snapshot_name(k), _moment_columns(grid, snap),
                               _meta(cfg, snap.time), units))
    diag = {f"max_mass_drift_{sp}": v for sp, v in drift.items()}
    diag["final_time"] = final.time
    return files, diag


def _run_collimation(cfg, out, units):
    from .hydro import BandFields, FieldState, run_collimation_degenerate, run_collimation_mb
    runner = run_collimation_mb if cfg.solver == "collimation_mb" else run_collimation_degenerate
    grid = build_grid(cfg)
    pot = build_potential(cfg, grid)
    bands = build_bands(cfg)
    n, ux, uy, e = build_initial(cfg, grid)
    state = FieldState(grid, {b.species: BandFields(n.copy(), ux.copy(), uy.copy(), e.copy())
                              for b in bands})
    files = [write_csv(out / _snapshot_name(0), _moment_columns(grid, state),
                       _meta(cfg, 0.0), units)]
    every = cfg["snapshot_every"] or cfg["t_end"]
    targets = list(np.arange(1, math.floor(cfg["t_end"] / every + 1e-9) + 1) * every)
    if not targets or targets[-1] < cfg["t_end"] * (1 - 1e-12):
        targets.append(cfg["t_end"])
    for k, t_next in enumerate(targets, start=1):
        for b in bands:
            state = runner(state, pot, b, float(t_next), cfg["scheme.dt"])
        files.append(write_csv(out / _snapshot_name(k), _moment_columns(grid, state),
                               _meta(cfg, state.time), units))
    return files, {}


def _run_diffusion(cfg, out, units):
    from .diffusion import DiffusionModel, run_diffusion
    grid = build_grid(cfg)
    pot = build_potential(cfg, grid)
    bands = build_bands(cfg)
    d = cfg.section("diffusion")
    model = DiffusionModel(d["variant"], d["tau0"], d["temp"])
    n0, _, _, _ = build_initial(cfg, grid)
    runs = {}
    for b in bands:
        _, snaps = run_diffusion(n0, pot, model, cfg["t_end"], b, cfg["scheme.dt"],
                                 cfg["scheme.implicit"], cfg["snapshot_every"])
        runs[b.species] = snaps
    files, diag = [], {}
    count = len(next(iter(runs.values())))
    for k in range(count):
        t = next(iter(runs.values()))[k][0]
        cols = _coords(grid) + [(f"n_{sp}", "density", s[k][1]) for sp, s in runs.items()]
        files.append(write_csv(out / _snapshot_name(k), cols, _meta(cfg, t), units))
    for sp, s in runs.items():
        m0 = total(grid, s[0][1])
        diag[f"max_mass_drift_{sp}"] = max(abs(total(grid, n) - m0) / m0 for _, n in s)
    return files, diag


def _run_study(cfg, out, units):
    from .diffusion import StudyScenario, relaxation_limit_study
    grid = build_grid(cfg)
    pot = build_potential(cfg, grid)
    band = build_bands(cfg)[0]
    n0, _, _, _ = build_initial(cfg, grid)
    st = cfg.section("study")
    scen = StudyScenario(grid, n0, pot, st["temp"], st["t_star"], band, cfg["scheme.order"],
                         cfg["scheme.cfl"])
    rep = relaxation_limit_study(scen, st["taus"], RegimeTag.parse(cfg["regime"]))
    meta = _meta(cfg, st["t_star"]) + [f"monotone: {rep.monotone}", f"complete: {rep.complete}"]
    rows = rep.rows()
    files = [write_csv(out / "convergence.csv",
                       [("tau", "time", [r[0] for r in rows]),
                        ("l1_distance", "density", [r[1] for r in rows]),
                        ("empirical_rate", "dimensionless", [r[2] for r in rows])],
                       meta, units)]
    cols = _coords(grid) + [("n_diffusion", "density", rep.reference)]
    cols += [(f"n_tau_{tau!r}", "density", prof) for tau, prof in zip(rep.taus, rep.profiles)]
    files.append(write_csv(out / "profiles.csv", cols, meta, units))
    diag = {"monotone": rep.monotone, "complete": rep.complete,
            "final_over_initial": (rep.distances[-1] / rep.distances[0]) if rep.distances else None}
    if not rep.complete:
        raise StudyAborted(rep.error, files, diag)
    return files, diag


class StudyAborted(ArithmeticError):
    def __init__(self, message, files, diag):
        super().__init__(message)
        self.files, self.diag = files, diag


def closure_table_rows(cfg):
    """Sample the exact closure over the configured (A, B, T) grid."""
    t = cfg.section("table")
    rows = []
    for a in np.linspace(t["a_min"], t["a_max"], t["a_count"]):
        b_max = t["b_factor"] * max(abs(a), 1.0)
        for b in np.linspace(0.0, b_max, t["b_count"]):
            for temp in t["temps"]:
                m = Multipliers(float(a), [float(b), 0.0], float(temp))
                st = multipliers_to_moments(m)
                cl = closure_exact(st, m)
                pe = np.linalg.eigvalsh(cl.p)
                qe = np.linalg.eigvalsh(cl.q)
                rows.append((a, b, temp, st.n, st.speed, st.e, pe[0], pe[1], qe[0], qe[1],
                             float(np.hypot(*cl.s_flux)), float(np.trace(cl.p))))
    return np.array(rows)


TABLE_COLUMNS = [("A", "dimensionless"), ("B", "dimensionless"), ("T", "energy"),
                 ("n", "density"), ("u_abs", "dimensionless"), ("e", "energy"),
                 ("P_eig_min", "momentum_flux"), ("P_eig_max", "momentum_flux"),
                 ("Q_eig_min", "mobility"), ("Q_eig_max", "mobility"),
                 ("S_abs", "energy_flux"), ("trace_P", "momentum_flux")]


def validate_closure_table(path, rtol=TRACE_RTOL):
    """Re-read a closure-table CSV and check trace(P) = n on every row.

    Returns the number of rows; raises ValueError naming the first bad row.
    """
    _, header, data = read_csv(path)
    n = column(header, data, "n")
    tr = column(header, data, "trace_P")
    lo, hi = column(header, data, "P_eig_min"), column(header, data, "P_eig_max")
    for k in range(data.shape[0]):
        for val in (tr[k], lo[k] + hi[k]):
            if abs(val - n[k]) > rtol * abs(n[k]):
                raise ValueError(f"row {k}: trace(P) = {val!r} differs from n = {n[k]!r}")
    return data.shape[0]


def _run_table(cfg, out, units):
    rows = closure_table_rows(cfg)
    cols = [(name, q, rows[:, k]) for k, (name, q) in enumerate(TABLE_COLUMNS)]
    path = write_csv(out / "closure_table.csv", cols, _meta(cfg, 0.0), units)
    return [path], {"rows_validated": validate_closure_table(path)}


RUNNERS = {"hydro": _run_hydro, "collimation_mb": _run_collimation,
           "collimation_degenerate": _run_collimation, "diffusion": _run_diffusion,
           "relaxation_study": _run_study, "closure_table": _run_table}


def _manifest(cfg, out, status, wall, diag):
    import numpy
    import scipy
    head = ["mepgraphene run manifest", f"status: {status}", f"package: {__version__}",
            f"backend: {BACKEND}", f"python: {platform.python_version()}",
            f"numpy: {numpy.__version__}", f"scipy: {scipy.__version__}",
            f"wall_time_s: {wall:.3f}"]
    head += [f"{k}: {v!r}" for k, v in sorted(diag.items())]
    text = "".join(f"# {h}\n" for h in head) + cfg.to_text()
    path = Path(out) / "manifest.cfg"
    path.write_text(text, encoding="utf-8")
    return path


def run_scenario(cfg, output_dir):
    """Run ``cfg``; returns an :class:`ExitReport` (code 0 ok, 3 numeric error).

    Numeric failures write ``error.json`` with the exception type, message and
    any cell/time location alongside the manifest.
    """
    out = Path(output_dir)
    out.mkdir(parents=True, exist_ok=True)
    units = Units.from_config(cfg)
    t0 = time.perf_counter()
    try:
        files, diag = RUNNERS[cfg.solver](cfg, out, units)
    except ConfigError:
        raise
    except (ArithmeticError, ValueError) as err:
        wall = time.perf_counter() - t0
        record = {"type": type(err).__name__, "message": str(err),
                  "cell": getattr(err, "cell", None), "time": getattr(err, "time", None),
                  "solver": cfg.solver}
        write_json(out / "error.json", record)
        diag = getattr(err, "diag", {})
        files = [Path(p) for p in getattr(err, "files", [])]
        files.append(_manifest(cfg, out, "error", wall, diag))
        return ExitReport(3, f"{type(err).__name__}: {err}", files + [out / "error.json"], diag)
    wall = time.perf_counter() - t0
    files.append(_manifest(cfg, out, "ok", wall, diag))
    return ExitReport(0, f"{cfg.solver}: wrote {len(files)} files to {out}", files, diag)


__all__ = ["ExitReport", "run_scenario", "closure_table_rows", "validate_closure_table",
           "TABLE_COLUMNS"]
