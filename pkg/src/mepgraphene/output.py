"""CSV snapshots with a commented metadata block, and unit conversion.

Scaled units use c = hbar = k_B = 1 with the reference temperature T_ref:
energy k_B T_ref, length l0 = hbar c / (k_B T_ref), time l0 / c and
density l0^-2.  Physical output converts to SI (energies in eV).
"""
import json
import math
from pathlib import Path

import numpy as np
from scipy import constants

FLOAT_FMT = "{:.16e}"

# quantity -> (scaled unit, physical unit)
UNIT_LABELS = {
    "length": ("l0", "m"),
    "time": ("t0", "s"),
    "density": ("l0^-2", "m^-2"),
    "velocity": ("c", "m/s"),
    "energy": ("kB*Tref", "eV"),
    "dimensionless": ("1", "1"),
    "momentum_flux": ("l0^-2", "m^-2"),
    "mobility": ("l0^-2/(kB*Tref)", "m^-2/eV"),
    "energy_flux": ("kB*Tref*l0^-2", "eV*m^-2"),
}


class Units:
    def __init__(self, system="scaled", c=1.0e6, t_ref=300.0):
        self.system = system
        self.c = c
        self.t_ref = t_ref
        e0 = constants.k * t_ref
        l0 = constants.hbar * c / e0
        self.factors = {
            "length": l0, "time": l0 / c, "density": l0 ** -2, "velocity": c,
            "energy": e0 / constants.eV, "dimensionless": 1.0, "momentum_flux": l0 ** -2,
            "mobility": l0 ** -2 / (e0 / constants.eV),
            "energy_flux": (e0 / constants.eV) * l0 ** -2,
        }

    @classmethod
    def from_config(cls, cfg):
        return cls(cfg["units.system"], cfg["units.c"], cfg["units.t_ref"])

    def label(self, quantity):
        return UNIT_LABELS[quantity][0 if self.system == "scaled" else 1]

    def convert(self, quantity, values):
        if self.system == "scaled":
            return values
        return np.asarray(values) * self.factors[quantity]

    def header_lines(self):
        out = [f"units: {self.system}"]
        if self.system == "physical":
            out.append(f"c = {self.c!r} m/s, T_ref = {self.t_ref!r} K")
        else:
            out.append(f"c = hbar = k_B = 1; reference scales c = {self.c!r} m/s, "
                       f"T_ref = {self.t_ref!r} K")
        return out


def write_csv(path, columns, meta, units):
    """Write ``columns`` (list of (name, quantity, array)) with a '#' metadata block."""
    path = Path(path)
    arrays = [np.asarray(units.convert(q, a), dtype=float).ravel() for _, q, a in columns]
    size = arrays[0].size
    if any(a.size != size for a in arrays):
        raise ValueError("CSV columns must have equal length")
    lines = [f"# {m}" for m in meta] + [f"# {h}" for h in units.header_lines()]
    lines.append(",".join(f"{name} [{units.label(q)}]" for name, q, _ in columns))
    for row in zip(*arrays):
        lines.append(",".join(FLOAT_FMT.format(v) for v in row))
    path.write_text("\n".join(lines) + "\n", encoding="utf-8")
    return path


def read_csv(path):
    """(metadata lines, column names, 2D array) of a file written by :func:`write_csv`."""
    meta, header, rows = [], None, []
    for line in Path(path).read_text(encoding="utf-8").splitlines():
        if line.startswith("#"):
            meta.append(line[1:].strip())
        elif header is None:
            header = line.split(",")
        elif line.strip():
            rows.append([float(v) for v in line.split(",")])
    return meta, header, np.array(rows, dtype=float).reshape(-1, len(header))


def column(header, data, name):
    """Column of ``data`` whose header starts with ``name`` (units ignored)."""
    for k, h in enumerate(header):
        if h.split(" [")[0] == name:
            return data[:, k]
    raise KeyError(name)


def write_json(path, payload):
    Path(path).write_text(json.dumps(payload, indent=2, sort_keys=True, default=_jsonable) + "\n",
                          encoding="utf-8")


def _jsonable(obj):
    if isinstance(obj, (np.integer,)):
        return int(obj)
    if isinstance(obj, (np.floating,)):
        return float(obj)
    if isinstance(obj, np.ndarray):
        return obj.tolist()
    if isinstance(obj, float) and not math.isfinite(obj):
        return str(obj)
    return str(obj)


__all__ = ["Units", "write_csv", "read_csv", "column", "write_json", "UNIT_LABELS"]
