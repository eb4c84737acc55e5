import json
import subprocess
import sys

import pytest

from mepgraphene.cli import main
from mepgraphene.config import parse_config
from mepgraphene.output import column, read_csv

from conftest import SCENARIOS

NUMERIC_FAILURE = """\
solver = diffusion
t_end = 0.01
grid.cells_x = 50
grid.dx = 0.02
grid.boundary_x = outflow
potential.kind = uniform_slope
potential.slope_x = 400.0
initial.profile = gaussian
initial.n = 0.001
initial.amplitude = 1.0
initial.x0 = 0.01
initial.width = 0.01
"""


def _manifest_config(path):
    text = path.read_text()
    return parse_config("\n".join(ln for ln in text.splitlines() if not ln.startswith("#")))


@pytest.mark.parametrize("name", sorted(p.name for p in SCENARIOS.glob("*.cfg")))
def test_shipped_scenarios_validate(name, capsys):
    assert main(["validate", "--config", str(SCENARIOS / name)]) == 0
    assert "valid" in capsys.readouterr().out


def test_config_error_exit_code(tmp_path, capsys):
    cfg = tmp_path / "bad.cfg"
    cfg.write_text("solver = warp\ngrid.cells_x = 2\n")
    assert main(["validate", "--config", str(cfg)]) == 2
    err = capsys.readouterr().err
    assert "line 1: solver" in err and "line 2: grid.cells_x" in err
    assert main(["run", "--config", str(tmp_path / "missing.cfg"), "--out",
                 str(tmp_path / "o")]) == 2


def test_run_writes_snapshots_and_manifest(tmp_path):
    out = tmp_path / "o"
    assert main(["run", "--config", str(SCENARIOS / "diffusion_mb_slope.cfg"), "--out",
                 str(out), "--quiet"]) == 0
    names = sorted(p.name for p in out.iterdir())
    assert names == ["manifest.cfg", "snapshot_0000.csv", "snapshot_0001.csv",
                     "snapshot_0002.csv"]
    meta, header, data = read_csv(out / "snapshot_0002.csv")
    assert "time [scaled]: 0.2" in " ".join(meta)
    assert header[0].startswith("x") and data.shape == (100, 2)
    manifest = (out / "manifest.cfg").read_text()
    assert "# status: ok" in manifest and "max_mass_drift_electron_upper" in manifest
    from mepgraphene.config import load_config
    assert _manifest_config(out / "manifest.cfg") == load_config(
        SCENARIOS / "diffusion_mb_slope.cfg")


def test_numeric_error_exit_code(tmp_path, capsys):
    cfg = tmp_path / "fail.cfg"
    cfg.write_text(NUMERIC_FAILURE)
    out = tmp_path / "o"
    assert main(["run", "--config", str(cfg), "--out", str(out)]) == 3
    assert "PositivityError" in capsys.readouterr().err
    record = json.loads((out / "error.json").read_text())
    assert record["type"] == "PositivityError" and record["cell"] == [0, 1]
    assert "# status: error" in (out / "manifest.cfg").read_text()


def test_closure_table_subcommand(tmp_path):
    cfg = tmp_path / "t.cfg"
    cfg.write_text("table.a_count = 4\ntable.b_count = 3\ntable.temps = 1.0, 2.0\n")
    out = tmp_path / "o"
    assert main(["closure-table", "--config", str(cfg), "--out", str(out), "--quiet"]) == 0
    _, header, data = read_csv(out / "closure_table.csv")
    assert data.shape == (24, 12)
    assert list(column(header, data, "T")[:2]) == [1.0, 2.0]
    assert "rows_validated: 24" in (out / "manifest.cfg").read_text()


def test_study_subcommand(tmp_path):
    cfg = tmp_path / "s.cfg"
    cfg.write_text("grid.cells_x = 100\ngrid.dx = 0.02\npotential.kind = uniform_slope\n"
                   "potential.slope_x = 2.0\ninitial.profile = gaussian\ninitial.n = 0.2\n"
                   "initial.amplitude = 1.0\ninitial.x0 = 1.0\nscheme.order = 2\n"
                   "study.taus = 0.2, 0.1, 0.05\nstudy.t_star = 0.02\n")
    out = tmp_path / "o"
    assert main(["study", "--config", str(cfg), "--out", str(out), "--quiet"]) == 0
    meta, header, data = read_csv(out / "convergence.csv")
    assert "monotone: True" in meta
    assert data.shape == (3, 3)
    _, pheader, _ = read_csv(out / "profiles.csv")
    assert [h.split(" [")[0] for h in pheader] == ["x", "n_diffusion", "n_tau_0.2",
                                                    "n_tau_0.1", "n_tau_0.05"]


def test_deterministic_output(tmp_path):
    cfg = tmp_path / "h.cfg"
    cfg.write_text("t_end = 0.05\ngrid.cells_x = 50\ngrid.dx = 0.02\nregime = maxwell_boltzmann\n"
                   "initial.profile = sine\ninitial.amplitude = 0.2\ninitial.noise = 0.01\n"
                   "seed = 11\n")
    runs = []
    for k in range(2):
        out = tmp_path / f"o{k}"
        assert main(["run", "--config", str(cfg), "--out", str(out), "--quiet"]) == 0
        runs.append({p.name: p.read_bytes() for p in out.glob("*.csv")})
    assert runs[0] == runs[1] and runs[0]


def test_console_script_entry_point(tmp_path):
    proc = subprocess.run([sys.executable, "-m", "mepgraphene.cli", "validate", "--config",
                           str(SCENARIOS / "closure_table.cfg")],
                          capture_output=True, text=True, timeout=300)
    assert proc.returncode == 0, proc.stderr
