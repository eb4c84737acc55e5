import math

import numpy as np
import pytest

from mepgraphene import ConfigError
from mepgraphene.config import (
    SCHEMA, build_bands, build_grid, build_initial, build_potential, build_scheme,
    load_config, parse_config,
)
from mepgraphene.closure import Multipliers, RegimeTag, multipliers_to_moments
from mepgraphene.scenario import closure_table_rows


def _errors(text, base="."):
    with pytest.raises(ConfigError) as info:
        parse_config(text, base)
    return info.value.errors


class TestParsing:
    def test_defaults(self):
        cfg = parse_config("")
        assert cfg.values == {k: d for k, (_, d) in SCHEMA.items()}
        assert cfg.solver == "hydro"

    def test_comments_blank_lines_and_types(self):
        cfg = parse_config("# note\n\nsolver = diffusion\nscheme.implicit = yes\n"
                           "band.species = electron_upper, hole_lower\nscheme.dt = 0.001\n"
                           "band.relaxation_tau = none\nregime = MB\n")
        assert cfg["scheme.implicit"] is True
        assert cfg["band.species"] == ["electron_upper", "hole_lower"]
        assert cfg["scheme.dt"] == 0.001
        assert cfg["band.relaxation_tau"] is None
        assert cfg["regime"] == RegimeTag.MAXWELL_BOLTZMANN.value
        assert cfg.section("scheme")["dt"] == 0.001

    def test_all_errors_collected_with_lines(self):
        errs = _errors("solver = warp\nbogus = 1\ngrid.dx = -1\nt_end = abc\nnot a pair\n"
                       "grid.dx = 1\n")
        joined = "\n".join(errs)
        assert "line 1: solver" in joined and "valid solvers: hydro" in joined
        assert "line 2: unknown key 'bogus'" in joined
        assert "line 3: grid.dx: must be positive" in joined
        assert "line 4: t_end" in joined
        assert "line 5: expected 'key = value'" in joined
        assert "line 6: duplicate key 'grid.dx'" in joined

    def test_speed_invariant(self):
        errs = _errors("initial.u_x = 0.8\ninitial.u_y = 0.6\n")
        assert any("|u| = 1 violates the invariant |u| < 1" in e for e in errs)

    def test_collimation_needs_collimated_profile(self):
        assert any("collimated" in e for e in _errors("solver = collimation_mb\n"))
        assert any("only valid" in e for e in _errors("initial.profile = collimated\n"))
        cfg = parse_config("solver = collimation_degenerate\ninitial.profile = collimated\n")
        assert cfg.solver == "collimation_degenerate"

    def test_cfl_bound_on_dt(self):
        errs = _errors("grid.dx = 0.01\nscheme.dt = 0.0095\n")
        assert any("CFL bound" in e for e in errs)
        parse_config("grid.dx = 0.01\nscheme.dt = 0.009\n")
        parse_config("solver = diffusion\ngrid.dx = 0.01\nscheme.dt = 0.5\n")

    def test_study_constraints(self):
        errs = _errors("solver = relaxation_study\nstudy.taus = 0.1, 0.2\n")
        assert any("strictly decreasing" in e for e in errs)
        assert any("maxwell_boltzmann" in e for e in errs)

    def test_isothermal_multiplier_profile_rejected(self):
        errs = _errors("scheme.isothermal = true\ninitial.profile = multipliers\n")
        assert any("uniform initial e" in e for e in errs)

    def test_tabulated_potential_file(self, tmp_path):
        assert any("needs a file" in e for e in _errors("potential.kind = tabulated\n"))
        assert any("not found" in e for e in _errors(
            "potential.kind = tabulated\npotential.file = missing.txt\n", tmp_path))
        (tmp_path / "v.txt").write_text("\n".join(str(0.1 * k) for k in range(8)))
        cfg = parse_config("potential.kind = tabulated\npotential.file = v.txt\n"
                           "grid.cells_x = 8\n", tmp_path)
        pot = build_potential(cfg, build_grid(cfg))
        np.testing.assert_allclose(pot.values[0], 0.1 * np.arange(8))
        bad = parse_config("potential.kind = tabulated\npotential.file = v.txt\n", tmp_path)
        with pytest.raises(ConfigError, match="8 values"):
            build_potential(bad, build_grid(bad))

    def test_manifest_text_roundtrip(self, tmp_path):
        cfg = parse_config("solver = diffusion\nscheme.dt = 0.003\nstudy.taus = 0.3, 0.1\n"
                           "band.species = hole_lower\ninitial.e = 3.3333333333333335\n")
        again = parse_config(cfg.to_text())
        assert again == cfg
        path = tmp_path / "a.cfg"
        path.write_text(cfg.to_text())
        assert load_config(path) == cfg


class TestBuilders:
    def test_grid_scheme_bands(self):
        cfg = parse_config("grid.dim = 2\ngrid.cells_x = 8\ngrid.cells_y = 6\n"
                           "grid.boundary_y = outflow\nscheme.order = 2\nregime = degenerate\n"
                           "band.species = hole_lower\nband.relaxation_tau = 0.5\n")
        grid = build_grid(cfg)
        assert grid.shape == (6, 8) and grid.boundary_y == "outflow"
        scheme = build_scheme(cfg)
        assert scheme.order == 2 and scheme.regime is RegimeTag.DEGENERATE
        (band,) = build_bands(cfg)
        assert band.sign == -1.0 and band.relaxation_tau == 0.5

    def test_gaussian_and_noise_profiles(self):
        cfg = parse_config("initial.profile = gaussian\ninitial.amplitude = 0.5\n"
                           "initial.x0 = 1.0\ninitial.width = 0.2\ninitial.noise = 0.1\nseed = 7\n")
        grid = build_grid(cfg)
        n, ux, uy, e = build_initial(cfg, grid)
        x, _ = grid.centers()
        clean = 1.0 + 0.5 * np.exp(-0.5 * (x - 1.0) ** 2 / 0.04)
        assert np.all(np.abs(n / clean - 1) <= 0.1)
        assert np.array_equal(n, build_initial(cfg, grid)[0])
        other = parse_config(cfg.to_text().replace("seed = 7", "seed = 8"))
        assert not np.array_equal(n, build_initial(other, grid)[0])
        assert np.all(e == 3.0) and np.all(ux == 0) and np.all(uy == 0)

    def test_multiplier_profile(self):
        cfg = parse_config("initial.profile = multipliers\ninitial.a = 2.0\n"
                           "initial.b_x = 1.0\ninitial.temp = 0.5\n")
        n, ux, _, e = build_initial(cfg, build_grid(cfg))
        st = multipliers_to_moments(Multipliers(2.0, [1.0, 0.0], 0.5))
        assert (n[0, 0], ux[0, 0], e[0, 0]) == pytest.approx((st.n, st.u[0], st.e), rel=1e-14)

    def test_collimated_profile(self):
        cfg = parse_config("solver = collimation_mb\ninitial.profile = collimated\n"
                           "initial.angle = 0.3\n")
        _, ux, uy, _ = build_initial(cfg, build_grid(cfg))
        assert np.allclose(np.hypot(ux, uy), 1.0) and ux[0, 0] == pytest.approx(math.cos(0.3))

    def test_closure_table_shape(self):
        cfg = parse_config("solver = closure_table\ntable.a_count = 3\ntable.b_count = 2\n"
                           "table.temps = 1.0\n")
        rows = closure_table_rows(cfg)
        assert rows.shape == (6, 12)
        np.testing.assert_allclose(rows[:, 11], rows[:, 3], rtol=1e-12)
