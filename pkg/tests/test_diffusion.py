import math

import numpy as np
import pytest

from mepgraphene import ConfigError, PositivityError
from mepgraphene.closure import diffusive_mobility
from mepgraphene.diffusion import (
    DiffusionModel, StudyScenario, diffusion_step, max_explicit_dt, max_face_flux,
    relaxation_limit_study, run_diffusion, steady_state,
)
from mepgraphene.fields import BandConfig, Grid, PotentialField, total


def _line(cells=200, dx=0.01, boundary="periodic"):
    return Grid(1, cells, 1, dx, 1.0, boundary)


def _heat_kernel(x, center, var, mass, length):
    # periodic images make the reference exact on the torus
    out = np.zeros_like(x)
    for k in range(-3, 4):
        out += np.exp(-0.5 * (x - center + k * length) ** 2 / var)
    return mass * out / math.sqrt(2 * math.pi * var)


class TestMobility:
    def test_general_fermi_is_twice_the_rest_energy_flux_coefficient(self):
        model = DiffusionModel("general_fermi", 1.0, 0.7)
        n = np.array([0.01, 1.0, 50.0])
        mu, _ = model.mobility(n)
        ref = [2 * diffusive_mobility(v, 0.7) for v in n]
        np.testing.assert_allclose(mu, ref, rtol=1e-11)

    def test_general_fermi_limits(self):
        model = DiffusionModel("general_fermi", 1.0, 1.0)
        mb = DiffusionModel("maxwell_boltzmann", 1.0, 1.0)
        dg = DiffusionModel("degenerate", 1.0, 1.0)
        low = np.array([1e-8])
        assert model.mobility(low)[0][0] == pytest.approx(mb.mobility(low)[0][0], rel=1e-6)
        high = np.array([1e6])
        assert model.mobility(high)[0][0] == pytest.approx(dg.mobility(high)[0][0], rel=1e-6)

    @pytest.mark.parametrize("variant", ["general_fermi", "maxwell_boltzmann", "degenerate"])
    def test_derivative(self, variant):
        model = DiffusionModel(variant, 1.0, 0.8)
        n = np.array([0.05, 0.7, 3.0, 40.0])
        h = 1e-6 * n
        d_num = (model.mobility(n + h)[0] - model.mobility(n - h)[0]) / (2 * h)
        np.testing.assert_allclose(model.mobility(n)[1], d_num, rtol=1e-6)

    def test_validation(self):
        with pytest.raises(ConfigError) as info:
            DiffusionModel("quantum", -1.0, 0.0)
        assert len(info.value.errors) == 3
        DiffusionModel("degenerate", 1.0, 0.0)


class TestEvolution:
    def _gaussian(self, grid, var=0.01, mass=1.0, base=0.05):
        x, _ = grid.centers()
        length = grid.cells_x * grid.dx
        return base + _heat_kernel(x, 0.5 * length, var, mass, length)

    def _heat_error(self, cells, implicit=False, dt=None):
        grid = _line(cells, 2.0 / cells)
        model = DiffusionModel("maxwell_boltzmann", 1.0, 1.0)
        t_end, var = 0.02, 0.01
        n, _ = run_diffusion(self._gaussian(grid, var), PotentialField(grid), model, t_end,
                             dt=dt, implicit=implicit)
        x, _ = grid.centers()
        # D = tau0 / 2, so the variance grows by 2 D t = tau0 t
        ref = 0.05 + _heat_kernel(x, 1.0, var + t_end, 1.0, 2.0)
        return total(grid, np.abs(n - ref))

    def test_heat_kernel_explicit_second_order(self):
        coarse, fine = self._heat_error(100), self._heat_error(200)
        assert fine < 1e-4
        assert math.log2(coarse / fine) == pytest.approx(2.0, abs=0.1)

    def test_heat_kernel_implicit_first_order_in_time(self):
        e1, e2 = self._heat_error(400, True, 2e-3), self._heat_error(400, True, 1e-3)
        assert e2 < 1e-2
        assert math.log2(e1 / e2) == pytest.approx(1.0, abs=0.15)

    @pytest.mark.parametrize("boundary", ["periodic", "outflow"])
    @pytest.mark.parametrize("species", ["electron_upper", "hole_lower"])
    def test_mass_conserved(self, boundary, species):
        grid = _line(boundary=boundary)
        pot = PotentialField(grid, "gaussian_bump", {"amplitude": 0.5, "x0": 0.7, "y0": 0.0,
                                                     "width": 0.2})
        model = DiffusionModel("general_fermi", 1.0, 1.0)
        n0 = self._gaussian(grid)
        n, _ = run_diffusion(n0, pot, model, 0.05, BandConfig(species), dt=5e-3, implicit=True)
        assert total(grid, n) == pytest.approx(total(grid, n0), rel=1e-12)

    def test_two_dimensional_mode_decay(self):
        grid = Grid(2, 24, 24, 1 / 24, 1 / 24)
        x, y = grid.centers()
        n0 = 1.0 + 0.3 * np.sin(2 * np.pi * x) * np.cos(2 * np.pi * y)
        pot = PotentialField(grid)
        model = DiffusionModel("maxwell_boltzmann", 1.0, 1.0)
        dt_exp, dt_imp = 5e-4, 2e-4
        n_exp, _ = run_diffusion(n0, pot, model, 0.01, dt=dt_exp)
        n_imp, _ = run_diffusion(n0, pot, model, 0.01, dt=dt_imp, implicit=True)
        # the mode is an eigenvector of the discrete operator with eigenvalue -lam
        lam = 0.5 * 2 * (2 - 2 * math.cos(2 * math.pi / 24)) * 24 ** 2
        mode = 0.3 * np.sin(2 * np.pi * x) * np.cos(2 * np.pi * y)
        np.testing.assert_allclose(n_exp, 1.0 + (1 - dt_exp * lam) ** 20 * mode, atol=1e-13)
        np.testing.assert_allclose(n_imp, 1.0 + (1 + dt_imp * lam) ** -50 * mode, atol=1e-11)

    def test_explicit_step_limit(self):
        grid = _line()
        model = DiffusionModel("maxwell_boltzmann", 2.0, 1.0)
        pot = PotentialField(grid)
        n0 = np.ones(grid.shape)
        limit = max_explicit_dt(grid, model)
        assert limit == pytest.approx(0.4 * grid.dx ** 2 / 2.0)
        with pytest.raises(ConfigError, match="exceeds"):
            diffusion_step(n0, pot, model, 1.5 * limit)

    def test_snapshots(self):
        grid = _line(50, 0.02)
        model = DiffusionModel("maxwell_boltzmann", 1.0, 1.0)
        _, snaps = run_diffusion(np.ones(grid.shape), PotentialField(grid), model, 0.01,
                                 dt=1e-3, implicit=True, snapshot_every=0.005)
        assert [t for t, _ in snaps] == pytest.approx([0.0, 0.005, 0.01])

    def test_positivity_error(self):
        grid = _line(50, 0.02, "outflow")
        pot = PotentialField(grid, "uniform_slope", {"slope_x": 400.0, "slope_y": 0.0,
                                                     "offset": 0.0})
        model = DiffusionModel("maxwell_boltzmann", 1.0, 1.0)
        n0 = np.full(grid.shape, 1e-3)
        n0[0, 0] = 1.0
        with pytest.raises(PositivityError, match="cell"):
            diffusion_step(n0, pot, model, max_explicit_dt(grid, model))


class TestSteadyState:
    @pytest.mark.parametrize("variant", ["general_fermi", "maxwell_boltzmann", "degenerate"])
    @pytest.mark.parametrize("species", ["electron_upper", "hole_lower"])
    def test_zero_flux(self, variant, species):
        grid = _line(100, 0.01, "outflow")
        pot = PotentialField(grid, "uniform_slope", {"slope_x": 1.0, "slope_y": 0.0,
                                                     "offset": 0.0})
        model = DiffusionModel(variant, 1.0, 1.0)
        band = BandConfig(species)
        n = steady_state(np.ones(grid.shape), pot, model, band)
        assert max_face_flux(n, pot, model, band) < 1e-11
        assert total(grid, n) == pytest.approx(1.0, rel=1e-12)
        # carriers pile up where the force pushes them
        slope = np.diff(n[0])
        assert np.all(slope < 0) if band.sign > 0 else np.all(slope > 0)

    def test_boltzmann_profile(self):
        grid = _line(100, 0.01, "outflow")
        pot = PotentialField(grid, "uniform_slope", {"slope_x": 1.0, "slope_y": 0.0,
                                                     "offset": 0.0})
        model = DiffusionModel("maxwell_boltzmann", 1.0, 0.5)
        n = steady_state(np.ones(grid.shape), pot, model)
        x, _ = grid.centers()
        ref = np.exp(-x / 0.5)
        ref *= total(grid, n) / total(grid, ref)
        assert np.max(np.abs(n - ref) / ref) < 1e-4

    def test_evolution_relaxes_to_steady_state(self):
        grid = _line(40, 0.025, "outflow")
        pot = PotentialField(grid, "uniform_slope", {"slope_x": 1.0, "slope_y": 0.0,
                                                     "offset": 0.0})
        model = DiffusionModel("maxwell_boltzmann", 1.0, 1.0)
        n_inf = steady_state(np.ones(grid.shape), pot, model)
        n, _ = run_diffusion(np.ones(grid.shape), pot, model, 20.0, dt=0.5, implicit=True)
        np.testing.assert_allclose(n, n_inf, rtol=1e-9)


class TestStudy:
    def _scenario(self):
        grid = _line(100, 0.02)
        x, _ = grid.centers()
        n0 = 0.2 + np.exp(-0.5 * ((x - 1.0) / 0.1) ** 2)
        pot = PotentialField(grid, "uniform_slope", {"slope_x": 2.0, "slope_y": 0.0,
                                                     "offset": 0.0})
        return StudyScenario(grid, n0, pot, t_star=0.02)

    def test_report(self):
        report = relaxation_limit_study(self._scenario(), [0.2, 0.1, 0.05])
        assert report.complete and report.monotone
        rows = report.rows()
        assert [r[0] for r in rows] == [0.2, 0.1, 0.05]
        assert math.isnan(rows[0][2]) and all(r[2] > 0 for r in rows[1:])
        assert len(report.profiles) == 3

    def test_rejects_other_regimes(self):
        with pytest.raises(ConfigError, match="maxwell_boltzmann"):
            relaxation_limit_study(self._scenario(), [0.1, 0.05], regime="degenerate")

    def test_rejects_non_decreasing_taus(self):
        with pytest.raises(ConfigError, match="decreasing"):
            relaxation_limit_study(self._scenario(), [0.05, 0.1])
