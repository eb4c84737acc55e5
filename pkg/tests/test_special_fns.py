import math

import mpmath as mp
import numpy as np
import pytest
from hypothesis import given, settings, strategies as st
from scipy import integrate, special

from mepgraphene import (
    DomainError, angular_fermi, angular_fermi_table, bessel_i, degenerate_angular,
    fermi_integral, fermi_integral_inverse,
)
from mepgraphene.special_fns import (
    AngularFermiArgs, PolarMultiplier, bessel_ratio_inverse, critical_angle,
    critical_angle_psi, degenerate_table,
)

mp.mp.dps = 20


def mp_phi(s, z):
    return float(mp.re(-mp.polylog(s, -mp.e ** mp.mpf(z))))


def mp_angular(n, s, a, b):
    f = lambda t: mp.cos(n * t) * mp.re(-mp.polylog(s, -mp.e ** (a + b * mp.cos(t))))
    edge = [0, mp.pi]
    if -b < a < b:
        edge = [0, mp.acos(-mp.mpf(a) / b), mp.pi]
    return float(mp.quad(f, edge) / mp.pi)


class TestFermiIntegral:
    def test_closed_forms_at_zero(self):
        assert fermi_integral(0, 0.0) == pytest.approx(0.5, rel=1e-15)
        assert fermi_integral(1, 0.0) == pytest.approx(math.log(2), rel=1e-15)
        assert fermi_integral(2, 0.0) == pytest.approx(math.pi ** 2 / 12, rel=1e-15)
        assert fermi_integral(3, 0.0) == pytest.approx(0.75 * 1.2020569031595942, rel=1e-15)

    @pytest.mark.parametrize("s", [1, 2, 3])
    @pytest.mark.parametrize("z", [-700.0, -50.0, -3.1, -0.6, -1e-3, 0.4, 2.5, 9.0, 37.0, 400.0])
    def test_integer_orders_against_polylog(self, s, z):
        assert fermi_integral(s, z) == pytest.approx(mp_phi(s, z), rel=1e-13)

    @pytest.mark.parametrize("s", [0.5, 1.5, 2.5])
    @pytest.mark.parametrize("z", [-20.0, -1.0, 0.3, 6.0, 40.0])
    def test_fractional_orders(self, s, z):
        assert fermi_integral(s, z) == pytest.approx(mp_phi(s, z), rel=1e-10)

    def test_vectorised_shape(self):
        z = np.linspace(-5, 5, 12).reshape(3, 4)
        out = fermi_integral(2, z)
        assert out.shape == (3, 4)
        assert out[1, 2] == fermi_integral(2, float(z[1, 2]))

    def test_boltzmann_tail(self):
        assert fermi_integral(2, -40.0) == pytest.approx(math.exp(-40.0), rel=1e-15)

    def test_rejects_bad_input(self):
        with pytest.raises(DomainError):
            fermi_integral(-1.0, 0.0)
        with pytest.raises(DomainError):
            fermi_integral(2, float("nan"))

    @given(st.floats(-60, 60), st.floats(1e-3, 5.0))
    @settings(max_examples=60, deadline=None)
    def test_strictly_increasing(self, z, dz):
        for s in (1, 2, 3):
            assert fermi_integral(s, z + dz) > fermi_integral(s, z)

    @given(st.floats(-30, 30))
    @settings(max_examples=60, deadline=None)
    def test_derivative_lowers_order(self, z):
        h = 1e-5
        for s in (2, 3):
            d = (fermi_integral(s, z + h) - fermi_integral(s, z - h)) / (2 * h)
            assert d == pytest.approx(fermi_integral(s - 1, z), rel=1e-7, abs=1e-300)


class TestFermiInverse:
    def test_examples(self):
        assert fermi_integral_inverse(2, math.pi ** 2 / 12) == pytest.approx(0.0, abs=1e-13)
        assert fermi_integral_inverse(1, math.log(2)) == pytest.approx(0.0, abs=1e-13)
        y = 1e-9
        assert fermi_integral_inverse(2, y) == pytest.approx(math.log(y), rel=1e-8)

    @pytest.mark.parametrize("s", [1, 2, 3, 1.5])
    def test_twelve_decades(self, s):
        y = np.logspace(-6, 6, 25)
        z = fermi_integral_inverse(s, y)
        np.testing.assert_allclose(fermi_integral(s, z), y, rtol=1e-10)

    def test_domain(self):
        with pytest.raises(DomainError):
            fermi_integral_inverse(2, 0.0)
        with pytest.raises(DomainError):
            fermi_integral_inverse(2, -1.0)


class TestBessel:
    def test_examples(self):
        assert bessel_i(0, 0.0) == 1.0
        assert bessel_i(1, 0.0) == 0.0
        ref = integrate.quad(lambda t: math.cos(2 * t) * math.exp(1.5 * math.cos(t)),
                             0, math.pi, epsabs=0, epsrel=1e-13)[0] / math.pi
        assert bessel_i(2, 1.5) == pytest.approx(ref, rel=1e-12)

    def test_domain(self):
        with pytest.raises(DomainError):
            bessel_i(-1, 1.0)
        with pytest.raises(DomainError):
            bessel_i(0, -1.0)

    @pytest.mark.parametrize("u", [0.0, 1e-6, 0.1, 0.5, 0.9, 0.999, 0.999999])
    def test_ratio_inverse(self, u):
        b = bessel_ratio_inverse(u)
        got = special.ive(1, b) / special.ive(0, b) if b > 0 else 0.0
        assert got == pytest.approx(u, rel=1e-13, abs=1e-15)
        with pytest.raises(DomainError):
            bessel_ratio_inverse(1.0)


class TestAngularFermi:
    def test_isotropic_reduces_to_phi(self):
        for a in (-8.0, 0.0, 3.0, 60.0):
            assert angular_fermi(n=0, s=2, a=a, b=0.0) == pytest.approx(fermi_integral(2, a),
                                                                        rel=1e-13)
            assert angular_fermi(n=1, s=2, a=a, b=0.0) == pytest.approx(0.0, abs=1e-14)

    def test_boltzmann_example(self):
        ref = math.exp(-10.0) * special.iv(1, 2.0)
        assert angular_fermi(AngularFermiArgs(1, 2, -10.0, 2.0)) == pytest.approx(ref, rel=1e-4)

    @pytest.mark.parametrize("a,b", [(-3.0, 1.0), (0.0, 2.0), (2.0, 5.0), (30.0, 45.0),
                                     (-20.0, 35.0), (100.0, 10.0)])
    def test_against_adaptive_quadrature(self, a, b):
        t = angular_fermi_table(a, b)
        for s in (1, 2, 3):
            for n in (0, 1, 2, 3):
                ref = mp_angular(n, s, a, b)
                assert t[s, n] == pytest.approx(ref, rel=1e-10, abs=1e-12 * t[s, 0])

    def test_fractional_order(self):
        f = lambda t: mp.cos(t) * mp.re(-mp.fp.polylog(1.5, -mp.e ** (0.7 + 2 * mp.cos(t))))
        ref = mp.fp.quad(f, [0, mp.fp.acos(-0.35), mp.fp.pi]) / mp.fp.pi
        assert angular_fermi(n=1, s=1.5, a=0.7, b=2.0) == pytest.approx(ref, rel=1e-9)

    def test_higher_harmonic_uses_generic_path(self):
        ref = mp_angular(5, 2, 1.0, 4.0)
        assert angular_fermi(n=5, s=2, a=1.0, b=4.0) == pytest.approx(ref, rel=1e-8)

    def test_boltzmann_correction_is_next_polylog_term(self):
        # phi_s(z) = e^z - e^2z / 2^s + ..., so the deviation from e^A I_N(B)
        # is the B-doubled term; this pins the function down at the 1e-6 level
        for a, b in ((-6.0, 1.0), (-5.0, 0.0), (-12.0, 7.0)):
            t = angular_fermi_table(a, b)
            for s in (1, 2, 3):
                for n in (0, 1, 2):
                    two = math.exp(a) * special.iv(n, b) - math.exp(2 * a) * special.iv(
                        n, 2 * b) / 2 ** s
                    three = math.exp(3 * a) * special.iv(n, 3 * b) / 3 ** s
                    assert abs(t[s, n] - two) <= 1.5 * three + 1e-15 * t[s, 0]

    @given(st.floats(-30, 80), st.floats(0, 100))
    @settings(max_examples=80, deadline=None)
    def test_harmonics_bounded_by_zeroth(self, a, b):
        t = angular_fermi_table(a, b)
        assert np.all(t[:, 0] > 0)
        assert np.all(np.abs(t[1:, 1:]) <= t[1:, :1] * (1 + 1e-12))

    @given(st.floats(-30, 60), st.floats(0, 60), st.floats(1e-3, 2))
    @settings(max_examples=60, deadline=None)
    def test_zeroth_increasing_in_a(self, a, b, da):
        assert angular_fermi_table(a + da, b)[2, 0] > angular_fermi_table(a, b)[2, 0]

    def test_deterministic(self):
        ab = (12.3, 17.9)
        assert np.array_equal(angular_fermi_table(*ab), angular_fermi_table(*ab))

    def test_argument_validation(self):
        with pytest.raises(DomainError):
            AngularFermiArgs(-1, 2, 0.0, 1.0)
        with pytest.raises(DomainError):
            AngularFermiArgs(1, 0.0, 0.0, 1.0)
        with pytest.raises(DomainError):
            AngularFermiArgs(1, 2, 0.0, -1.0)


class TestCriticalAngle:
    def test_examples(self):
        assert critical_angle(2.0, 1.0) == math.pi
        assert critical_angle(0.0, 1.0) == pytest.approx(math.pi / 2)
        assert critical_angle(-2.0, 1.0) == 0.0
        with pytest.raises(DomainError):
            critical_angle(0.0, 0.0)

    def test_polar_form_agrees(self):
        for psi in np.linspace(0.01, 0.74 * math.pi, 17):
            assert critical_angle_psi(psi) == pytest.approx(
                critical_angle(math.cos(psi), math.sin(psi)), abs=1e-12)

    def test_polar_multiplier(self):
        pm = PolarMultiplier.from_ab(3.0, 4.0)
        assert (pm.r, pm.a, pm.b) == pytest.approx((5.0, 3.0, 4.0))
        with pytest.raises(DomainError):
            PolarMultiplier(1.0, 0.8 * math.pi)


class TestDegenerate:
    def test_examples(self):
        assert degenerate_angular(0, 2, 0.0) == pytest.approx(0.5, rel=1e-15)
        assert degenerate_angular(1, 2, 0.0) == pytest.approx(0.0, abs=1e-15)
        psi = math.pi / 3
        c = critical_angle_psi(psi)
        ref = integrate.quad(lambda t: math.cos(2 * t) * (math.cos(psi) + math.sin(psi)
                                                           * math.cos(t)) ** 3, 0, c,
                             epsabs=0, epsrel=1e-13)[0] / (math.pi * 6)
        assert degenerate_angular(2, 3, psi) == pytest.approx(ref, rel=1e-12)

    def test_table_matches_scalar_for_fractional_order(self):
        psi = 1.1
        c = critical_angle_psi(psi)
        ref = integrate.quad(lambda t: math.cos(t) * (math.cos(psi) + math.sin(psi)
                                                       * math.cos(t)) ** 2.5, 0, c,
                             epsabs=0, epsrel=1e-13)[0] / (math.pi * math.gamma(3.5))
        assert degenerate_angular(1, 2.5, psi) == pytest.approx(ref, rel=1e-10)

    def test_domain(self):
        with pytest.raises(DomainError):
            degenerate_angular(0, 2, 0.75 * math.pi)
        with pytest.raises(DomainError):
            degenerate_table(np.array([-0.1]))

    def test_scaling_limit(self):
        for psi in (0.2, 1.0, 2.0):
            f = degenerate_table(psi)
            t = angular_fermi_table(400 * math.cos(psi), 400 * math.sin(psi))
            assert t[2, 0] / (400 ** 2 * f[2, 0]) == pytest.approx(1.0, abs=1e-2)
