import math

import numpy as np
import pytest

from mepgraphene import (
    Multipliers, QuadratureSpec, QuadratureSpecError, closure_exact, multipliers_to_moments,
    oracle_moments,
)
from mepgraphene.closure import thermal_density
from mepgraphene.oracle import angular_count
from scipy import special


def test_spec_validation():
    with pytest.raises(QuadratureSpecError):
        QuadratureSpec(radial_nodes=2)
    with pytest.raises(QuadratureSpecError):
        QuadratureSpec(radial_cutoff=-1.0)
    assert QuadratureSpec().doubled().radial_nodes == 800


def test_angular_count_grows_with_b():
    spec = QuadratureSpec()
    assert angular_count(spec, 0.0) == 512
    assert angular_count(spec, 200.0) >= 24 * 200
    assert angular_count(QuadratureSpec(auto_angular=False), 200.0) == 512


def test_short_cutoff_is_rejected():
    with pytest.raises(QuadratureSpecError, match="tail"):
        oracle_moments(Multipliers(0.0, [1.0, 0.0], 1.0), QuadratureSpec(radial_cutoff=5.0))


def test_boltzmann_density_in_closed_form():
    # independent of every Fermi-integral routine: n = n_T e^A I_0(B) + O(e^2A)
    m = Multipliers(-25.0, [3.0, 0.0], 1.7)
    st, _ = oracle_moments(m)
    ref = thermal_density(1.7) * math.exp(-25.0) * special.iv(0, 3.0)
    assert st.n == pytest.approx(ref, rel=1e-9)
    assert st.u[0] == pytest.approx(special.iv(1, 3.0) / special.iv(0, 3.0), rel=1e-9)
    assert st.e == pytest.approx(2 * 1.7, rel=1e-9)


def test_resolution_converged():
    m = Multipliers(40.0, [-20.0, 55.0], 0.7)
    s1, c1 = oracle_moments(m)
    s2, c2 = oracle_moments(m, QuadratureSpec().doubled())
    assert s1.n == pytest.approx(s2.n, rel=1e-12)
    np.testing.assert_allclose(c1.q, c2.q, rtol=1e-11)


@pytest.mark.parametrize("a,b", [(-15.0, 3.0), (0.0, 0.5), (10.0, 14.0), (150.0, 100.0)])
def test_agrees_with_closure(a, b):
    m = Multipliers(a, [0.0, b], 1.3)
    st = multipliers_to_moments(m)
    cl = closure_exact(st, m)
    ost, ocl = oracle_moments(m)
    assert ost.n == pytest.approx(st.n, rel=1e-10)
    assert ost.e == pytest.approx(st.e, rel=1e-10)
    np.testing.assert_allclose(ocl.p, cl.p, rtol=1e-10, atol=1e-12 * st.n)
    np.testing.assert_allclose(ocl.q, cl.q, rtol=1e-10, atol=1e-12 * np.max(cl.q))
    np.testing.assert_allclose(ocl.s_flux, cl.s_flux, rtol=1e-10, atol=1e-12 * st.n * st.e)
