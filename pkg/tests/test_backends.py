"""The numba kernels and their numpy mirror must agree to rounding."""
import os
import subprocess
import sys

import numpy as np
import pytest

from mepgraphene import kernels

pytestmark = pytest.mark.skipif(kernels.numba_kernels is None, reason="numba backend inactive")
NB, NP = kernels.numba_kernels, kernels.numpy_kernels


def _ab(rng, count=200):
    a = rng.uniform(-60, 200, count)
    b = rng.uniform(0, 1.8, count) * np.maximum(np.abs(a), 1.0)
    b[::17] = 0.0
    return a, b


def test_phi_table(rng):
    z = np.concatenate([rng.uniform(-800, 800, 500), rng.uniform(-2, 2, 500), [0.0, -0.69]])
    np.testing.assert_allclose(NB.phi_table(z), NP.phi_table(z), rtol=2e-14, atol=0)


def test_theta_nodes(rng):
    a, b = _ab(rng)
    t1, w1 = NB.theta_nodes(a, b)
    t2, w2 = NP.theta_nodes(a, b)
    np.testing.assert_allclose(t1, t2, rtol=1e-13, atol=1e-14)
    np.testing.assert_allclose(w1, w2, rtol=1e-12, atol=1e-300)


def test_angular_tables(rng):
    a, b = _ab(rng)
    t1, t2 = NB.angular_table_batch(a, b), NP.angular_table_batch(a, b)
    scale = t2[:, :, :1]
    assert np.max(np.abs(t1 - t2) / scale) < 1e-13


def test_newton(rng):
    u = rng.uniform(0, 0.95, 50)
    g = rng.uniform(1.9, 3.0, 50)
    a0, b0 = np.zeros(50), np.ones(50)
    r1, r2 = NB.newton_ab_batch(u, g, a0, b0, 1e-12, 50), NP.newton_ab_batch(u, g, a0, b0,
                                                                              1e-12, 50)
    ok = (r1[2] <= 1e-12) & (r2[2] <= 1e-12)
    assert ok.mean() > 0.9
    np.testing.assert_allclose(r1[0][ok], r2[0][ok], rtol=1e-9, atol=1e-9)
    np.testing.assert_allclose(r1[1][ok], r2[1][ok], rtol=1e-9, atol=1e-9)


def test_oracle_sums():
    args = (3.0, 2.0, -1.0, 0.8, 512, 50, 70.0)
    np.testing.assert_allclose(NB.oracle_sums(*args), NP.oracle_sums(*args), rtol=1e-12,
                               atol=1e-14)


@pytest.mark.parametrize("value,expect", [("numpy", "numpy"), ("numba", "numba")])
def test_environment_selects_backend(value, expect):
    env = dict(os.environ, MEPGRAPHENE_BACKEND=value)
    out = subprocess.run([sys.executable, "-c", "import mepgraphene; print(mepgraphene.BACKEND)"],
                         env=env, capture_output=True, text=True, check=True)
    assert out.stdout.strip() == expect


def test_bad_backend_name_fails_loudly():
    env = dict(os.environ, MEPGRAPHENE_BACKEND="fortran")
    out = subprocess.run([sys.executable, "-c", "import mepgraphene"], env=env,
                         capture_output=True, text=True)
    assert out.returncode != 0 and "MEPGRAPHENE_BACKEND" in out.stderr
