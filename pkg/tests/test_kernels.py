import os
import subprocess
import sys

import numpy as np
import pytest

from sedpilot import _accel, kernels
from sedpilot.slit_sim import SlitGeometry

pytestmark = pytest.mark.skipif(not _accel.HAS_NUMBA, reason="numba not installed")


@pytest.fixture(scope="module")
def setup():
    lam = 1.0
    g = SlitGeometry.in_wavelengths(lam, aperture_samples_per_slit=16)
    src_y, src_w = g.sources()
    det = g.detector_grid(401)
    k = 2 * np.pi / lam
    K = kernels.propagator(src_y, src_w, det.points(), g.screen_distance, k)
    rng = np.random.default_rng(11)
    phases = rng.uniform(0, 2 * np.pi, (64, 8))
    sins = np.sin(rng.uniform(-0.1, 0.1, (64, 8)))
    u = rng.random(64)
    return K, src_y, k, phases, sins, u, det


def test_intensity_paths_agree(setup):
    K, src_y, k, phases, sins, _, _ = setup
    a = kernels.intensity_numba(K, src_y, k, phases, sins)
    b = kernels.intensity_numpy(K, src_y, k, phases, sins)
    np.testing.assert_allclose(a, b, rtol=1e-10, atol=1e-12 * b.max())


def test_arrival_paths_agree(setup):
    K, src_y, k, phases, sins, u, det = setup
    a = kernels.arrivals_numba(K, src_y, k, phases, sins, u, det.x_min, det.spacing)
    b = kernels.arrivals_numpy(K, src_y, k, phases, sins, u, det.x_min, det.spacing, chunk=7)
    np.testing.assert_allclose(a, b, rtol=0, atol=1e-8)


def _brute_force_quantile(dens, x0, h, u, refine=200):
    """Invert the CDF of the linearly interpolated density on a much finer grid."""
    x = x0 + h * np.arange(dens.size)
    xf = np.linspace(x[0], x[-1], (dens.size - 1) * refine + 1)
    f = np.interp(xf, x, dens)
    cdf = np.concatenate([[0.0], np.cumsum(0.5 * (f[1:] + f[:-1]) * np.diff(xf))])
    return np.interp(u * cdf[-1], cdf, xf)


@pytest.mark.parametrize("impl", [kernels.inverse_cdf_numba, kernels.inverse_cdf_numpy])
def test_inverse_cdf_against_brute_force(impl):
    rng = np.random.default_rng(2)
    dens = rng.random((5, 40)) ** 3
    dens[2, :20] = 0.0
    dens[3, 10:30] = 1.0
    u = rng.random(5)
    got = impl(dens, -1.0, 0.25, u)
    want = np.array([_brute_force_quantile(dens[i], -1.0, 0.25, u[i]) for i in range(5)])
    np.testing.assert_allclose(got, want, atol=1e-6)


@pytest.mark.parametrize("impl", [kernels.inverse_cdf_numba, kernels.inverse_cdf_numpy])
def test_inverse_cdf_zero_density_is_nan(impl):
    assert np.isnan(impl(np.zeros((1, 10)), 0.0, 1.0, np.array([0.3]))[0])


def test_env_flag_selects_numpy_path():
    code = "from sedpilot import _accel; print(_accel.USE_NUMBA)"
    env = dict(os.environ, SEDPILOT_DISABLE_NUMBA="1")
    out = subprocess.run([sys.executable, "-c", code], env=env, capture_output=True, text=True, check=True)
    assert out.stdout.strip() == "False"
    env["SEDPILOT_DISABLE_NUMBA"] = "0"
    out = subprocess.run([sys.executable, "-c", code], env=env, capture_output=True, text=True, check=True)
    assert out.stdout.strip() == "True"


def test_dispatch_follows_flag(setup, monkeypatch):
    K, src_y, k, phases, sins, u, det = setup
    monkeypatch.setattr(_accel, "USE_NUMBA", False)
    a = kernels.arrivals(K, src_y, k, phases, sins, u, det.x_min, det.spacing)
    monkeypatch.setattr(_accel, "USE_NUMBA", True)
    b = kernels.arrivals(K, src_y, k, phases, sins, u, det.x_min, det.spacing)
    np.testing.assert_allclose(a, b, atol=1e-8)
