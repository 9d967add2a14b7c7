import numpy as np
import pytest
from scipy.interpolate import CubicHermiteSpline
from scipy.linalg import solve_banded

from orliczlab import _kernels as K

PATHS = [False] + ([True] if K.HAVE_NUMBA and K.numba_enabled() else [])


def laplacian(n, h=0.1):
    sub = np.full(n, 1 / h**2)
    sup = np.full(n, 1 / h**2)
    sub[0] = sup[-1] = 0.0
    diag = -(sub + sup)
    return sub, diag, sup


def reference_march(sub, diag, sup, u, h, nsteps, theta):
    """Dense-banded solve with scipy, one step at a time."""
    n = u.size
    ab = np.zeros((3, n))
    ab[0, 1:] = -theta * h * sup[:-1]
    ab[1] = 1 - theta * h * diag
    ab[2, :-1] = -theta * h * sub[1:]
    for _ in range(nsteps):
        Lu = diag * u
        Lu[1:] += sub[1:] * u[:-1]
        Lu[:-1] += sup[:-1] * u[1:]
        u = solve_banded((1, 1), ab, u + (1 - theta) * h * Lu)
    return u


class TestSelection:
    def test_env_disables(self, monkeypatch):
        monkeypatch.setenv(K.DISABLE_ENV, "1")
        assert not K.numba_enabled()
        monkeypatch.setenv(K.DISABLE_ENV, "0")
        assert K.numba_enabled() == K.HAVE_NUMBA


class TestThetaMarch:
    @pytest.mark.parametrize("use_numba", PATHS)
    @pytest.mark.parametrize("theta", [0.5, 1.0])
    def test_against_banded_solve(self, use_numba, theta):
        rng = np.random.default_rng(3)
        sub, diag, sup = laplacian(200)
        u0 = rng.standard_normal(200)
        got = K.theta_march(sub, diag, sup, u0, 1e-3, 25, theta, use_numba=use_numba)
        ref = reference_march(sub, diag, sup, u0, 1e-3, 25, theta)
        assert np.allclose(got, ref, rtol=1e-12, atol=1e-12)

    @pytest.mark.parametrize("use_numba", PATHS)
    def test_zero_steps_copy(self, use_numba):
        u0 = np.ones(5)
        out = K.theta_march(*laplacian(5), u0, 0.1, 0, use_numba=use_numba)
        assert out is not u0 and np.array_equal(out, u0)

    def test_paths_agree(self):
        sub, diag, sup = laplacian(500)
        u0 = np.sin(np.linspace(0, 7, 500))
        a = K.theta_march(sub, diag, sup, u0, 1e-3, 50, use_numba=True)
        b = K.theta_march(sub, diag, sup, u0, 1e-3, 50, use_numba=False)
        assert np.max(np.abs(a - b)) < 1e-12


class TestHermite:
    @pytest.mark.parametrize("use_numba", PATHS)
    def test_uniform_against_scipy(self, use_numba):
        x = np.linspace(0, 3, 31)
        y, dy = np.sin(x), np.cos(x)
        xq = np.linspace(0.01, 2.99, 257)
        ref = CubicHermiteSpline(x, y, dy)(xq)
        got = K.hermite_uniform(0.0, 0.1, y, dy, xq, use_numba=use_numba)
        assert np.allclose(got, ref, rtol=1e-12, atol=1e-14)

    @pytest.mark.parametrize("use_numba", PATHS)
    def test_nonuniform_against_scipy(self, use_numba):
        x = np.cumsum(np.linspace(0.05, 0.3, 25))
        y, dy = np.exp(-x), -np.exp(-x)
        xq = np.linspace(x[0], x[-1], 301).reshape(7, 43)
        got = K.hermite_nonuniform(x, y, dy, xq, use_numba=use_numba)
        assert got.shape == xq.shape
        assert np.allclose(got, CubicHermiteSpline(x, y, dy)(xq), rtol=1e-12, atol=1e-14)

    @pytest.mark.parametrize("use_numba", PATHS)
    def test_linear_continuation(self, use_numba):
        y, dy = np.array([0.0, 1.0]), np.array([2.0, 3.0])
        got = K.hermite_uniform(0.0, 1.0, y, dy, np.array([-1.0, 2.0]), use_numba=use_numba)
        assert np.allclose(got, [-2.0, 4.0])

    def test_paths_agree(self):
        x = np.linspace(-1, 1, 41)
        xq = np.linspace(-1.2, 1.2, 999)
        a = K.hermite_uniform(-1.0, 0.05, x**3, 3 * x**2, xq, use_numba=True)
        b = K.hermite_uniform(-1.0, 0.05, x**3, 3 * x**2, xq, use_numba=False)
        assert np.max(np.abs(a - b)) < 1e-13
