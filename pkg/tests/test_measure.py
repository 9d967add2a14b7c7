import numpy as np
import pytest
from hypothesis import given
from hypothesis import strategies as st
from scipy.integrate import quad

from orliczlab import measure as M


class TestIntegrate:
    @pytest.mark.parametrize("g,expected", [(lambda x: 1 + 0 * x, 1.0), (lambda x: x**2, 1.0), (lambda x: x**4, 3.0)])
    def test_gaussian_moments(self, g, expected):
        v, err = M.integrate(g, M.gaussian())
        assert v == pytest.approx(expected, abs=1e-12)
        assert err < 1e-10

    def test_hermite_rule_agrees(self):
        v, _ = M.integrate(lambda x: x**6, M.as_discrete(M.gaussian(), M.gauss_hermite(80)))
        assert v == pytest.approx(15.0, rel=1e-12)

    def test_tolerance_error(self):
        with pytest.raises(M.QuadratureError):
            M.integrate(lambda x: np.cos(40 * x), M.gaussian(), M.gauss_legendre(-8, 8, 2, 4), tol=1e-12)

    @pytest.mark.parametrize("pot", [M.gaussian(), M.build_u_alpha(1.5), M.polynomial_potential([0, 0, 0.5, 0, 0.25])])
    def test_normalisation(self, pot):
        assert pot.normalization_error() < 1e-8
        dm = pot.discretize()
        assert dm.weights.sum() == pytest.approx(1.0, abs=1e-14)

    def test_ualpha_against_scipy(self):
        pot = M.build_u_alpha(1.5)
        Z = quad(lambda x: np.exp(-float(pot.V(np.array(x)))), -40, 40, points=[-1, 1], limit=400)[0]
        m2 = quad(lambda x: x * x * np.exp(-float(pot.V(np.array(x)))), -40, 40, points=[-1, 1], limit=400)[0] / Z
        v, _ = M.integrate(lambda x: x**2, pot)
        assert v == pytest.approx(m2, rel=1e-9)
        assert pot.Z == pytest.approx(Z, rel=1e-10)


class TestUAlpha:
    def test_limit_coefficients(self):
        c4, c2, c0 = M.u_alpha_coefficients(2.0)
        assert (c4, c2, c0) == (0.0, 1.0, 0.0)

    def test_value_and_slope_at_one(self):
        pot = M.build_u_alpha(1.5)
        c4, c2, c0 = M.u_alpha_coefficients(1.5)
        assert c4 + c2 + c0 == pytest.approx(1.0, abs=1e-15)
        assert 4 * c4 + 2 * c2 == pytest.approx(1.5, abs=1e-15)
        assert float(pot.V(np.array(1 - 1e-13))) == pytest.approx(1.0, abs=1e-12)
        assert float(pot.grad(np.array(1 - 1e-12))) == pytest.approx(1.5, abs=1e-10)
        assert float(pot.grad(np.array(1 + 1e-12))) == pytest.approx(1.5, abs=1e-10)

    def test_range(self):
        for a in (1.0, 2.0, 0.5):
            with pytest.raises(ValueError):
                M.build_u_alpha(a)


class TestEntropy:
    def test_constant(self):
        assert M.entropy(lambda x: 4 + 0 * x, M.gaussian()) == pytest.approx(0.0, abs=1e-13)

    def test_exponential(self):
        # Ent(e^x) = int x e^x dgamma - e^{1/2} * 1/2 = e^{1/2}/2
        assert M.entropy(lambda x: np.exp(x), M.gaussian()) == pytest.approx(0.5 * np.exp(0.5), rel=1e-12)

    def test_smoothed_indicator(self):
        g = lambda x: (0.5 * (1 + np.tanh(4 * x))) ** 2
        v = M.entropy(g, M.gaussian())
        fine = M.entropy(g, M.gaussian().discretize(level=2))
        assert v == pytest.approx(fine, rel=1e-12)
        mass = quad(lambda x: g(x) * np.exp(-x * x / 2) / np.sqrt(2 * np.pi), -12, 12, limit=400)[0]
        glog = quad(lambda x: g(x) * np.log(g(x)) * np.exp(-x * x / 2) / np.sqrt(2 * np.pi) if g(x) > 0 else 0.0,
                    -12, 12, limit=400)[0]
        assert v == pytest.approx(glog - mass * np.log(mass), rel=1e-8)

    def test_zero_mass(self):
        with pytest.raises(ValueError):
            M.entropy(lambda x: 0 * x, M.gaussian())

    @pytest.mark.parametrize("a", [0.5, 1.0, 2.0])
    def test_lsi_saturation(self, a):
        ent = M.entropy(lambda x: np.exp(a * x), M.gaussian())
        energy, _ = M.integrate(lambda x: (a / 2) ** 2 * np.exp(a * x), M.gaussian())
        assert ent == pytest.approx(2 * energy, rel=1e-6)

    @given(st.floats(0.1, 10), st.floats(-1.5, 1.5))
    def test_homogeneity(self, c, a):
        mu = M.gaussian()
        g = lambda x: np.exp(a * x) * (1 + 0.5 * np.sin(x))
        e1 = M.entropy(g, mu)
        assert e1 >= -1e-12
        assert M.entropy(lambda x: c * g(x), mu) == pytest.approx(c * e1, rel=1e-9, abs=1e-12)


class TestFamily:
    def test_time_derivative_matches_fd(self):
        fam = M.inhomog_example()
        x = np.linspace(-5, 5, 11)
        for t in (0.2, 0.7):
            fd = (fam.V(t + 1e-5, x) - fam.V(t - 1e-5, x)) / 2e-5
            assert np.allclose(fam.dV(t, x), fd, rtol=1e-4, atol=1e-10)

    def test_frozen_potentials_valid(self):
        fam = M.inhomog_example()
        for t in (0.0, 0.5, 1.0):
            pot = fam.at(t)
            assert pot.normalization_error() < 1e-8
            grid = np.linspace(-pot.radius, pot.radius, 4001)
            assert np.all(pot.hess(grid) >= fam.hess_lb(t) - 1e-12)

    def test_from_name(self):
        assert M.from_name("u_alpha:1.5").params["alpha"] == 1.5
        with pytest.raises(KeyError):
            M.from_name("cauchy")
