import numpy as np
import pytest
from hypothesis import given
from hypothesis import strategies as st
from scipy.integrate import quad
from scipy.optimize import brentq

from orliczlab import family as FM
from orliczlab.young import linear, llogl, power

T_GRID = np.linspace(0.0, 2.0, 21)


def flow_oracle(F, y0, lam):
    """Solve int_{y0}^{Y} du / (u F(u)) = lam for Y, by scipy quadrature in log u."""
    g = lambda ell: 1.0 / F(np.exp(ell))
    l0 = np.log(y0)
    return np.exp(brentq(lambda l1: quad(g, l0, l1, epsabs=1e-14, epsrel=1e-13)[0] - lam,
                         l0 + 1e-12, l0 + 60, xtol=1e-14))


@pytest.fixture(scope="module")
def beta_family():
    spec = FM.FamilySpec(FM.beta_log_F(2 / 3), power(2), FM.linear_lambda(1.0))
    return spec, FM.build_family(spec)


class TestFunctions:
    def test_log_F(self):
        F = FM.log_F()
        assert float(F.F(np.e)) == 1.0 and F.dF1 == 1.0 and F.d2F1 == -1.0

    def test_beta_log_F_fixed_point(self):
        F = FM.beta_log_F(0.5)
        assert float(F.F(np.array(1.0))) == pytest.approx(0.0, abs=1e-15)
        x = np.array([0.3, 2.0, 50.0])
        h = 1e-6 * x
        assert np.allclose(F.dF(x), (F.F(x + h) - F.F(x - h)) / (2 * h), rtol=1e-7)

    def test_Fr_series_continuity(self):
        F = FM.beta_log_F(0.7)
        assert float(F.Fr(np.array(1e-7))) == pytest.approx(float(F.Fr(np.array(1.1e-6))), rel=1e-5)

    def test_gross_lambda(self):
        lam = FM.gross_lambda(2.0)
        assert lam(0.0) == 0.0
        assert lam(1.0) == pytest.approx(np.log((1 + np.e**2) / 2), rel=1e-15)
        assert lam.deriv(0.5) == pytest.approx((lam(0.5 + 1e-6) - lam(0.5 - 1e-6)) / 2e-6, rel=1e-8)

    def test_table_lambda(self):
        ts = np.linspace(0, 1, 11)
        lam = FM.table_lambda(ts, ts**2)
        assert lam(0.55) == pytest.approx(0.3025, rel=1e-3)


class TestSpec:
    def test_log_square_ok(self):
        rep = FM.validate_spec(FM.FamilySpec(FM.log_F(), power(2), FM.linear_lambda(1.0)))
        assert rep.ok and rep.x2_convexity

    def test_linear_phi0_rejected(self):
        with pytest.raises(FM.FamilySpecError):
            FM.build_family(FM.FamilySpec(FM.log_F(), linear(), FM.linear_lambda(1.0)))


class TestReconstruction:
    def test_power_family(self, gross_family):
        for t in T_GRID:
            x = np.logspace(-2, 2, 81)
            q = 1 + np.exp(2 * t)
            assert np.allclose(gross_family.at(t)(x), x**q, rtol=1e-9)

    def test_linear_lambda_value(self):
        fam = FM.build_family(FM.FamilySpec(FM.log_F(), power(2), FM.linear_lambda(1.0)))
        assert FM.family_eval(fam, 1.0, 2.0, 0) == pytest.approx(2 ** (2 * np.e), rel=1e-10)

    def test_residual_small(self, gross_family):
        assert gross_family.residual < 1e-9

    @pytest.mark.parametrize("x", [0.2, 0.6, 2.0, 5.0])
    def test_beta_family_against_flow(self, beta_family, x):
        spec, fam = beta_family
        F = lambda y: np.log1p(y) ** (2 / 3) - np.log(2) ** (2 / 3)
        oracle = flow_oracle(F, x * x, 0.5) if x > 1 else 1 / flow_oracle(lambda y: -F(1 / y), 1 / (x * x), 0.5)
        assert fam.at(0.5)(np.array(x)) == pytest.approx(oracle, rel=1e-8)

    def test_orders(self, gross_family):
        t, x = 0.4, 1.7
        q = 1 + np.exp(0.8)
        assert FM.family_eval(gross_family, t, x, 1) == pytest.approx(q * x ** (q - 1), rel=1e-9)
        assert FM.family_eval(gross_family, t, x, 2) == pytest.approx(q * (q - 1) * x ** (q - 2), rel=1e-8)
        assert FM.family_eval(gross_family, t, 3.0, "inv") == pytest.approx(3 ** (1 / q), rel=1e-10)
        dq = 2 * np.exp(0.8)
        assert FM.family_eval(gross_family, t, x, "dot") == pytest.approx(dq * np.log(x) * x**q, rel=1e-8)

    def test_bad_order(self, gross_family):
        with pytest.raises(ValueError):
            FM.family_eval(gross_family, 0.1, 1.0, 3)
        with pytest.raises(ValueError):
            FM.family_eval(gross_family, -0.1, 1.0, 0)


class TestValidation:
    def test_gross_family(self, gross_family):
        rep = FM.validate_family(gross_family, T_GRID)
        assert rep.passed(1e-5, 1e-8)

    def test_beta_family(self, beta_family):
        _, fam = beta_family
        assert FM.validate_family(fam, np.linspace(0, 1, 6)).passed(1e-5, 1e-8)

    def test_lp_family(self):
        assert FM.validate_family(FM.gross_lp(), T_GRID).passed(1e-5, 1e-8)

    def test_smoothness(self, beta_family):
        _, fam = beta_family
        assert FM.smoothness_at_x0(fam, np.linspace(0, 1, 6)).ok(1e-3)

    def test_anchor_independence(self, beta_family):
        spec, _ = beta_family
        assert FM.anchor_independence(spec, np.linspace(0, 1, 6)) < 1e-10

    def test_shift_property(self, beta_family):
        spec, _ = beta_family
        assert FM.shift_property(spec, 0.3, np.linspace(0, 1, 6)) < 1e-10

    def test_shift_needs_linear(self):
        with pytest.raises(ValueError):
            FM.shift_property(FM.FamilySpec(FM.log_F(), power(2), FM.gross_lambda(2.0)), 0.3, [0.0])


class TestLp:
    def test_prop_move_constants_equal(self):
        fam = FM.gross_lp(rho=3.0, q0=2.5)
        for t, s in [(0.5, 0.1), (2.0, 0.0), (1.0, 0.7)]:
            C, Ct = FM.prop_move_constants(fam.q, fam.dq, t, s)
            assert C == pytest.approx(Ct, rel=1e-14)

    def test_composed_inverse(self):
        fam = FM.ComposedFamily(FM.gross_lp(), llogl())
        phi = fam.at(0.5)
        y = np.array([0.1, 1.0, 30.0])
        assert np.allclose(phi(phi.inverse(y)), y, rtol=1e-12)

    @given(st.floats(0.0, 3.0), st.floats(0.05, 20.0))
    def test_lp_dot_against_difference(self, t, x):
        fam = FM.gross_lp()
        h = 1e-6
        fd = (fam.at(t + h)(np.array(x)) - fam.at(max(t - h, 0))(np.array(x))) / (t + h - max(t - h, 0))
        assert float(fam.dot(t, np.array(x))) == pytest.approx(float(fd), rel=1e-5, abs=1e-9)


class TestProperties:
    @given(st.floats(0.0, 2.0), st.floats(1e-4, 1e4))
    def test_inverse_roundtrip(self, gross_family, t, y):
        phi = gross_family.at(t)
        assert float(phi(phi.inverse(np.array(y)))) == pytest.approx(y, rel=1e-10)

    @given(st.floats(0.0, 1.9), st.floats(0.01, 1.0), st.floats(0.05, 20.0))
    def test_ordering_about_anchor(self, t, dt, x):
        # Phi_t is decreasing in t below x0 = 1 and increasing above
        fam = FM.gross_lp()
        a, b = float(fam.at(t)(np.array(x))), float(fam.at(t + dt)(np.array(x)))
        assert (b <= a * (1 + 1e-12)) if x < 1 else (b >= a * (1 - 1e-12))

    @given(st.floats(0.0, 2.0))
    def test_anchor_fixed(self, t):
        fam = FM.gross_lp()
        assert float(fam.at(t)(np.array(fam.x0))) == pytest.approx(1.0, abs=1e-14)
