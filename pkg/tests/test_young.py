import numpy as np
import pytest
from hypothesis import given
from hypothesis import strategies as st
from scipy.optimize import brentq

from orliczlab import young as Y


CATALOG_ENTRIES = ["lp:1.5", "lp:2", "lp:4", "llogl", "nfunc", "ufunc", "exp_power:2", "exp_linear"]


class TestEval:
    def test_square_at_three(self):
        assert Y.young_eval(Y.power(2), 0, 3.0) == 9.0

    def test_llogl_branches_agree_at_one(self):
        phi = Y.llogl()
        assert float(phi(np.array(1.0))) == 1.0
        left = float(phi(np.array(1 - 1e-12)))
        right = float(phi(np.array(1 + 1e-12)))
        assert abs(left - 1) < 1e-11 and abs(right - 1) < 1e-11

    def test_ufunc_inverse_against_bisection(self):
        U = Y.ufunc()
        oracle = brentq(lambda x: float(U(np.array(x))) - 1.0, 0.0, 10.0, xtol=1e-15)
        assert Y.young_eval(U, "inv", 1.0) == pytest.approx(oracle, rel=1e-12)
        # U(sqrt2) = 1 exactly: the quadratic branch ends there
        assert oracle == pytest.approx(np.sqrt(2), rel=1e-12)

    @pytest.mark.parametrize("name", CATALOG_ENTRIES)
    def test_derivatives_match_differences(self, name):
        phi = Y.from_name(name)
        x = np.array([0.3, 0.7, 1.6, 2.5, 4.0])
        h = 1e-5 * np.maximum(1, x)
        fd1 = (phi(x + h) - phi(x - h)) / (2 * h)
        fd2 = (phi.deriv1(x + h) - phi.deriv1(x - h)) / (2 * h)
        assert np.allclose(phi.deriv1(x), fd1, rtol=1e-6)
        assert np.allclose(phi.deriv2(x), fd2, rtol=1e-6)

    def test_inverse_order_requires_nonnegative(self):
        with pytest.raises(ValueError):
            Y.young_eval(Y.power(2), "inv", -1.0)

    def test_unknown_name(self):
        with pytest.raises(KeyError):
            Y.from_name("nope")


class TestDelta2:
    def test_square(self):
        assert Y.delta2_constant(Y.power(2), np.logspace(-2, 2, 50)) == pytest.approx(4.0)

    @pytest.mark.parametrize("p", [1.5, 3.0, 4.5])
    def test_power(self, p):
        assert Y.delta2_constant(Y.power(p), np.logspace(-2, 2, 50)) == pytest.approx(2**p)

    def test_llogl_against_dense_grid(self):
        phi = Y.llogl()
        K = Y.delta2_constant(phi, np.logspace(-1, 2, 300))
        dense = np.logspace(-1, 2, 200001)
        assert K <= 4.0
        assert K == pytest.approx(float(np.max(phi(2 * dense) / phi(dense))), rel=1e-6)

    def test_zero_on_grid(self):
        with pytest.raises(Y.Delta2Error):
            Y.delta2_constant(Y.power(2), np.array([0.0, 1.0]))


class TestValidate:
    def test_linear_not_nice(self):
        rep = Y.validate_young(Y.power(1))
        assert rep.convex and not rep.nice
        rep = Y.validate_young(Y.linear())
        assert rep.convex and not rep.nice

    def test_exp_square_nice(self):
        assert Y.validate_young(Y.exp_power(2), np.logspace(-3, 1, 200)).nice

    @pytest.mark.parametrize("name", ["lp:1.5", "lp:2", "llogl", "nfunc", "ufunc"])
    def test_catalog_nice(self, name):
        rep = Y.validate_young(Y.from_name(name))
        assert rep.nice and rep.inverse_ok

    def test_ufunc_lower_bounds(self):
        U = Y.ufunc()
        x = np.logspace(-3, 4, 500)
        u = U(x)
        assert np.all(u >= x * x / 2 * (1 - 1e-12))
        assert np.all(u >= x * x * np.maximum(np.log(x * x), 0) / 8)


class TestProperties:
    @given(st.sampled_from(["lp:1.5", "lp:3", "llogl", "nfunc", "ufunc"]), st.floats(1e-3, 1e3))
    def test_sandwich(self, name, x):
        phi = Y.from_name(name)
        K = phi.delta2_K or Y.delta2_constant(phi, np.logspace(-3, 3, 301))
        v = float(phi(np.array(x)))
        xd = x * float(phi.deriv1(np.array(x)))
        assert v * (1 - 1e-9) <= xd <= (K - 1) * v * (1 + 1e-9)

    @given(st.sampled_from(CATALOG_ENTRIES), st.floats(1e-6, 1e6))
    def test_inverse_roundtrip(self, name, y):
        phi = Y.from_name(name)
        x = phi.inverse(np.array(y))
        assert float(phi(x)) == pytest.approx(y, rel=1e-8)

    @given(st.sampled_from(CATALOG_ENTRIES), st.floats(1e-3, 10), st.floats(1e-3, 10))
    def test_inverse_increasing(self, name, a, b):
        phi = Y.from_name(name)
        lo, hi = min(a, b), max(a, b)
        assert float(phi.inverse(np.array(lo))) <= float(phi.inverse(np.array(hi)))

    @given(st.sampled_from(CATALOG_ENTRIES), st.floats(-20, 20))
    def test_even(self, name, x):
        phi = Y.from_name(name)
        assert float(phi(np.array(x))) == float(phi(np.array(-x)))
