import numpy as np
import pytest

from orliczlab import testfunctions as TF
from orliczlab.records import SlackRecord


class TestBundled:
    def test_count_and_names(self):
        names = [f.name for f in TF.bundled()]
        assert len(names) == 12 and len(set(names)) == 12

    @pytest.mark.parametrize("f", TF.bundled(), ids=lambda f: f.name)
    def test_derivative(self, f):
        x = np.linspace(-4, 4, 33)
        h = 1e-6
        assert np.allclose(f.grad(x), (f(x + h) - f(x - h)) / (2 * h), rtol=1e-6, atol=1e-7)

    @pytest.mark.parametrize("f", TF.nonnegative(), ids=lambda f: f.name)
    def test_nonnegative_flag(self, f):
        assert np.all(f(np.linspace(-10, 10, 2001)) >= 0)

    def test_lookup(self):
        assert TF.by_name("exp_a3").name == "exp_a3"
        assert float(TF.by_name("exp_a3")(np.array(2.0))) == pytest.approx(np.exp(3.0))
        with pytest.raises(KeyError):
            TF.by_name("nope")


class TestRecords:
    def test_orientation(self):
        r = SlackRecord.le("demo", 1.0, 3.0, tol=0.1, k=2)
        assert r.slack == 2.0 and r.passed and r.as_dict()["meta.k"] == 2

    def test_tolerance_edge(self):
        assert SlackRecord.le("demo", 1.05, 1.0, tol=0.1).passed
        assert not SlackRecord.le("demo", 1.2, 1.0, tol=0.1).passed
