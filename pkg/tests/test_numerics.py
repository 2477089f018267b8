import math

import numpy as np
import pytest

from recfosm.errors import BracketError, ModelError, QuadratureError
from recfosm.numerics import find_root_bracketed, finite_diff, integrate_semi_infinite


class TestIntegrateSemiInfinite:
    def test_exponential(self):
        res = integrate_semi_infinite(lambda z: math.exp(-z))
        assert res.value == pytest.approx(1.0, abs=1e-10)
        assert res.abs_residual <= 1e-9
        assert res.evaluations > 0

    def test_gaussian_moment(self):
        res = integrate_semi_infinite(lambda z: z * math.exp(-z * z / 2))
        assert res.value == pytest.approx(1.0, abs=1e-10)

    def test_slow_tail(self):
        res = integrate_semi_infinite(lambda z: 1.0 / (1.0 + z) ** 2)
        assert res.value == pytest.approx(1.0, abs=1e-10)

    def test_reciprocal_mean_uniform(self):
        # mean of 1/X for X ~ U(1, 2): integrand (1/z) f_X(1/z) on z in [0.5, 1]
        f = lambda z: 1.0 / z if 0.5 <= z <= 1.0 else 0.0  # noqa: E731
        res = integrate_semi_infinite(f, breakpoints=[0.5, 1.0])
        assert res.value == pytest.approx(math.log(2), abs=1e-9)

    def test_deterministic(self):
        f = lambda z: math.exp(-z) * math.sin(z) ** 2  # noqa: E731
        assert integrate_semi_infinite(f) == integrate_semi_infinite(f)

    def test_divergent_tail(self):
        with pytest.raises(QuadratureError) as err:
            integrate_semi_infinite(lambda z: 1.0 / (1.0 + z))
        assert math.isfinite(err.value.partial_value) or math.isnan(err.value.partial_value)

    def test_divergent_origin(self):
        with pytest.raises(QuadratureError):
            integrate_semi_infinite(lambda z: 1.0 / z if z > 0 else 0.0)

    def test_budget(self):
        with pytest.raises(QuadratureError):
            integrate_semi_infinite(lambda z: math.exp(-z) * (1 + math.sin(1e4 * z)), max_evaluations=500)


class TestFindRoot:
    def test_linear(self):
        assert find_root_bracketed(lambda x: x - 2, 0, 5) == pytest.approx(2.0, abs=1e-12)

    def test_sqrt2(self):
        assert find_root_bracketed(lambda x: x * x - 2, 1, 2) == pytest.approx(math.sqrt(2), abs=1e-10)

    def test_no_sign_change(self):
        with pytest.raises(BracketError):
            find_root_bracketed(lambda x: x * x + 1, -1, 1)

    def test_endpoint_root(self):
        assert find_root_bracketed(lambda x: x - 1, 1, 3) == 1.0


class TestFiniteDiff:
    def test_sum_of_squares(self):
        g = finite_diff(lambda x: float(np.sum(x**2)), np.array([1.0, 2.0]))
        np.testing.assert_allclose(g, [2.0, 4.0], atol=1e-6)

    def test_constant(self):
        g = finite_diff(lambda x: 3.0, np.array([1.0, -4.0, 1e3]))
        np.testing.assert_allclose(g, 0.0, atol=1e-9)

    def test_hessian_diag(self):
        h = finite_diff(lambda x: x[0] ** 3 + 2 * x[1] ** 2, np.array([2.0, 5.0]), "hessian_diag")
        np.testing.assert_allclose(h, [12.0, 4.0], rtol=1e-5)

    def test_nonfinite(self):
        with pytest.raises(ModelError) as err:
            finite_diff(lambda x: 1.0 / x[0] if x[0] > 0 else float("nan"), np.array([0.0]))
        assert err.value.point is not None

    def test_unknown_order(self):
        with pytest.raises(ValueError):
            finite_diff(lambda x: 0.0, np.array([1.0]), "laplacian")
