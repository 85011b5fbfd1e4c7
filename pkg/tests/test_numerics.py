import math

import numpy as np
import pytest
from scipy import integrate as sp_integrate

from thirdlaw.errors import NumericalError
from thirdlaw.numerics import bisect, gk15, integrate


class TestGaussKronrod:
    @pytest.mark.parametrize("degree", [0, 1, 5, 13, 21])
    def test_exact_for_polynomials(self, degree):
        value, err = gk15(lambda x: x ** degree, 0.0, 1.0)
        assert value == pytest.approx(1.0 / (degree + 1), rel=1e-14)
        if degree <= 13:  # the embedded 7-point Gauss rule is exact up to degree 13
            assert err < 1e-12

    def test_error_estimate_is_gauss_difference(self):
        value, err = gk15(np.exp, 0.0, 1.0)
        assert value == pytest.approx(math.e - 1.0, rel=1e-15)
        assert err < 1e-14


class TestIntegrate:
    @pytest.mark.parametrize("f,a,b", [
        (lambda t: np.exp(-1.0 / t) / t ** 3, 1e-3, 10.0),
        (lambda t: np.sin(t) ** 2, 0.0, 20.0),
        (lambda t: 1.0 / (1.0 + t * t), -50.0, 50.0),
    ])
    def test_matches_scipy_quad(self, f, a, b):
        expected, _ = sp_integrate.quad(f, a, b, epsabs=1e-14, epsrel=1e-13, limit=500)
        value, err = integrate(f, a, b, abs_tol=1e-13, rel_tol=1e-13)
        assert value == pytest.approx(expected, rel=1e-11, abs=1e-13)
        assert err <= 1e-12

    def test_empty_interval(self):
        assert integrate(np.exp, 2.0, 2.0)[0] == 0.0

    def test_breakpoints_split_a_kink(self):
        value, _ = integrate(lambda x: np.abs(x - 0.3), 0.0, 1.0, breakpoints=(0.3,))
        assert value == pytest.approx(0.5 * 0.3 ** 2 + 0.5 * 0.7 ** 2, rel=1e-14)

    def test_budget_exhaustion_reports_estimate(self):
        with pytest.raises(NumericalError) as info:
            integrate(lambda x: 1.0 / np.sqrt(x), 0.0, 1.0, abs_tol=1e-15, rel_tol=0.0, max_intervals=3)
        assert info.value.estimate > 1e-15


class TestBisect:
    def test_square_root_to_machine_precision(self):
        root = bisect(lambda x: x * x - 2.0, 1.0, 2.0)
        assert root == pytest.approx(math.sqrt(2.0), rel=2e-16)

    def test_root_at_endpoint(self):
        assert bisect(lambda x: x - 1.0, 1.0, 3.0) == 1.0

    def test_requires_sign_change(self):
        with pytest.raises(NumericalError):
            bisect(lambda x: x * x + 1.0, -1.0, 1.0)
