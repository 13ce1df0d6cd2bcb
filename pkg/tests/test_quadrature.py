"""Log-space adaptive Gauss-Kronrod integrator.

Expected values are analytic: log of a monomial integral, Gaussian mass,
an exponential ramp, and a Laplace density with an interior kink.
"""

import math

import numpy as np
import pytest

from truncdp.errors import InvalidParams, NoConvergence
from truncdp.quadrature import LogIntegralResult, log_integral


def log_gauss(x):
    return -0.5 * x * x - 0.5 * math.log(2.0 * math.pi)


class TestExactValues:
    def test_monomial(self):
        # int_0^1 x^8 dx = 1/9
        res = log_integral(lambda x: 8.0 * np.log(x), 0.0, 1.0, rel_tol=1e-13)
        assert res.log_value == pytest.approx(-math.log(9.0), rel=1e-12)
        assert res.rel_error <= 1e-12

    def test_gaussian_mass(self):
        res = log_integral(log_gauss, -40.0, 40.0, rel_tol=1e-13)
        assert res.log_value == pytest.approx(0.0, abs=1e-12)

    def test_half_gaussian_mass(self):
        res = log_integral(log_gauss, 0.0, 40.0, rel_tol=1e-13)
        assert res.log_value == pytest.approx(math.log(0.5), rel=1e-12)

    def test_deep_log_shift_is_harmless(self):
        # scaling the integrand by e^-5000 must shift log_value by exactly -5000
        res = log_integral(lambda x: log_gauss(x) - 5000.0, -40.0, 40.0, rel_tol=1e-13)
        assert res.log_value == pytest.approx(-5000.0, abs=1e-11)

    def test_exponential_ramp(self):
        # int_0^1 e^{100 x} dx = (e^100 - 1)/100
        expected = 100.0 - math.log(100.0) + math.log1p(-math.exp(-100.0))
        res = log_integral(lambda x: 100.0 * x, 0.0, 1.0, rel_tol=1e-13)
        assert res.log_value == pytest.approx(expected, rel=1e-13)

    def test_laplace_kink_with_breakpoint(self):
        # int_{-2}^{3} (1/2) e^{-|x|} dx, kink at 0
        expected = math.log(0.5 * (2.0 - math.exp(-2.0) - math.exp(-3.0)))
        res = log_integral(
            lambda x: -np.abs(x) - math.log(2.0), -2.0, 3.0, rel_tol=1e-13, breakpoints=(0.0,)
        )
        assert res.log_value == pytest.approx(expected, rel=1e-13)

    def test_breakpoints_outside_range_ignored(self):
        res = log_integral(log_gauss, -1.0, 1.0, rel_tol=1e-13, breakpoints=(-5.0, 7.0))
        assert res.log_value == pytest.approx(math.log(0.682689492137086), rel=1e-12)

    def test_zero_integrand(self):
        res = log_integral(lambda x: np.full_like(np.asarray(x, dtype=float), -np.inf), 0.0, 1.0)
        assert res.log_value == -math.inf
        assert res.rel_error == 0.0


class TestResultMetadata:
    def test_fields(self):
        res = log_integral(log_gauss, -5.0, 5.0, rel_tol=1e-10)
        assert isinstance(res, LogIntegralResult)
        assert res.evaluations > 0
        assert res.panels >= 8
        assert 0.0 <= res.rel_error <= 1e-10

    def test_min_panels_doubling_consistency(self):
        coarse = log_integral(log_gauss, -8.0, 8.0, rel_tol=1e-12, min_panels=8)
        fine = log_integral(log_gauss, -8.0, 8.0, rel_tol=1e-12, min_panels=64)
        assert fine.panels >= 64 > coarse.panels or fine.panels > coarse.panels
        assert abs(fine.log_value - coarse.log_value) <= 2e-12


class TestFailureModes:
    def test_no_convergence_on_tiny_budget(self):
        # integrable singularity, but the budget forbids enough refinement
        with pytest.raises(NoConvergence):
            log_integral(lambda x: -0.9 * np.log(np.abs(x)), 0.0, 1.0, rel_tol=1e-13, max_evals=200)

    def test_rejects_bad_bounds(self):
        with pytest.raises(InvalidParams):
            log_integral(log_gauss, 1.0, 1.0)
        with pytest.raises(InvalidParams):
            log_integral(log_gauss, 2.0, -1.0)
        with pytest.raises(InvalidParams):
            log_integral(log_gauss, -math.inf, 0.0)

    def test_rejects_bad_tolerance(self):
        with pytest.raises(InvalidParams):
            log_integral(log_gauss, 0.0, 1.0, rel_tol=0.0)
        with pytest.raises(InvalidParams):
            log_integral(log_gauss, 0.0, 1.0, rel_tol=-1e-6)

    def test_rejects_nan_integrand(self):
        def bad(x):
            return np.where(np.asarray(x) > 0.5, np.nan, 0.0)

        with pytest.raises(InvalidParams):
            log_integral(bad, 0.0, 1.0)
