import math

import numpy as np
import pytest

from pcalc.errors import NonIntegrableError, QuadratureError
from pcalc.quadrature import (
    endpoint_exponent,
    gk15,
    integrate_adaptive,
    integrate_graded,
)


class TestGk15:
    def test_exact_on_low_degree_polynomials(self):
        # Gauss-7 is exact through degree 13, Kronrod-15 through 22;
        # the error estimate |K - G| must be ~0 up to degree 13
        for k in range(14):
            val, err = gk15(lambda x, k=k: x ** k, 0.0, 1.0)
            assert val == pytest.approx(1.0 / (k + 1), rel=1e-14)
            assert err < 1e-13

    def test_interval_scaling(self):
        val, _ = gk15(math.sin, 0.0, math.pi / 2)
        assert val == pytest.approx(1.0, rel=1e-12)

    def test_open_rule_never_touches_endpoints(self):
        seen = []

        def f(x):
            seen.append(x)
            return 1.0

        gk15(f, 0.0, 1.0)
        assert len(seen) == 15
        assert min(seen) > 0.0 and max(seen) < 1.0

    def test_nonfinite_integrand_raises(self):
        with pytest.raises(NonIntegrableError):
            gk15(lambda x: float("nan"), 0.0, 1.0)
        with pytest.raises(NonIntegrableError):
            gk15(lambda x: float("inf"), 0.0, 1.0)


class TestAdaptive:
    def test_smooth(self):
        val, err, panels = integrate_adaptive(math.sin, 0.0, math.pi, 1e-12)
        assert val == pytest.approx(2.0, abs=1e-12)
        assert err <= 1e-12
        assert panels >= 1

    def test_needle(self):
        # narrow gaussian needs refinement but stays within the budget
        f = lambda x: math.exp(-((x - 0.37) ** 2) * 1e4)
        val, err, panels = integrate_adaptive(f, 0.0, 1.0, 1e-10)
        assert val == pytest.approx(math.sqrt(math.pi) / 100.0, rel=1e-8)
        assert panels > 4

    def test_zero_width(self):
        val, err, panels = integrate_adaptive(math.sin, 1.0, 1.0, 1e-10)
        assert val == 0.0

    def test_budget_exhaustion_raises(self):
        f = lambda x: x ** -0.5  # endpoint singularity defeats plain bisection
        with pytest.raises(QuadratureError):
            integrate_adaptive(f, 0.0, 1.0, 1e-13, max_panels=32)


class TestEndpointExponent:
    def test_integrable_singularity_detected(self):
        gamma = endpoint_exponent(lambda x: x ** -0.5, 0.0, 1.0, "left")
        assert gamma is not None
        assert gamma == pytest.approx(0.5, abs=0.05)

    def test_strong_singularity_rejected(self):
        with pytest.raises(NonIntegrableError):
            endpoint_exponent(lambda x: 1.0 / x, 0.0, 1.0, "left")

    def test_bounded_integrand_needs_no_grading(self):
        assert endpoint_exponent(math.sin, 0.0, 1.0, "left") is None
        assert endpoint_exponent(lambda x: x ** 0.5, 0.0, 1.0, "left") is None

    def test_right_side(self):
        gamma = endpoint_exponent(lambda x: (1.0 - x) ** -0.3, 0.0, 1.0, "right")
        assert gamma == pytest.approx(0.3, abs=0.05)


class TestGraded:
    @pytest.mark.parametrize("p", [0.1, 0.5, 0.9])
    def test_power_singularity(self, p):
        # int_0^1 x^(-p) dx = 1/(1-p)
        val, err, panels, graded = integrate_graded(lambda x: x ** -p, 0.0, 1.0, 1e-10)
        assert graded
        assert val == pytest.approx(1.0 / (1.0 - p), rel=1e-9)

    def test_two_sided(self):
        # int_0^1 (x(1-x))^(-1/2) dx = pi
        f = lambda x: (x * (1.0 - x)) ** -0.5
        val, err, panels, graded = integrate_graded(f, 0.0, 1.0, 1e-10)
        assert graded
        assert val == pytest.approx(math.pi, rel=1e-9)

    def test_smooth_skips_grading(self):
        val, err, panels, graded = integrate_graded(math.cos, 0.0, 1.0, 1e-12)
        assert not graded
        assert val == pytest.approx(math.sin(1.0), abs=1e-12)

    def test_nonintegrable_raises(self):
        with pytest.raises(NonIntegrableError):
            integrate_graded(lambda x: x ** -1.2, 0.0, 1.0, 1e-8)

    def test_error_estimate_is_honest(self):
        rng = np.random.default_rng(7)
        for _ in range(10):
            p = float(rng.uniform(0.1, 0.9))
            b = float(rng.uniform(0.5, 3.0))
            val, err, panels, _ = integrate_graded(lambda x: x ** -p, 0.0, b, 1e-9)
            exact = b ** (1.0 - p) / (1.0 - p)
            assert abs(val - exact) <= max(10.0 * err, 1e-9 * max(1.0, abs(exact)))
