import math
from fractions import Fraction

import pytest

from pcalc.errors import BoundViolationError, ParameterError
from pcalc.weierstrass import (
    WeierstrassParams,
    build_hm_sequence,
    check_growth_condition,
    divergence_report,
    term_count,
    weierstrass_eval,
)

PARAMS = WeierstrassParams(a=41, b=0.9, alpha=2.0)


class TestParams:
    def test_validation(self):
        with pytest.raises(ParameterError):
            WeierstrassParams(a=4, b=0.9, alpha=2.0)
        with pytest.raises(ParameterError):
            WeierstrassParams(a=1, b=0.9, alpha=2.0)
        with pytest.raises(ParameterError):
            WeierstrassParams(a=41, b=0.0, alpha=2.0)
        with pytest.raises(ParameterError):
            WeierstrassParams(a=41, b=1.0, alpha=2.0)
        with pytest.raises(ParameterError):
            WeierstrassParams(a=41, b=0.9, alpha=1.0)

    def test_growth_condition(self):
        # 41^(1/2) * 0.9 = 5.7628 > 1 + 3 pi / 2 = 5.7124  [tools/oracles.py]
        assert check_growth_condition(PARAMS)
        assert not check_growth_condition(WeierstrassParams(9, 0.9, 2.0))

    def test_term_count(self):
        # ceil(ln(1e-8 * 0.1) / ln 0.9) = 197  [tools/oracles.py]
        assert term_count(PARAMS, 1e-8) == 197
        assert term_count(PARAMS, 1e90) == 1
        with pytest.raises(ParameterError):
            term_count(PARAMS, 0.0)


class TestSeriesEval:
    def test_integer_points(self):
        # f(0) = 1/(1-b) = 10, f(1) = -10 since every a^n is odd
        assert weierstrass_eval(PARAMS, 0) == pytest.approx(10.0, abs=2e-8)
        assert weierstrass_eval(PARAMS, 1) == pytest.approx(-10.0, abs=2e-8)

    def test_even_and_periodic(self):
        x = Fraction(1, 7)
        assert weierstrass_eval(PARAMS, x) == pytest.approx(
            weierstrass_eval(PARAMS, -x), abs=1e-12)
        # period 2 holds exactly: the angle reduction is identical
        assert weierstrass_eval(PARAMS, x) == weierstrass_eval(PARAMS, x + 2)

    def test_rational_string_input(self):
        assert weierstrass_eval(PARAMS, "1/3") == pytest.approx(
            weierstrass_eval(PARAMS, Fraction(1, 3)), abs=0.0)
        with pytest.raises(ParameterError):
            weierstrass_eval(PARAMS, "one third")


class TestLadder:
    def test_exact_geometry(self):
        x = Fraction(5, 7)
        steps = build_hm_sequence(PARAMS, x, m_max=6)
        assert [s.m for s in steps] == [1, 2, 3, 4, 5, 6]
        for s in steps:
            am = PARAMS.a ** s.m
            # the remainder identity holds in exact arithmetic
            assert am * x - s.alpha_m - s.t_m == 0
            assert Fraction(-1, 2) < s.t_m <= Fraction(1, 2)
            h_pow = (1 - s.t_m) / am
            assert 0 < h_pow <= Fraction(3, 2 * am)
            assert s.h_m ** PARAMS.alpha == pytest.approx(float(h_pow), rel=1e-12)
            assert s.quotient is None and s.lower_bound is None

    def test_at_origin(self):
        steps = build_hm_sequence(PARAMS, 0, m_max=4)
        for s in steps:
            assert s.alpha_m == 0
            assert s.t_m == 0
            assert s.h_m == pytest.approx(41.0 ** (-s.m / 2.0), rel=1e-14)

    def test_m_max_validation(self):
        with pytest.raises(ParameterError):
            build_hm_sequence(PARAMS, 0, m_max=0)


class TestDivergenceReport:
    def test_frozen_quotients_at_origin(self):
        steps = divergence_report(PARAMS, 0, m_max=6)
        # [tools/oracles.py]
        assert steps[0].quotient == pytest.approx(115.2750243133491, rel=1e-5)
        assert steps[1].quotient == pytest.approx(664.3083435371494, rel=1e-5)
        assert steps[0].lower_bound == pytest.approx(4.087676032694150, rel=1e-9)
        for s in steps:
            assert s.quotient >= s.lower_bound

    def test_bound_coefficient(self):
        # lower_m = C a^(m/alpha) b^m with C = 0.7093197148974867
        # [tools/oracles.py]
        steps = divergence_report(PARAMS, 0, m_max=3)
        for s in steps:
            lam = 41.0 ** (s.m / 2.0) * 0.9 ** s.m
            assert s.lower_bound == pytest.approx(0.7093197148974867 * lam,
                                                  rel=1e-9)

    def test_geometric_growth_at_origin(self):
        steps = divergence_report(PARAMS, 0, m_max=7)
        lam = 41.0 ** 0.5 * 0.9
        for prev, nxt in zip(steps, steps[1:]):
            ratio = nxt.quotient / prev.quotient
            assert 0.8 * lam <= ratio <= 1.2 * lam

    def test_growth_off_origin_two_step(self):
        # at x = 1/3 the per-step ratios alternate; the two-step geometric
        # mean still tracks a^(1/alpha) b
        steps = divergence_report(PARAMS, Fraction(1, 3), m_max=8)
        lam = 41.0 ** 0.5 * 0.9
        for i in range(len(steps) - 2):
            gm = math.sqrt(steps[i + 2].quotient / steps[i].quotient)
            assert 0.8 * lam <= gm <= 1.2 * lam
        for s in steps:
            assert s.quotient >= s.lower_bound

    def test_requires_growth_condition(self):
        with pytest.raises(ParameterError):
            divergence_report(WeierstrassParams(9, 0.9, 2.0), 0)

    def test_violation_error_carries_step(self):
        err = BoundViolationError("quotient under floor", step=None)
        assert err.step is None
        assert "floor" in str(err)
