import math

import numpy as np
import pytest

from pcalc.errors import DomainError, ParameterError, UsageError
from pcalc.expr import parse
from pcalc.families import (
    DEFAULT_EPSILONS,
    FAMILY_KINDS,
    check_l1,
    check_offset_solvability,
    make_family,
)


def all_builtin_families():
    fams = []
    for alpha in (0.1, 0.5, 0.9):
        fams.append(make_family("khalil", alpha))
        fams.append(make_family("katugampola", alpha))
        fams.append(make_family("gfd", alpha, beta=1.5))
        fams.append(make_family("nderiv", alpha))
        fams.append(make_family("cosine", alpha))
    fams.append(make_family("power", 2.0))
    fams.append(make_family("power", 3.5))
    fams.append(make_family("custom", F="t + t*h + t^3*h^3"))
    return fams


def interior_points(fam, rng, n=12):
    lo, hi = fam.domain.lo, fam.domain.hi
    lo = max(lo, -2.0) + 0.05
    hi = min(hi, 3.0) - 0.05
    return rng.uniform(lo, hi, n)


class TestConstruction:
    def test_kind_enum(self):
        assert set(FAMILY_KINDS) == {
            "khalil", "katugampola", "gfd", "nderiv", "cosine", "power", "custom",
        }

    def test_unknown_kind(self):
        with pytest.raises(UsageError):
            make_family("fractal", 0.5)

    @pytest.mark.parametrize("kind", ["khalil", "katugampola", "gfd", "nderiv", "cosine"])
    def test_alpha_required_and_positive(self, kind):
        with pytest.raises(ParameterError):
            make_family(kind)
        with pytest.raises(ParameterError):
            make_family(kind, -0.5, beta=1.5)
        with pytest.raises(ParameterError):
            make_family(kind, 0.0, beta=1.5)

    def test_gfd_needs_beta_off_poles(self):
        with pytest.raises(ParameterError):
            make_family("gfd", 0.5)
        # beta - alpha + 1 hits the gamma poles at 0, -1, ...
        with pytest.raises(ParameterError):
            make_family("gfd", 2.5, beta=1.5)
        with pytest.raises(ParameterError):
            make_family("gfd", 3.5, beta=1.5)
        make_family("gfd", 1.5, beta=1.5)  # fine: argument is 1.0

    def test_cosine_alpha_capped_at_one(self):
        make_family("cosine", 1.0)
        with pytest.raises(ParameterError):
            make_family("cosine", 1.2)

    def test_power_needs_alpha_above_one(self):
        with pytest.raises(ParameterError):
            make_family("power", 1.0)
        with pytest.raises(ParameterError):
            make_family("power", 0.5)

    def test_custom_needs_full_expression(self):
        with pytest.raises(ParameterError):
            make_family("custom")
        fam = make_family("custom", F="t + h^3")
        assert fam.p(2.0, 0.1) == pytest.approx(2.001)

    def test_custom_rejects_unknown_variables(self):
        with pytest.raises(UsageError):
            make_family("custom", F="t + h*z")

    def test_param_echo(self):
        fam = make_family("gfd", 0.5, beta=1.5)
        assert fam.kind == "gfd"
        assert fam.alpha == 0.5
        assert fam.beta == 1.5


class TestDeformationValues:
    def test_khalil_closed_form(self):
        fam = make_family("khalil", 0.5)
        assert fam.p(4.0, 0.25) == pytest.approx(4.0 + 0.25 * 2.0, rel=1e-15)
        assert fam.ph_zero(4.0) == pytest.approx(2.0, rel=1e-15)

    def test_katugampola_closed_form(self):
        fam = make_family("katugampola", 0.5)
        assert fam.p(4.0, 0.25) == pytest.approx(4.0 * math.exp(0.25 * 0.5), rel=1e-15)
        assert fam.ph_zero(4.0) == pytest.approx(2.0, rel=1e-15)

    def test_gfd_scales_khalil_by_gamma_ratio(self):
        # gamma(1.5)/gamma(2.0) = 0.8862269254527580  [tools/oracles.py]
        fam = make_family("gfd", 0.5, beta=1.5)
        khalil = make_family("khalil", 0.5)
        for t in (0.3, 1.0, 2.7):
            assert fam.ph_zero(t) == pytest.approx(
                0.886226925452758 * khalil.ph_zero(t), rel=1e-12)

    def test_nderiv_multiplier(self):
        fam = make_family("nderiv", 0.5)
        t = 1.7
        assert fam.ph_zero(t) == pytest.approx(math.exp(t ** -0.5), rel=1e-14)

    def test_cosine_multiplier(self):
        fam = make_family("cosine", 0.3)
        t = 0.9
        assert fam.ph_zero(t) == pytest.approx(math.cos(t) ** 0.7, rel=1e-14)

    def test_power_multiplier_vanishes(self):
        fam = make_family("power", 2.0)
        for t in (-3.0, 0.0, 1.0, 17.0):
            assert fam.ph_zero(t) == 0.0
        assert fam.p(1.0, 0.1) == pytest.approx(1.01)
        assert fam.p(1.0, 0.0) == 1.0

    def test_identity_at_h_zero(self):
        rng = np.random.default_rng(3)
        for fam in all_builtin_families():
            for t in interior_points(fam, rng):
                assert fam.p(float(t), 0.0) == pytest.approx(float(t), rel=1e-14)

    def test_ph_matches_difference_quotient(self):
        # cosine and fractional-power kinds only admit h >= 0: forward
        # difference there, central elsewhere
        rng = np.random.default_rng(4)
        for fam in all_builtin_families():
            one_sided = fam.kind in ("cosine", "power")
            for t in interior_points(fam, rng, n=6):
                t = float(t)
                for h in (0.0, 1e-3) if one_sided else (0.0, 1e-3, -1e-3):
                    step = 1e-6
                    if one_sided:
                        num = (fam.p(t, h + step) - fam.p(t, h)) / step
                        assert fam.ph(t, h) == pytest.approx(num, rel=1e-4, abs=1e-4)
                    else:
                        num = (fam.p(t, h + step) - fam.p(t, h - step)) / (2 * step)
                        assert fam.ph(t, h) == pytest.approx(num, rel=5e-7, abs=5e-7)

    def test_ph_zero_agrees_with_ph(self):
        rng = np.random.default_rng(5)
        for fam in all_builtin_families():
            for t in interior_points(fam, rng, n=6):
                assert fam.ph_zero(float(t)) == fam.ph(float(t), 0.0)

    def test_domain_enforcement(self):
        fam = make_family("khalil", 0.5)
        with pytest.raises(DomainError):
            fam.require(-1.0)
        with pytest.raises(DomainError):
            fam.require(0.0)  # open at 0
        fam.require(1e-9)
        cos = make_family("cosine", 0.5)
        cos.require(0.0)  # closed at 0
        with pytest.raises(DomainError):
            cos.require(math.pi / 2)
        power = make_family("power", 2.0)
        power.require(-1e6)

    def test_domain_str(self):
        assert str(make_family("khalil", 0.5).domain) == "(0.0, inf)"
        assert str(make_family("cosine", 0.5).domain) == "[0.0, 1.5707963267948966)"


class TestOffsetSolvability:
    def test_khalil_solves_both_sides(self):
        rep = check_offset_solvability(make_family("khalil", 0.5), 1.0)
        assert rep.verdict_plus and rep.verdict_minus and rep.both
        assert len(rep.records) == len(DEFAULT_EPSILONS)
        # khalil: t + h*t^(1-alpha) = t + eps  =>  h = eps (at t=1)
        for r in rep.records:
            assert r.h_plus == pytest.approx(r.epsilon, rel=1e-4)
            assert r.h_minus == pytest.approx(-r.epsilon, rel=1e-4)

    def test_katugampola_solves_both_sides(self):
        rep = check_offset_solvability(make_family("katugampola", 0.5), 1.0)
        assert rep.both

    def test_power_plus_only(self):
        rep = check_offset_solvability(make_family("power", 2.0), 0.7)
        assert rep.verdict_plus
        assert not rep.verdict_minus
        assert not rep.both
        for r in rep.records:
            assert r.h_minus is None
            assert r.h_plus == pytest.approx(math.sqrt(r.epsilon), rel=1e-4)

    def test_shrinking_offsets_give_shrinking_h(self):
        rep = check_offset_solvability(make_family("khalil", 0.3), 2.0)
        hs = [r.h_plus for r in rep.records]
        assert all(h1 > h2 > 0 for h1, h2 in zip(hs, hs[1:]))

    def test_epsilons_must_decrease(self):
        fam = make_family("khalil", 0.5)
        with pytest.raises(ParameterError):
            check_offset_solvability(fam, 1.0, epsilons=(1e-3, 1e-2))
        with pytest.raises(ParameterError):
            check_offset_solvability(fam, 1.0, epsilons=(1e-3, -1e-4))
        with pytest.raises(ParameterError):
            check_offset_solvability(fam, 1.0, epsilons=())


class TestWeightNorm:
    def test_khalil_frozen_value(self):
        # int_0^(1/16) t^(-1/2) dt = 0.5  [tools/oracles.py]
        rep = check_l1(make_family("khalil", 0.5), 0.0, 0.0625)
        assert rep.converged and not rep.diverged
        assert rep.estimate == pytest.approx(0.5, abs=1e-9)
        assert rep.interval == (0.0, 0.0625)

    def test_slow_decay_still_converges(self):
        # alpha = 0.1: weight t^(-0.9), integral T^0.1/0.1
        rep = check_l1(make_family("khalil", 0.1), 0.0, 1.0)
        assert rep.converged
        assert rep.estimate == pytest.approx(10.0, rel=1e-8)

    def test_divergent_weight_reported(self):
        # nderiv with F = t gives p = t + h*t, weight 1/t: log-divergent
        fam = make_family("nderiv", 0.5, F="t")
        rep = check_l1(fam, 0.0, 1.0)
        assert rep.diverged
        assert not rep.converged
        assert math.isinf(rep.estimate)

    def test_interior_interval(self):
        rep = check_l1(make_family("khalil", 0.5), 1.0, 4.0)
        assert rep.converged
        assert rep.estimate == pytest.approx(2.0 * (2.0 - 1.0), rel=1e-9)

    def test_bad_interval(self):
        fam = make_family("khalil", 0.5)
        with pytest.raises(ParameterError):
            check_l1(fam, 2.0, 1.0)
        with pytest.raises(DomainError):
            check_l1(fam, -1.0, 1.0)
