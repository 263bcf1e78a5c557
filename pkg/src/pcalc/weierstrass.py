"""Divergence certificates for the classical cosine lacunary series.

f(x) = sum of b^n cos(a^n pi x), a odd, 0 < b < 1.  Under the growth
condition a^(1/alpha) b > 1 + 3 pi / 2, the fractional difference
quotients (f(x + h^alpha) - f(x)) / h blow up along an explicit sequence
h_m chosen so that a^m (x + h_m^alpha) is exactly an integer.  All angle
arithmetic runs over exact rationals reduced mod 2, so the head/tail
split of the quotient is free of catastrophic cancellation.
"""

from __future__ import annotations

import math
from dataclasses import dataclass, replace
from fractions import Fraction

from .errors import BoundViolationError, ParameterError

__all__ = [
    "WeierstrassParams", "HmStep",
    "check_growth_condition", "term_count", "weierstrass_eval",
    "build_hm_sequence", "divergence_report",
]


@dataclass(frozen=True)
class WeierstrassParams:
    a: int
    b: float
    alpha: float

    def __post_init__(self) -> None:
        if not isinstance(self.a, int) or self.a < 3 or self.a % 2 == 0:
            raise ParameterError(f"a must be an odd integer >= 3, got {self.a!r}")
        if not 0.0 < self.b < 1.0:
            raise ParameterError(f"b must lie in (0, 1), got {self.b!r}")
        if not self.alpha > 1.0:
            raise ParameterError(f"alpha must exceed 1, got {self.alpha!r}")


def check_growth_condition(params: WeierstrassParams) -> bool:
    """a^(1/alpha) * b > 1 + 3 pi / 2, the divergence-rate hypothesis."""
    return params.a ** (1.0 / params.alpha) * params.b > 1.0 + 1.5 * math.pi


def term_count(params: WeierstrassParams, tol: float) -> int:
    """Terms needed so the truncated series tail stays below tol."""
    if tol <= 0.0:
        raise ParameterError("tol must be positive")
    arg = tol * (1.0 - params.b)
    if arg >= 1.0:
        return 1
    return max(1, math.ceil(math.log(arg) / math.log(params.b)))


def _as_fraction(x) -> Fraction:
    if isinstance(x, Fraction):
        return x
    if isinstance(x, int):
        return Fraction(x)
    if isinstance(x, str):
        try:
            return Fraction(x)
        except (ValueError, ZeroDivisionError) as exc:
            raise ParameterError(f"cannot read {x!r} as an exact rational: {exc}") from None
    if isinstance(x, float):
        return Fraction(x)  # exact binary value
    raise ParameterError(f"cannot read {x!r} as an exact rational")


def _cos_pi(r: Fraction) -> float:
    """cos(pi * r) after exact reduction of r into (-1, 1]."""
    r = r % 2
    if r > 1:
        r -= 2
    if r == 0:
        return 1.0
    if r == 1:
        return -1.0
    if r == Fraction(1, 2) or r == Fraction(-1, 2):
        return 0.0
    return math.cos(math.pi * float(r))


def weierstrass_eval(params: WeierstrassParams, x, tol: float = 1e-8) -> float:
    """Evaluate the series at an exact rational x to within tol."""
    xf = _as_fraction(x)
    n_terms = term_count(params, tol)
    total = 0.0
    bn = 1.0
    ang = xf % 2
    for _ in range(n_terms):
        total += bn * _cos_pi(ang)
        bn *= params.b
        ang = (ang * params.a) % 2
    return total


@dataclass(frozen=True)
class HmStep:
    """One rung of the divergence ladder at scale a^-m.

    alpha_m is the integer nearest a^m x (ties resolved upward, so t_m,
    the exact remainder a^m x - alpha_m, lies in (-1/2, 1/2]).  h_m > 0 is
    chosen so a^m (x + h_m^alpha) = alpha_m + 1 exactly.  quotient and
    lower_bound stay None until divergence_report fills them.
    """

    m: int
    alpha_m: int
    t_m: Fraction
    h_m: float
    quotient: float | None = None
    lower_bound: float | None = None


def build_hm_sequence(params: WeierstrassParams, x, m_max: int = 8) -> list[HmStep]:
    """The ladder of exact step geometries for m = 1 .. m_max."""
    if m_max < 1:
        raise ParameterError("m_max must be at least 1")
    xf = _as_fraction(x)
    steps: list[HmStep] = []
    am = 1
    for m in range(1, m_max + 1):
        am *= params.a
        v = am * xf
        alpha_m = math.ceil(v - Fraction(1, 2))
        t_m = v - alpha_m
        h_pow = (1 - t_m) / am  # exact h_m^alpha
        assert Fraction(-1, 2) < t_m <= Fraction(1, 2)
        assert 0 < h_pow <= Fraction(3, 2 * am)
        assert am * xf - alpha_m - t_m == 0
        h_m = float(h_pow) ** (1.0 / params.alpha)
        steps.append(HmStep(m=m, alpha_m=alpha_m, t_m=t_m, h_m=h_m))
    return steps


def _bound_coefficient(params: WeierstrassParams) -> float:
    a, b, alpha = params.a, params.b, params.alpha
    return (2.0 / 3.0) ** (1.0 / alpha) - (
        math.pi / (a * b - 1.0)
    ) * (3.0 / 2.0) ** ((alpha - 1.0) / alpha)


def divergence_report(params: WeierstrassParams, x, m_max: int = 8,
                      tol: float = 1e-8) -> list[HmStep]:
    """Difference quotients along the ladder with their growth floors.

    quotient_m = |f(x + h_m^alpha) - f(x)| / h_m, split into an exact-angle
    head (n < m) and an analytically collapsed tail (n >= m), each term of
    which is nonnegative.  lower_bound_m = C a^(m/alpha) b^m with C the
    growth coefficient.  A quotient below its floor raises
    BoundViolationError carrying the offending step.
    """
    if not check_growth_condition(params):
        raise ParameterError(
            "growth condition a^(1/alpha) b > 1 + 3 pi / 2 fails; "
            "no divergence floor holds"
        )
    xf = _as_fraction(x)
    steps = build_hm_sequence(params, xf, m_max)
    coeff = _bound_coefficient(params)
    a, b, alpha = params.a, params.b, params.alpha

    out: list[HmStep] = []
    for step in steps:
        m, h = step.m, step.h_m
        h_pow = (1 - step.t_m) / a ** m

        head = 0.0
        bn = 1.0
        ang_base = xf % 2
        ang_shift = (xf + h_pow) % 2
        for _ in range(m):
            head += bn * (_cos_pi(ang_shift) - _cos_pi(ang_base))
            bn *= b
            ang_base = (ang_base * a) % 2
            ang_shift = (ang_shift * a) % 2
        head /= h

        sign = 1.0 if (step.alpha_m + 1) % 2 == 0 else -1.0
        tail_sum = 0.0
        bn = b ** m
        ang = step.t_m % 2
        for _ in range(100000):
            tail_sum += bn * (1.0 + _cos_pi(ang))
            bn *= b
            ang = (ang * a) % 2
            if 2.0 * bn / ((1.0 - b) * h) < tol * b ** m:
                break
        tail = sign * tail_sum / h

        quotient = abs(head + tail)
        lower = coeff * a ** (m / alpha) * b ** m
        filled = replace(step, quotient=quotient, lower_bound=lower)
        if quotient < lower:
            raise BoundViolationError(
                f"difference quotient {quotient:.6g} fell below its floor "
                f"{lower:.6g} at m={m}",
                step=filled,
            )
        out.append(filled)
    return out
