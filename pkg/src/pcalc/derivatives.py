"""Derivatives along a deformation family.

Two routes:

- p_derivative_limit extrapolates the difference quotient
  (f(p(t, h)) - f(t)) / h to h -> 0 along a geometric ladder of step
  sizes, one Neville polynomial extrapolation per side.
- p_derivative_formula evaluates ph_zero(t) * f'(t), valid only where the
  multiplier is nonzero and f is symbolically differentiable.

compare_definitions runs the limit route under two families at the same
point and reports the observed and predicted ratio.
"""

from __future__ import annotations

import math
import sys
from collections.abc import Callable
from dataclasses import dataclass

from .errors import DifferentiationError, EvaluationError, UsageError
from .expr import Expr, differentiate, evaluate, parse
from .families import PFunction

__all__ = [
    "DerivEstimate", "ComparisonReport",
    "p_derivative_limit", "p_derivative_formula", "compare_definitions",
]

_EPS = sys.float_info.epsilon
_SIDES = ("both", "left", "right")


@dataclass(frozen=True)
class DerivEstimate:
    """Extrapolated difference-quotient limit.

    h_sequence and quotient_sequence hold the raw ladder actually used
    (levels skipped for domain or noise reasons are absent); for
    side="both" the right-side entries come first, then the left.
    converged=False still carries the best value found: error_estimate is
    then only indicative.
    """

    value: float
    error_estimate: float
    side: str
    h_sequence: tuple[float, ...]
    quotient_sequence: tuple[float, ...]
    converged: bool


def as_scalar_fn(f: Expr | str | Callable[[float], float]) -> tuple[Callable[[float], float], Expr | None]:
    """Coerce an expression, source text, or plain callable to t -> f(t)."""
    if isinstance(f, str):
        f = parse(f)
    if isinstance(f, Expr):
        e = f

        def fn(x: float, e: Expr = e) -> float:
            return evaluate(e, {"t": x})

        return fn, e
    if callable(f):
        return f, None
    raise UsageError(f"cannot interpret {f!r} as a function of t")


def _neville_at_zero(xs: list[float], ys: list[float]) -> float:
    # polynomial through (xs, ys) evaluated at 0; xs are distinct by construction
    p = list(ys)
    n = len(p)
    for k in range(1, n):
        for i in range(n - k):
            xi, xk = xs[i], xs[i + k]
            p[i] = (xk * p[i] - xi * p[i + 1]) / (xk - xi)
    return p[0]


def extrapolate_quotient(
    quotient: Callable[[float], float | None],
    sign: float,
    h0: float,
    tol: float,
    max_levels: int,
) -> tuple[float, float, bool, list[float], list[float]]:
    """Drive quotient(h) -> h=0 along h0 * 2^-k * sign.

    quotient returns None to skip a level.  Convergence: two successive
    extrapolants (with at least three support points) agree within
    tol * max(1, |value|).  Returns (value, error, converged, hs, qs).
    """
    hs: list[float] = []
    qs: list[float] = []
    prev: float | None = None
    last_delta = math.inf
    for k in range(max_levels):
        h = h0 * (2.0 ** (-k)) * sign
        q = quotient(h)
        if q is None:
            continue
        hs.append(h)
        qs.append(q)
        val = _neville_at_zero(hs, qs)
        if prev is not None:
            last_delta = abs(val - prev)
            if len(hs) >= 3 and last_delta <= tol * max(1.0, abs(val)):
                return val, last_delta, True, hs, qs
        prev = val
    if prev is None:
        which = "left" if sign < 0 else "right"
        raise EvaluationError(
            f"difference quotient has no evaluable levels on the {which} "
            "side of h=0; the one-sided limit may still exist (side=...)"
        )
    return prev, last_delta, False, hs, qs


def p_derivative_limit(
    fam: PFunction,
    f: Expr | str | Callable[[float], float],
    t: float,
    side: str = "both",
    tol: float = 1e-8,
    h0: float | None = None,
    max_levels: int = 30,
) -> DerivEstimate:
    """Estimate the deformation derivative of f at t from its definition.

    Levels where f(p(t, h)) fails to evaluate are skipped; so are levels
    whose numerator is nonzero yet below the rounding floor of f(t), since
    those quotients carry no signal.  One-sided requests use only the
    matching sign of h.
    """
    if side not in _SIDES:
        raise UsageError(f"side must be one of {_SIDES}, got {side!r}")
    fam.require(t)
    fn, _ = as_scalar_fn(f)
    f_t = fn(t)
    if not math.isfinite(f_t):
        raise EvaluationError(f"f({t!r}) is not finite")
    if h0 is None:
        h0 = max(1e-2, 1e-2 * abs(t))
    noise_floor = 1e3 * _EPS * abs(f_t)

    def quotient(h: float) -> float | None:
        try:
            fp = fn(fam.p(t, h))
        except EvaluationError:
            return None
        if not math.isfinite(fp):
            return None
        num = fp - f_t
        if num != 0.0 and abs(num) < noise_floor:
            return None
        q = num / h
        return q if math.isfinite(q) else None

    if side == "right" or side == "left":
        sign = 1.0 if side == "right" else -1.0
        val, err, conv, hs, qs = extrapolate_quotient(quotient, sign, h0, tol, max_levels)
        return DerivEstimate(val, err, side, tuple(hs), tuple(qs), conv)

    vr, er, cr, hr, qr = extrapolate_quotient(quotient, 1.0, h0, tol, max_levels)
    vl, el, cl, hl, ql = extrapolate_quotient(quotient, -1.0, h0, tol, max_levels)
    value = 0.5 * (vr + vl)
    gap = abs(vr - vl)
    agree = gap <= 10.0 * tol * max(1.0, abs(value))
    converged = cr and cl and agree
    err = max(er, el) if agree else max(er, el, 0.5 * gap)
    return DerivEstimate(value, err, "both",
                         tuple(hr) + tuple(hl), tuple(qr) + tuple(ql), converged)


def p_derivative_formula(
    fam: PFunction,
    f: Expr | str | Callable[[float], float],
    t: float,
    fprime: Expr | str | Callable[[float], float] | None = None,
) -> float:
    """Product form ph_zero(t) * f'(t).

    Raises EvaluationError where the multiplier vanishes (the formula says
    nothing there; use p_derivative_limit) and DifferentiationError when f
    cannot be differentiated symbolically and no fprime was supplied.
    """
    mult = fam.ph_zero(t)
    if mult == 0.0:
        raise EvaluationError(
            f"multiplier of {fam.label} vanishes at t={t!r}; "
            "the product formula does not apply (use p_derivative_limit)"
        )
    if fprime is None:
        _, e = as_scalar_fn(f)
        if e is None:
            raise UsageError(
                "formula route needs an expression for f, or an explicit fprime"
            )
        fprime = differentiate(e, "t")
    dfn, _ = as_scalar_fn(fprime)
    d = dfn(t)
    if not math.isfinite(d):
        raise EvaluationError(f"f'({t!r}) is not finite")
    return mult * d


@dataclass(frozen=True)
class ComparisonReport:
    """Limit-route derivatives of the same f under two families."""

    value_1: float
    value_2: float
    abs_diff: float
    ratio: float
    expected_ratio: float | None
    converged_1: bool
    converged_2: bool


def compare_definitions(
    fam1: PFunction,
    fam2: PFunction,
    f: Expr | str | Callable[[float], float],
    t: float,
    tol: float = 1e-8,
    side: str = "both",
) -> ComparisonReport:
    """Run the limit definition under two families at one point.

    expected_ratio is the multiplier quotient ph_zero_1(t)/ph_zero_2(t)
    when both multipliers are available and the second is nonzero; the
    observed ratio should match it wherever the product formula holds.
    """
    e1 = p_derivative_limit(fam1, f, t, side=side, tol=tol)
    e2 = p_derivative_limit(fam2, f, t, side=side, tol=tol)
    v1, v2 = e1.value, e2.value
    if v2 != 0.0:
        ratio = v1 / v2
    else:
        ratio = math.nan if v1 == 0.0 else math.copysign(math.inf, v1)
    expected: float | None
    try:
        m1 = fam1.ph_zero(t)
        m2 = fam2.ph_zero(t)
        expected = m1 / m2 if m2 != 0.0 else None
    except (EvaluationError, DifferentiationError):
        expected = None
    return ComparisonReport(v1, v2, abs(v1 - v2), ratio, expected,
                            e1.converged, e2.converged)
