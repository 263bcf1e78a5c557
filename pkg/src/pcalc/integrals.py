"""Weighted integrals along a deformation family, and the calculus checks.

The antiderivative pairing divides the integrand by the multiplier:
I(f)(t) = integral of f(x)/ph_zero(x) over [a, t].  Endpoint blowups of
1/ph_zero (khalil-style at 0) are handled by the graded quadrature layer.

ftc_forward and ftc_backward quantify both directions of the fundamental
theorem; integration_by_parts_check does the same for the product rule in
integral form.  All three return plain residual magnitudes.
"""

from __future__ import annotations

import math
from collections.abc import Callable
from dataclasses import dataclass

from .derivatives import as_scalar_fn, extrapolate_quotient, p_derivative_formula
from .errors import EvaluationError, NonIntegrableError, ParameterError, QuadratureError
from .expr import Expr
from .families import PFunction
from .quadrature import integrate_graded

__all__ = [
    "QuadratureResult", "p_integral",
    "ftc_forward", "ftc_backward", "integration_by_parts_check",
]


@dataclass(frozen=True)
class QuadratureResult:
    value: float
    error_estimate: float
    subdivisions: int
    graded: bool


def _weighted_integrand(fam: PFunction,
                        fn: Callable[[float], float]) -> Callable[[float], float]:
    def g(x: float) -> float:
        d = fam.ph_zero(x)
        if d == 0.0:
            raise NonIntegrableError(
                f"multiplier of {fam.label} vanishes at x={x!r}; "
                "1/ph_zero is not integrable across that point"
            )
        return fn(x) / d

    return g


def p_integral(fam: PFunction, f: Expr | str | Callable[[float], float],
               a: float, t: float, tol: float = 1e-8) -> QuadratureResult:
    """Integrate f(x)/ph_zero(x) over [a, t] to absolute tolerance tol."""
    if not a <= t:
        raise ParameterError(f"need a <= t, got a={a!r}, t={t!r}")
    if not (fam.domain.contains_closure(a) and fam.domain.contains_closure(t)):
        raise ParameterError(
            f"[{a!r}, {t!r}] not within the closure of the {fam.label} domain {fam.domain}"
        )
    if a == t:
        return QuadratureResult(0.0, 0.0, 0, False)
    fn, _ = as_scalar_fn(f)
    value, err, panels, graded = integrate_graded(_weighted_integrand(fam, fn), a, t, tol)
    return QuadratureResult(value, err, panels, graded)


def ftc_forward(fam: PFunction, f: Expr | str | Callable[[float], float],
                a: float, t: float, tol: float = 1e-8) -> float:
    """|derivative-of-the-integral residual| at an interior point t.

    Builds the difference quotient of I(f) incrementally: each level
    integrates only [t, p(t, h)], with the inner quadrature tolerance
    scaled by |h| so the quotient noise stays near tol/100 at every level.
    Extrapolates both sides, then compares against f(t).
    """
    if not a < t:
        raise ParameterError(f"need a < t, got a={a!r}, t={t!r}")
    fam.require(t)
    fn, _ = as_scalar_fn(f)
    f_t = fn(t)
    if not math.isfinite(f_t):
        raise EvaluationError(f"f({t!r}) is not finite")
    g = _weighted_integrand(fam, fn)
    h0 = max(1e-2, 1e-2 * abs(t))

    def quotient(h: float) -> float | None:
        try:
            pt = fam.p(t, h)
        except EvaluationError:
            return None
        if not (fam.domain.contains(pt) and fam.domain.contains(t)):
            return None
        lo, hi = (t, pt) if pt >= t else (pt, t)
        if lo == hi:
            return 0.0
        try:
            seg, _, _, _ = integrate_graded(g, lo, hi, (tol / 100.0) * abs(h))
        except QuadratureError:
            return None
        q = (seg if pt >= t else -seg) / h
        return q if math.isfinite(q) else None

    vr, _, _, _, _ = extrapolate_quotient(quotient, 1.0, h0, tol, 16)
    vl, _, _, _, _ = extrapolate_quotient(quotient, -1.0, h0, tol, 16)
    return abs(0.5 * (vr + vl) - f_t)


def ftc_backward(fam: PFunction, F: Expr | str, a: float, b: float,
                 tol: float = 1e-8) -> float:
    """|integral-of-the-derivative residual| over [a, b].

    The derivative of F is taken on the product-formula route and pushed
    back through the weighted quadrature, so both halves of the pairing
    are exercised rather than cancelled symbolically.
    """
    fn, e = as_scalar_fn(F)
    if e is None:
        raise ParameterError("ftc_backward needs F as an expression")

    def dF(x: float) -> float:
        return p_derivative_formula(fam, e, x)

    res = p_integral(fam, dF, a, b, tol)
    expected = fn(b) - fn(a)
    return abs(res.value - expected)


def integration_by_parts_check(fam: PFunction, f: Expr | str, g: Expr | str,
                               a: float, b: float, tol: float = 1e-8) -> float:
    """Residual of the integral product rule over [a, b].

    Compares I(f * Dg) against [f*g] at the endpoints minus I(Df * g),
    with both derivatives on the product-formula route.
    """
    ffn, fe = as_scalar_fn(f)
    gfn, ge = as_scalar_fn(g)
    if fe is None or ge is None:
        raise ParameterError("integration_by_parts_check needs f and g as expressions")

    def f_dg(x: float) -> float:
        return ffn(x) * p_derivative_formula(fam, ge, x)

    def df_g(x: float) -> float:
        return p_derivative_formula(fam, fe, x) * gfn(x)

    lhs = p_integral(fam, f_dg, a, b, tol).value
    boundary = ffn(b) * gfn(b) - ffn(a) * gfn(a)
    rhs = boundary - p_integral(fam, df_g, a, b, tol).value
    return abs(lhs - rhs)
