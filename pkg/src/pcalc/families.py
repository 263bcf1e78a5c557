"""Deformation families p(t, h) and their diagnostics.

A family bundles the map p(t, h), its h-derivative ph(t, h), the
multiplier ph_zero(t) = ph(t, 0), and the valid t-interval.  Builtin
kinds: khalil, katugampola, gfd, nderiv, cosine, power; "custom" takes a
full p(t, h) expression and differentiates it symbolically in h.

Two numerical checks live here as well:

- check_offset_solvability: can p(t, h) = t +- eps be solved for h near 0,
  with the solutions shrinking as eps does?  (Solvability is reported per
  sign; some families genuinely fail one side.)
- check_l1: is 1/|ph_zero| integrable over an interval?  Uses a geometric
  mesh accumulating toward both endpoints with an analytic tail completion.
"""

from __future__ import annotations

import math
from collections.abc import Callable, Sequence
from dataclasses import dataclass

from .errors import (
    DifferentiationError,
    DomainError,
    EvaluationError,
    NonIntegrableError,
    ParameterError,
)
from .expr import Expr, differentiate, evaluate, parse, variables
from .quadrature import gk15

__all__ = [
    "Interval", "PFunction", "make_family", "FAMILY_KINDS",
    "EpsilonRecord", "SolvabilityReport", "check_offset_solvability",
    "L1Report", "check_l1", "DEFAULT_EPSILONS",
]

FAMILY_KINDS = ("khalil", "katugampola", "gfd", "nderiv", "cosine", "power", "custom")


def _pow(x: float, y: float) -> float:
    try:
        return math.pow(x, y)
    except (ValueError, OverflowError) as exc:
        raise EvaluationError(f"{x!r}^{y!r} is undefined: {exc}") from None


def _exp(x: float) -> float:
    try:
        return math.exp(x)
    except OverflowError:
        raise EvaluationError(f"exp({x!r}) overflows") from None


@dataclass(frozen=True)
class Interval:
    """A real interval with individually open or closed endpoints."""

    lo: float
    hi: float
    closed_lo: bool = False
    closed_hi: bool = False

    def contains(self, t: float) -> bool:
        if not math.isfinite(t):
            return False
        if t < self.lo or (t == self.lo and not self.closed_lo):
            return False
        if t > self.hi or (t == self.hi and not self.closed_hi):
            return False
        return True

    def contains_closure(self, t: float) -> bool:
        return math.isfinite(t) and self.lo <= t <= self.hi

    def __str__(self) -> str:
        left = "[" if self.closed_lo else "("
        right = "]" if self.closed_hi else ")"
        lo = f"{self.lo:g}" if math.isinf(self.lo) else repr(self.lo)
        hi = f"{self.hi:g}" if math.isinf(self.hi) else repr(self.hi)
        return f"{left}{lo}, {hi}{right}"


class PFunction:
    """One deformation family: p, its h-derivative, the multiplier, a domain.

    The evaluators are plain function attributes, so ``fam.p(t, h)`` calls
    through without method binding.  Instances are immutable by convention;
    construct them with make_family.
    """

    __slots__ = ("kind", "alpha", "beta", "F", "domain", "label",
                 "_p", "_ph", "_ph0")

    def __init__(self, kind: str, alpha: float | None, beta: float | None,
                 F: Expr | None, domain: Interval, label: str,
                 p: Callable[[float, float], float],
                 ph: Callable[[float, float], float],
                 ph0: Callable[[float], float]) -> None:
        self.kind = kind
        self.alpha = alpha
        self.beta = beta
        self.F = F
        self.domain = domain
        self.label = label
        self._p = p
        self._ph = ph
        self._ph0 = ph0

    def p(self, t: float, h: float) -> float:
        return self._p(t, h)

    def ph(self, t: float, h: float) -> float:
        return self._ph(t, h)

    def ph_zero(self, t: float) -> float:
        self.require(t)
        return self._ph0(t)

    def require(self, t: float) -> None:
        if not self.domain.contains(t):
            raise DomainError(f"t={t!r} outside the {self.label} domain {self.domain}")

    def __repr__(self) -> str:
        return f"PFunction<{self.label}>"


def _coerce_expr(source: Expr | str, allowed: frozenset[str], what: str) -> Expr:
    e = parse(source) if isinstance(source, str) else source
    if not isinstance(e, Expr):
        raise ParameterError(f"{what} must be an expression or source text")
    extra = variables(e) - allowed
    if extra:
        raise ParameterError(
            f"{what} may only reference {sorted(allowed)}; found {sorted(extra)}"
        )
    return e


_POSITIVE_T = Interval(0.0, math.inf)


def make_family(kind: str, alpha: float | None = None, beta: float | None = None,
                F: Expr | str | None = None) -> PFunction:
    """Construct a PFunction, validating parameters for the given kind.

    F is the generalized-family hook: for kind "nderiv" it is an expression
    in (t, alpha) replacing exp(t^(-alpha)); for kind "custom" it is the
    full p(t, h) expression (variables t, h, and optionally alpha).
    """
    if kind not in FAMILY_KINDS:
        raise ParameterError(f"unknown family {kind!r}; valid: {', '.join(FAMILY_KINDS)}")
    if beta is not None and kind != "gfd":
        raise ParameterError(f"beta only applies to the gfd family, not {kind!r}")
    if F is not None and kind not in ("nderiv", "custom"):
        raise ParameterError(f"F only applies to nderiv/custom families, not {kind!r}")

    if kind != "custom":
        if alpha is None:
            raise ParameterError(f"{kind} family requires alpha")
        if not math.isfinite(alpha):
            raise ParameterError("alpha must be finite")

    if kind == "khalil":
        _need_positive_alpha(kind, alpha)
        a = alpha

        def p(t: float, h: float, a: float = a) -> float:
            return t + h * _pow(t, 1.0 - a)

        def ph(t: float, h: float, a: float = a) -> float:
            return _pow(t, 1.0 - a)

        fam = PFunction(kind, a, None, None, _POSITIVE_T,
                        f"khalil(alpha={a:g})", p, ph,
                        lambda t, a=a: _pow(t, 1.0 - a))

    elif kind == "katugampola":
        _need_positive_alpha(kind, alpha)
        a = alpha

        def p(t: float, h: float, a: float = a) -> float:
            return t * _exp(h * _pow(t, -a))

        def ph(t: float, h: float, a: float = a) -> float:
            return _pow(t, 1.0 - a) * _exp(h * _pow(t, -a))

        fam = PFunction(kind, a, None, None, _POSITIVE_T,
                        f"katugampola(alpha={a:g})", p, ph,
                        lambda t, a=a: _pow(t, 1.0 - a))

    elif kind == "gfd":
        _need_positive_alpha(kind, alpha)
        if beta is None:
            raise ParameterError("gfd family requires beta")
        if beta <= 0.0 and beta == math.floor(beta):
            raise ParameterError(f"gfd needs beta not in {{0, -1, -2, ...}}; got {beta!r}")
        try:
            coeff = math.gamma(beta) / math.gamma(beta - alpha + 1.0)
        except ValueError:
            raise ParameterError(
                f"gamma pole at beta={beta!r}, alpha={alpha!r}: "
                "beta - alpha + 1 must avoid {0, -1, -2, ...}"
            ) from None
        a, c0 = alpha, coeff

        def p(t: float, h: float, a: float = a, c0: float = c0) -> float:
            return t + c0 * h * _pow(t, 1.0 - a)

        def ph(t: float, h: float, a: float = a, c0: float = c0) -> float:
            return c0 * _pow(t, 1.0 - a)

        fam = PFunction(kind, a, beta, None, _POSITIVE_T,
                        f"gfd(alpha={a:g}, beta={beta:g})", p, ph,
                        lambda t, a=a, c0=c0: c0 * _pow(t, 1.0 - a))

    elif kind == "nderiv":
        _need_positive_alpha(kind, alpha)
        a = alpha
        if F is None:
            def p(t: float, h: float, a: float = a) -> float:
                return t + h * _exp(_pow(t, -a))

            def ph(t: float, h: float, a: float = a) -> float:
                return _exp(_pow(t, -a))

            fam = PFunction(kind, a, None, None, _POSITIVE_T,
                            f"nderiv(alpha={a:g})", p, ph,
                            lambda t, a=a: _exp(_pow(t, -a)))
        else:
            fe = _coerce_expr(F, frozenset({"t", "alpha"}), "nderiv F")

            def fval(t: float, fe: Expr = fe, a: float = a) -> float:
                return evaluate(fe, {"t": t, "alpha": a})

            fam = PFunction(kind, a, None, fe, _POSITIVE_T,
                            f"nderiv(alpha={a:g}, F=...)",
                            lambda t, h: t + h * fval(t),
                            lambda t, h: fval(t),
                            fval)

    elif kind == "cosine":
        if alpha is None or not 0.0 < alpha <= 1.0:
            raise ParameterError(f"cosine family needs 0 < alpha <= 1, got {alpha!r}")
        a = alpha
        dom = Interval(0.0, math.pi / 2.0, closed_lo=True)

        def p(t: float, h: float, a: float = a) -> float:
            return t + math.sin(h) * _pow(math.cos(t), 1.0 - a)

        def ph(t: float, h: float, a: float = a) -> float:
            return math.cos(h) * _pow(math.cos(t), 1.0 - a)

        fam = PFunction(kind, a, None, None, dom,
                        f"cosine(alpha={a:g})", p, ph,
                        lambda t, a=a: _pow(math.cos(t), 1.0 - a))

    elif kind == "power":
        if alpha is None or not alpha > 1.0:
            raise ParameterError(f"power family needs alpha > 1, got {alpha!r}")
        a = alpha

        def p(t: float, h: float, a: float = a) -> float:
            return t + _pow(h, a)

        def ph(t: float, h: float, a: float = a) -> float:
            # d/dh h^a vanishes at h=0 since a > 1
            return a * _pow(h, a - 1.0) if h != 0.0 else 0.0

        fam = PFunction(kind, a, None, None, Interval(-math.inf, math.inf),
                        f"power(alpha={a:g})", p, ph, lambda t: 0.0)

    else:  # custom
        if F is None:
            raise ParameterError("custom family requires F: the full p(t, h) expression")
        pe = _coerce_expr(F, frozenset({"t", "h", "alpha"}), "custom p")
        if "alpha" in variables(pe) and alpha is None:
            raise ParameterError("custom p references alpha but no alpha was given")
        base = {} if alpha is None else {"alpha": alpha}

        def p(t: float, h: float, pe: Expr = pe, base: dict = base) -> float:
            return evaluate(pe, {"t": t, "h": h, **base})

        try:
            dpe = differentiate(pe, "h")
        except DifferentiationError as exc:
            msg = str(exc)

            def ph(t: float, h: float, msg: str = msg) -> float:
                raise DifferentiationError(f"custom family multiplier unavailable: {msg}")
        else:
            def ph(t: float, h: float, dpe: Expr = dpe, base: dict = base) -> float:
                return evaluate(dpe, {"t": t, "h": h, **base})

        fam = PFunction(kind, alpha, None, pe, Interval(-math.inf, math.inf),
                        "custom(p=...)", p, ph, lambda t: ph(t, 0.0))

    if kind != "custom":
        _check_range_sampling(fam)
    return fam


def _need_positive_alpha(kind: str, alpha: float | None) -> None:
    # alpha > 0 suffices throughout; values >= 1 are permitted and used
    if alpha is None or not alpha > 0.0:
        raise ParameterError(f"{kind} family needs alpha > 0, got {alpha!r}")


def _check_range_sampling(fam: PFunction) -> None:
    """Sampled sanity check: p(t, h) stays in the t-domain for small h.

    The admissible |h| shrinks near a domain boundary (the deformation
    speed ph_zero may blow up there, as for the exponential multiplier
    kind), so the probe step is scaled by the local speed and the
    distance to the nearest boundary rather than taken fixed.
    """
    dom = fam.domain
    if math.isinf(dom.hi):
        ts = (0.1, 1.0, 10.0)
    else:
        lo = dom.lo if math.isfinite(dom.lo) else dom.hi - 1.0
        width = dom.hi - lo
        ts = tuple(lo + width * q for q in (0.1, 0.5, 0.9))
    for t in ts:
        if not dom.contains(t):
            continue
        room = math.inf
        if math.isfinite(dom.lo):
            room = t - dom.lo
        if math.isfinite(dom.hi):
            room = min(room, dom.hi - t)
        try:
            speed = abs(fam.ph_zero(t))
        except (EvaluationError, DifferentiationError):
            speed = 0.0
        cap = 1e-3
        if math.isfinite(room) and speed > 0.0:
            cap = min(cap, 0.25 * room / speed)
        for mag in (cap, 1e-3 * cap):
            for h in (mag, -mag):
                try:
                    pt = fam.p(t, h)
                except EvaluationError:
                    continue  # one-sided families: nothing to check
                if not dom.contains(pt):
                    raise ParameterError(
                        f"{fam.label}: p({t:g}, {h:g}) = {pt!r} leaves the domain {dom}"
                    )


# --- solvability of p(t, h) = t +- eps near h = 0 ---------------------------

DEFAULT_EPSILONS = tuple(10.0 ** (-k) for k in range(2, 9))


@dataclass(frozen=True)
class EpsilonRecord:
    """Solutions of p(t, h) = t + eps and p(t, h) = t - eps, if found."""

    epsilon: float
    h_plus: float | None
    h_minus: float | None
    gap_plus: float | None
    gap_minus: float | None


@dataclass(frozen=True)
class SolvabilityReport:
    t: float
    records: tuple[EpsilonRecord, ...]
    verdict_plus: bool
    verdict_minus: bool

    @property
    def both(self) -> bool:
        return self.verdict_plus and self.verdict_minus


def check_offset_solvability(
    fam: PFunction,
    t: float,
    epsilons: Sequence[float] = DEFAULT_EPSILONS,
    max_doublings: int = 64,
) -> SolvabilityReport:
    """Probe whether both one-sided offsets of t are reachable by p(t, .).

    A side's verdict is true when every epsilon produced a root h and the
    root magnitudes shrink toward 0 as epsilon does.  Absence of a root is
    an outcome, never an error.
    """
    fam.require(t)
    eps = tuple(float(e) for e in epsilons)
    if not eps or any(e <= 0.0 for e in eps):
        raise ParameterError("epsilons must be positive")
    if any(b >= a for a, b in zip(eps, eps[1:])):
        raise ParameterError("epsilons must be strictly decreasing")

    records = []
    for e in eps:
        hp, gp = _solve_offset(fam, t, t + e, max_doublings)
        hm, gm = _solve_offset(fam, t, t - e, max_doublings)
        records.append(EpsilonRecord(e, hp, hm, gp, gm))
    return SolvabilityReport(
        t=t,
        records=tuple(records),
        verdict_plus=_shrinking([r.h_plus for r in records]),
        verdict_minus=_shrinking([r.h_minus for r in records]),
    )


def _shrinking(hs: list[float | None]) -> bool:
    if any(h is None for h in hs):
        return False
    mags = [abs(h) for h in hs]  # type: ignore[arg-type]
    if len(mags) == 1:
        return True
    ordered = all(b <= a * (1.0 + 1e-12) for a, b in zip(mags, mags[1:]))
    return ordered and mags[-1] < mags[0]


def _solve_offset(
    fam: PFunction, t: float, target: float, max_doublings: int
) -> tuple[float | None, float | None]:
    def resid(h: float) -> float | None:
        try:
            v = fam.p(t, h)
        except EvaluationError:
            return None
        return v - target if math.isfinite(v) else None

    r0 = resid(0.0)
    if r0 is None:
        return None, None
    if r0 == 0.0:
        return None, None  # degenerate target; h=0 is not an admissible root

    best: tuple[float, float] | None = None
    for sign in (1.0, -1.0):
        prev_h, prev_r = 0.0, r0
        h = 1e-18 * sign
        for _ in range(max_doublings):
            r = resid(h)
            if r is None:
                break
            if r == 0.0 or (r > 0.0) != (prev_r > 0.0):
                root = h if r == 0.0 else _bisect_offset(resid, prev_h, h, prev_r)
                rr = resid(root)
                gap = abs(rr) if rr is not None else math.inf
                if best is None or abs(root) < abs(best[0]):
                    best = (root, gap)
                break
            prev_h, prev_r = h, r
            h *= 2.0

    if best is None:
        return None, None
    root, gap = best
    eps = abs(target - t)
    if gap > 1e-3 * eps:
        return None, None
    return root, gap


def _bisect_offset(
    resid: Callable[[float], float | None], lo: float, hi: float, rlo: float
) -> float:
    for _ in range(128):
        mid = 0.5 * (lo + hi)
        if mid == lo or mid == hi:
            break
        rm = resid(mid)
        if rm is None:
            hi = mid
            continue
        if rm == 0.0:
            return mid
        if (rm > 0.0) == (rlo > 0.0):
            lo, rlo = mid, rm
        else:
            hi = mid
    return 0.5 * (lo + hi)


# --- integrability of 1/|ph_zero| --------------------------------------------

@dataclass(frozen=True)
class L1Report:
    """Refinement estimate of the integral of 1/|ph_zero| over [a, b]."""

    interval: tuple[float, float]
    estimate: float
    converged: bool
    levels: int
    diverged: bool


def check_l1(fam: PFunction, a: float, b: float, tol: float = 1e-8,
             max_levels: int = 48) -> L1Report:
    """Estimate the integral of 1/|ph_zero| with endpoint-graded cells.

    Convergence requires the one-panel-per-cell and two-panel-per-cell
    sums (plus analytic geometric tails) to agree within tol.  A sustained
    cell-contribution ratio >= 1 or a non-finite weight reports divergence
    instead of raising.
    """
    if not a < b:
        raise ParameterError(f"need a < b, got [{a!r}, {b!r}]")
    if not (fam.domain.contains_closure(a) and fam.domain.contains_closure(b)):
        raise DomainError(f"[{a!r}, {b!r}] not within the closure of {fam.domain}")

    def weight(x: float) -> float:
        try:
            d = fam._ph0(x)
        except EvaluationError:
            return math.inf
        if d == 0.0 or not math.isfinite(d):
            return math.inf
        return 1.0 / abs(d)

    mid = 0.5 * (a + b)
    try:
        left = _graded_half(weight, a, mid, True, tol, max_levels)
        right = _graded_half(weight, mid, b, False, tol, max_levels)
    except NonIntegrableError:
        return L1Report((a, b), math.inf, False, 0, True)

    coarse = left.coarse + left.tail + right.coarse + right.tail
    fine = left.fine + left.tail + right.fine + right.tail
    diverged = left.diverged or right.diverged
    if diverged or not math.isfinite(fine):
        return L1Report((a, b), math.inf, False,
                        max(left.levels, right.levels), True)
    tails_ok = left.tail_trusted and right.tail_trusted
    converged = tails_ok and abs(fine - coarse) <= tol
    return L1Report((a, b), fine, converged, max(left.levels, right.levels), False)


@dataclass
class _HalfSum:
    coarse: float
    fine: float
    tail: float
    tail_trusted: bool
    levels: int
    diverged: bool


def _graded_half(weight: Callable[[float], float], lo: float, hi: float,
                 toward_lo: bool, tol: float, max_levels: int) -> _HalfSum:
    width = hi - lo
    coarse = fine = 0.0
    cells: list[float] = []
    for k in range(max_levels):
        f_hi = 2.0 ** (-k)
        f_lo = 2.0 ** (-(k + 1))
        if toward_lo:
            ca, cb = lo + width * f_lo, lo + width * f_hi
        else:
            ca, cb = hi - width * f_hi, hi - width * f_lo
        v1, _ = gk15(weight, ca, cb)
        cm = 0.5 * (ca + cb)
        v2 = gk15(weight, ca, cm)[0] + gk15(weight, cm, cb)[0]
        coarse += v1
        fine += v2
        cells.append(v2)
        if 0.0 <= v2 < 1e-4 * tol:
            break

    levels = len(cells)
    tail = 0.0
    trusted = True
    diverged = False
    positive = [c for c in cells[-4:] if c > 0.0]
    if len(positive) >= 3:
        r1 = positive[-1] / positive[-2]
        r2 = positive[-2] / positive[-3]
        if r1 >= 0.999 and r2 >= 0.999:
            diverged = True
        elif r1 < 0.999 and abs(r1 - r2) <= 1e-2 * max(r1, 1e-30):
            tail = cells[-1] * r1 / (1.0 - r1)
        else:
            # ratio unsettled: bound the tail crudely and distrust it
            tail = cells[-1]
            trusted = cells[-1] <= 0.1 * tol
    elif cells and cells[-1] > 1e-4 * tol:
        trusted = False
    return _HalfSum(coarse, fine, tail, trusted, levels, diverged)
