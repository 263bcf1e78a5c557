"""Expression parsing, evaluation, printing, and symbolic differentiation.

The grammar (whitespace insignificant between tokens)::

    expr   := term (("+"|"-") term)*
    term   := factor (("*"|"/") factor)*
    factor := unary ("^" factor)?
    unary  := "-" unary | atom
    atom   := NUMBER | IDENT | IDENT "(" expr ")" | "(" expr ")"

"^" is right-associative and binds tighter than "*" and "/".  Note the
consequence of `factor := unary ...`: in "-t^2" the unary minus captures
"t" first, so the string parses as (-t)^2.  Write "-(t^2)" for the other
reading.

Functions are unary: sin, cos, tan, exp, ln, sqrt, abs, gamma.  The
identifiers pi and e are predefined constants.  Any other identifier must
be one of the allowed variable names {t, x, h, alpha, beta} or a caller
declared parameter; unknown names are rejected at parse time.
"""

from __future__ import annotations

import math
import re
from collections.abc import Callable, Mapping
from dataclasses import dataclass
from typing import Union

from .errors import DifferentiationError, EvaluationError, ParseError

__all__ = [
    "Expr", "Num", "Var", "Neg", "BinOp", "Call", "Env",
    "parse", "evaluate", "differentiate", "substitute", "to_source",
    "variables", "DEFAULT_VARIABLES", "CONSTANTS", "FUNCTIONS",
]


@dataclass(frozen=True)
class Num:
    value: float


@dataclass(frozen=True)
class Var:
    name: str


@dataclass(frozen=True)
class Neg:
    arg: "Expr"


@dataclass(frozen=True)
class BinOp:
    op: str  # one of + - * / ^
    left: "Expr"
    right: "Expr"


@dataclass(frozen=True)
class Call:
    func: str
    arg: "Expr"


Expr = Union[Num, Var, Neg, BinOp, Call]
Env = Mapping[str, float]

DEFAULT_VARIABLES = frozenset({"t", "x", "h", "alpha", "beta"})
CONSTANTS: dict[str, float] = {"pi": math.pi, "e": math.e}

FUNCTIONS: dict[str, Callable[[float], float]] = {
    "sin": math.sin,
    "cos": math.cos,
    "tan": math.tan,
    "exp": math.exp,
    "ln": math.log,
    "sqrt": math.sqrt,
    "abs": abs,
    "gamma": math.gamma,
}


# ---------------------------------------------------------------------------
# Tokenizer
# ---------------------------------------------------------------------------

_TOKEN_RE = re.compile(
    r"\s*(?:"
    r"(?P<num>(?:\d+(?:\.\d*)?|\.\d+)(?:[eE][+-]?\d+)?)"
    r"|(?P<ident>[A-Za-z_][A-Za-z_0-9]*)"
    r"|(?P<op>[-+*/^(),])"
    r")"
)


def _byte_offset(source: str, char_pos: int) -> int:
    return len(source[:char_pos].encode("utf-8"))


def _tokenize(source: str) -> list[tuple[str, str, int]]:
    tokens: list[tuple[str, str, int]] = []
    pos = 0
    n = len(source)
    while pos < n:
        m = _TOKEN_RE.match(source, pos)
        if m is None or m.end() == pos:
            # skip leading space before reporting
            stripped = source[pos:].lstrip()
            if not stripped:
                break
            bad_pos = n - len(stripped)
            raise ParseError(
                f"unexpected character {stripped[0]!r}", _byte_offset(source, bad_pos)
            )
        kind = m.lastgroup
        text = m.group(kind)
        tokens.append((kind, text, _byte_offset(source, m.start(kind))))
        pos = m.end()
    return tokens


# ---------------------------------------------------------------------------
# Parser
# ---------------------------------------------------------------------------

class _Parser:
    def __init__(self, source: str, allowed_vars: frozenset[str]) -> None:
        self.source = source
        self.tokens = _tokenize(source)
        self.pos = 0
        self.allowed = allowed_vars

    def _peek(self) -> tuple[str, str, int] | None:
        return self.tokens[self.pos] if self.pos < len(self.tokens) else None

    def _next(self) -> tuple[str, str, int]:
        tok = self._peek()
        if tok is None:
            raise ParseError("unexpected end of input",
                             len(self.source.encode("utf-8")))
        self.pos += 1
        return tok

    def _expect_op(self, op: str) -> None:
        tok = self._peek()
        if tok is None or tok[0] != "op" or tok[1] != op:
            off = tok[2] if tok else len(self.source.encode("utf-8"))
            got = repr(tok[1]) if tok else "end of input"
            raise ParseError(f"expected {op!r}, got {got}", off)
        self.pos += 1

    def _at_op(self, *ops: str) -> str | None:
        tok = self._peek()
        if tok is not None and tok[0] == "op" and tok[1] in ops:
            return tok[1]
        return None

    def parse(self) -> Expr:
        if not self.tokens:
            raise ParseError("empty expression", 0)
        e = self.expr()
        tok = self._peek()
        if tok is not None:
            raise ParseError(f"unexpected trailing input {tok[1]!r}", tok[2])
        return e

    def expr(self) -> Expr:
        e = self.term()
        while (op := self._at_op("+", "-")) is not None:
            self.pos += 1
            e = BinOp(op, e, self.term())
        return e

    def term(self) -> Expr:
        e = self.factor()
        while (op := self._at_op("*", "/")) is not None:
            self.pos += 1
            e = BinOp(op, e, self.factor())
        return e

    def factor(self) -> Expr:
        e = self.unary()
        if self._at_op("^") is not None:
            self.pos += 1
            e = BinOp("^", e, self.factor())  # right associative
        return e

    def unary(self) -> Expr:
        if self._at_op("-") is not None:
            self.pos += 1
            return Neg(self.unary())
        return self.atom()

    def atom(self) -> Expr:
        kind, text, off = self._next()
        if kind == "num":
            return Num(float(text))
        if kind == "ident":
            if self._at_op("(") is not None:
                if text not in FUNCTIONS:
                    raise ParseError(f"unknown function {text!r}", off)
                self.pos += 1
                arg = self.expr()
                if self._at_op(",") is not None:
                    tok = self._peek()
                    raise ParseError(
                        f"function {text!r} takes exactly one argument", tok[2]
                    )
                self._expect_op(")")
                return Call(text, arg)
            if text in CONSTANTS or text in self.allowed:
                return Var(text)
            raise ParseError(f"unknown variable {text!r}", off)
        if kind == "op" and text == "(":
            e = self.expr()
            self._expect_op(")")
            return e
        raise ParseError(f"unexpected token {text!r}", off)


def parse(source: str, params: tuple[str, ...] = ()) -> Expr:
    """Parse a source string into an Expr tree.

    `params` declares extra variable names allowed beyond the default set.
    """
    allowed = DEFAULT_VARIABLES | frozenset(params)
    return _Parser(source, allowed).parse()


# ---------------------------------------------------------------------------
# Evaluation
# ---------------------------------------------------------------------------

def evaluate(e: Expr, env: Env) -> float:
    """Evaluate an expression to a float.

    Unbound variables are an error, never a default.  Domain violations
    (ln of a nonpositive value, division by zero, fractional powers of
    negatives, gamma at a pole) raise EvaluationError.
    """
    if isinstance(e, Num):
        return e.value
    if isinstance(e, Var):
        if e.name in env:
            return float(env[e.name])
        if e.name in CONSTANTS:
            return CONSTANTS[e.name]
        raise EvaluationError(f"unbound variable {e.name!r}")
    if isinstance(e, Neg):
        return -evaluate(e.arg, env)
    if isinstance(e, BinOp):
        a = evaluate(e.left, env)
        b = evaluate(e.right, env)
        op = e.op
        if op == "+":
            return a + b
        if op == "-":
            return a - b
        if op == "*":
            return a * b
        if op == "/":
            if b == 0.0:
                raise EvaluationError("division by zero")
            return a / b
        # power
        try:
            return math.pow(a, b)
        except ValueError as exc:
            raise EvaluationError(f"domain error in {a!r}^{b!r}") from exc
        except OverflowError as exc:
            raise EvaluationError(f"overflow in {a!r}^{b!r}") from exc
    if isinstance(e, Call):
        v = evaluate(e.arg, env)
        try:
            return FUNCTIONS[e.func](v)
        except ValueError as exc:
            raise EvaluationError(f"domain error in {e.func}({v!r})") from exc
        except OverflowError as exc:
            raise EvaluationError(f"overflow in {e.func}({v!r})") from exc
    raise TypeError(f"not an Expr node: {e!r}")


def variables(e: Expr) -> frozenset[str]:
    """All variable names referenced by e (constants pi/e excluded)."""
    out: set[str] = set()

    def walk(node: Expr) -> None:
        if isinstance(node, Var):
            if node.name not in CONSTANTS:
                out.add(node.name)
        elif isinstance(node, Neg):
            walk(node.arg)
        elif isinstance(node, BinOp):
            walk(node.left)
            walk(node.right)
        elif isinstance(node, Call):
            walk(node.arg)

    walk(e)
    return frozenset(out)


def substitute(e: Expr, var: str, replacement: Expr) -> Expr:
    """Replace every occurrence of variable `var` with `replacement`."""
    if isinstance(e, Num):
        return e
    if isinstance(e, Var):
        return replacement if e.name == var else e
    if isinstance(e, Neg):
        return Neg(substitute(e.arg, var, replacement))
    if isinstance(e, BinOp):
        return BinOp(e.op, substitute(e.left, var, replacement),
                     substitute(e.right, var, replacement))
    return Call(e.func, substitute(e.arg, var, replacement))


# ---------------------------------------------------------------------------
# Differentiation (with light constant folding; no simplification engine)
# ---------------------------------------------------------------------------

_ZERO = Num(0.0)
_ONE = Num(1.0)


def _is_num(e: Expr, v: float | None = None) -> bool:
    return isinstance(e, Num) and (v is None or e.value == v)


def _fold(value: float) -> Expr | None:
    return Num(value) if math.isfinite(value) else None


def _add(a: Expr, b: Expr) -> Expr:
    if _is_num(a, 0.0):
        return b
    if _is_num(b, 0.0):
        return a
    if isinstance(a, Num) and isinstance(b, Num):
        folded = _fold(a.value + b.value)
        if folded is not None:
            return folded
    return BinOp("+", a, b)


def _sub(a: Expr, b: Expr) -> Expr:
    if _is_num(b, 0.0):
        return a
    if _is_num(a, 0.0):
        return _neg(b)
    if isinstance(a, Num) and isinstance(b, Num):
        folded = _fold(a.value - b.value)
        if folded is not None:
            return folded
    return BinOp("-", a, b)


def _mul(a: Expr, b: Expr) -> Expr:
    if _is_num(a, 0.0) or _is_num(b, 0.0):
        return _ZERO
    if _is_num(a, 1.0):
        return b
    if _is_num(b, 1.0):
        return a
    if isinstance(a, Num) and isinstance(b, Num):
        folded = _fold(a.value * b.value)
        if folded is not None:
            return folded
    return BinOp("*", a, b)


def _div(a: Expr, b: Expr) -> Expr:
    if _is_num(a, 0.0):
        return _ZERO
    if _is_num(b, 1.0):
        return a
    if isinstance(a, Num) and isinstance(b, Num) and b.value != 0.0:
        folded = _fold(a.value / b.value)
        if folded is not None:
            return folded
    return BinOp("/", a, b)


def _pow(a: Expr, b: Expr) -> Expr:
    if _is_num(b, 1.0):
        return a
    if _is_num(b, 0.0):
        return _ONE
    return BinOp("^", a, b)


def _neg(a: Expr) -> Expr:
    if isinstance(a, Num):
        return Num(-a.value)
    if isinstance(a, Neg):
        return a.arg
    return Neg(a)


def differentiate(e: Expr, var: str = "t") -> Expr:
    """Symbolic derivative of e with respect to `var`.

    abs and gamma nodes whose argument depends on `var` raise
    DifferentiationError so callers can fall back to the limit path.
    Subtrees independent of `var` differentiate to 0 regardless of shape.
    """
    if var not in variables(e):
        return _ZERO
    if isinstance(e, Var):
        return _ONE  # variables(e) contains var, so e is Var(var)
    if isinstance(e, Neg):
        return _neg(differentiate(e.arg, var))
    if isinstance(e, BinOp):
        op = e.op
        if op in "+-":
            da = differentiate(e.left, var)
            db = differentiate(e.right, var)
            return _add(da, db) if op == "+" else _sub(da, db)
        if op == "*":
            return _add(_mul(differentiate(e.left, var), e.right),
                        _mul(e.left, differentiate(e.right, var)))
        if op == "/":
            num = _sub(_mul(differentiate(e.left, var), e.right),
                       _mul(e.left, differentiate(e.right, var)))
            return _div(num, _pow(e.right, Num(2.0)))
        # power u^v
        u, v = e.left, e.right
        du_needed = var in variables(u)
        dv_needed = var in variables(v)
        if dv_needed and not du_needed:
            # c^v -> c^v * ln(c) * v'
            return _mul(_mul(e, Call("ln", u)), differentiate(v, var))
        if du_needed and not dv_needed:
            # u^c -> c * u^(c-1) * u'
            expm1 = _sub(v, _ONE) if not isinstance(v, Num) else Num(v.value - 1.0)
            return _mul(_mul(v, _pow(u, expm1)), differentiate(u, var))
        # general u^v -> u^v * (v' ln u + v u'/u)
        return _mul(e, _add(_mul(differentiate(v, var), Call("ln", u)),
                            _mul(v, _div(differentiate(u, var), u))))
    if isinstance(e, Call):
        u = e.arg
        du = differentiate(u, var)
        name = e.func
        if name == "sin":
            outer = Call("cos", u)
        elif name == "cos":
            outer = _neg(Call("sin", u))
        elif name == "tan":
            outer = _div(_ONE, _pow(Call("cos", u), Num(2.0)))
        elif name == "exp":
            outer = e
        elif name == "ln":
            return _div(du, u)
        elif name == "sqrt":
            return _div(du, _mul(Num(2.0), e))
        else:
            # abs has no classical derivative at kinks; gamma would need
            # digamma.  Refuse so callers use the limit path instead.
            raise DifferentiationError(
                f"cannot differentiate through {name!r}; use the limit path"
            )
        return _mul(outer, du)
    raise TypeError(f"not an Expr node: {e!r}")


# ---------------------------------------------------------------------------
# Printing
# ---------------------------------------------------------------------------

def _fmt_num(v: float) -> str:
    if v == int(v) and abs(v) < 1e16:
        return str(int(v))
    return repr(v)


_LEVEL_ADD = 1
_LEVEL_MUL = 2
_LEVEL_UNARY = 3
_LEVEL_ATOM = 4


def _node_level(e: Expr) -> int:
    if isinstance(e, BinOp):
        if e.op in "+-":
            return _LEVEL_ADD
        if e.op in "*/":
            return _LEVEL_MUL
        return _LEVEL_UNARY  # ^ produced by factor
    if isinstance(e, Neg):
        return _LEVEL_UNARY
    return _LEVEL_ATOM


def _print(e: Expr, min_level: int) -> str:
    if isinstance(e, Num):
        s = _fmt_num(e.value)
    elif isinstance(e, Var):
        s = e.name
    elif isinstance(e, Call):
        s = f"{e.func}({_print(e.arg, _LEVEL_ADD)})"
    elif isinstance(e, Neg):
        # the operand of unary minus must reparse as a unary, so anything
        # below atom level other than another Neg gets parenthesized
        inner = e.arg
        if isinstance(inner, (Num, Var, Call, Neg)) and not (
            isinstance(inner, Num) and inner.value < 0
        ):
            s = "-" + _print(inner, _LEVEL_ATOM)
        else:
            s = f"-({_print(inner, _LEVEL_ADD)})"
    else:  # BinOp
        op = e.op
        if op in "+-":
            s = f"{_print(e.left, _LEVEL_ADD)} {op} {_print(e.right, _LEVEL_MUL)}"
        elif op in "*/":
            s = f"{_print(e.left, _LEVEL_MUL)}{op}{_print(e.right, _LEVEL_UNARY)}"
        else:  # ^ right-associative; base must be strictly tighter
            s = f"{_print(e.left, _LEVEL_ATOM)}^{_print(e.right, _LEVEL_UNARY)}"
    if _node_level(e) < min_level:
        return f"({s})"
    return s


def to_source(e: Expr) -> str:
    """Render e to a string that reparses to an equal tree."""
    return _print(e, _LEVEL_ADD)
