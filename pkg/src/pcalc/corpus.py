"""A small shared corpus of test functions.

Each entry carries the function as an expression, its hand-written
derivative (None where no classical derivative exists everywhere), a
sensible evaluation domain, and a smoothness flag.  The CLI accepts any
of these by name as "corpus:NAME".
"""

from __future__ import annotations

from dataclasses import dataclass

from .errors import UsageError
from .expr import Expr, parse

__all__ = ["CorpusEntry", "corpus_list", "corpus_entry", "smooth_entries"]


@dataclass(frozen=True)
class CorpusEntry:
    name: str
    f: Expr
    fprime: Expr | None
    domain: tuple[float, float]
    smooth: bool


_RAW: tuple[tuple[str, str, str | None, tuple[float, float], bool], ...] = (
    ("linear", "t", "1", (-10.0, 10.0), True),
    ("square", "t^2", "2*t", (-10.0, 10.0), True),
    ("cube", "t^3", "3*t^2", (-10.0, 10.0), True),
    ("sin", "sin(t)", "cos(t)", (-10.0, 10.0), True),
    ("cos", "cos(t)", "-sin(t)", (-10.0, 10.0), True),
    ("exp", "exp(t)", "exp(t)", (-10.0, 10.0), True),
    ("ln", "ln(t)", "1/t", (1e-3, 10.0), True),
    ("sqrt", "sqrt(t)", "1/(2*sqrt(t))", (0.0, 10.0), True),
    ("lorentz", "1/(1+t^2)", "-(2*t)/(1+t^2)^2", (-10.0, 10.0), True),
    ("gauss", "exp(-(t^2))", "-(2*t)*exp(-(t^2))", (-10.0, 10.0), True),
    ("abs", "abs(t)", None, (-10.0, 10.0), False),
    ("constant", "1", "0", (-10.0, 10.0), True),
)

_CORPUS: dict[str, CorpusEntry] = {
    name: CorpusEntry(
        name=name,
        f=parse(src),
        fprime=None if dsrc is None else parse(dsrc),
        domain=dom,
        smooth=smooth,
    )
    for name, src, dsrc, dom, smooth in _RAW
}


def corpus_list() -> list[CorpusEntry]:
    """All entries, in their fixed declaration order."""
    return list(_CORPUS.values())


def corpus_entry(name: str) -> CorpusEntry:
    try:
        return _CORPUS[name]
    except KeyError:
        known = ", ".join(_CORPUS)
        raise UsageError(f"unknown corpus function {name!r}; known: {known}") from None


def smooth_entries() -> list[CorpusEntry]:
    return [e for e in _CORPUS.values() if e.smooth]
