from __future__ import annotations

import math
from dataclasses import dataclass
from typing import Iterable, Sequence, Union

import numpy as np

from ..errors import UsageError


@dataclass(frozen=True)
class Interval:
    """An interval of the real line.

    ``singular_lo`` / ``singular_hi`` flag an integrable endpoint singularity;
    they are only meaningful on open endpoints.
    """

    lo: float
    hi: float
    lo_open: bool = True
    hi_open: bool = True
    singular_lo: bool = False
    singular_hi: bool = False

    def __post_init__(self):
        if not (self.lo < self.hi):
            raise UsageError(f"interval requires lo < hi, got ({self.lo}, {self.hi})")
        if self.singular_lo and not self.lo_open:
            raise UsageError("singular_lo requires an open lower endpoint")
        if self.singular_hi and not self.hi_open:
            raise UsageError("singular_hi requires an open upper endpoint")

    @property
    def length(self) -> float:
        return self.hi - self.lo

    @property
    def finite(self) -> bool:
        return math.isfinite(self.lo) and math.isfinite(self.hi)

    def __contains__(self, x) -> bool:
        lo_ok = x > self.lo if self.lo_open else x >= self.lo
        hi_ok = x < self.hi if self.hi_open else x <= self.hi
        return bool(lo_ok and hi_ok)

    def inner(self, rel_margin: float = 1e-6) -> tuple[float, float]:
        """Closed sub-window obtained by trimming open endpoints."""
        if not self.finite:
            raise UsageError(f"a finite interval is required here, got {self}")
        m = rel_margin * self.length
        return (self.lo + m if self.lo_open else self.lo,
                self.hi - m if self.hi_open else self.hi)

    def grid(self, n: int, rel_margin: float = 1e-6) -> np.ndarray:
        a, b = self.inner(rel_margin)
        return np.linspace(a, b, n)

    def split(self, x: float) -> tuple["Interval", "Interval"]:
        if not (self.lo < x < self.hi):
            raise UsageError(f"split point {x} outside {self}")
        return (Interval(self.lo, x, self.lo_open, True, self.singular_lo, False),
                Interval(x, self.hi, True, self.hi_open, False, self.singular_hi))


Domain = Union[Interval, Sequence[Interval]]


def as_pieces(E: Domain) -> list[Interval]:
    """Normalise an interval or a union of intervals to a list."""
    if isinstance(E, Interval):
        return [E]
    pieces = list(E)
    if not pieces or not all(isinstance(p, Interval) for p in pieces):
        raise UsageError(f"expected an Interval or a sequence of Intervals, got {E!r}")
    return pieces


def interval(lo: float, hi: float, **kw) -> Interval:
    return Interval(float(lo), float(hi), **kw)


def hull(pieces: Iterable[Interval]) -> Interval:
    pieces = list(pieces)
    return Interval(min(p.lo for p in pieces), max(p.hi for p in pieces))
