"""Tiny outward-rounded scalar interval arithmetic.

Used only where a certificate needs a floating-point lower bound that is
safe against rounding: every arithmetic result is widened by one ulp per
operation via math.nextafter.  Nearest-rounded values are kept alongside
for reporting.
"""

from __future__ import annotations

import math
from dataclasses import dataclass

_INF = math.inf


def down(x: float) -> float:
    return math.nextafter(x, -_INF)


def up(x: float) -> float:
    return math.nextafter(x, _INF)


@dataclass(frozen=True)
class RInterval:
    """Closed interval [lo, hi] with outward-rounded endpoints."""

    lo: float
    hi: float

    def __post_init__(self):
        if self.lo > self.hi:
            raise ValueError(f"empty interval [{self.lo}, {self.hi}]")

    @property
    def width(self) -> float:
        return self.hi - self.lo

    @property
    def mid(self) -> float:
        return 0.5 * (self.lo + self.hi)


def affine_image(iv: RInterval, c: float, b: float) -> RInterval:
    """Outward-rounded image of iv under y -> c*y + b."""
    ends = (c * iv.lo + b, c * iv.hi + b)
    # two rounded operations per endpoint: widen by two ulps
    return RInterval(down(down(min(ends))), up(up(max(ends))))


def shrink(iv: RInterval, delta: float) -> RInterval:
    """[lo + delta, hi - delta]; raises if the interval empties."""
    return RInterval(up(iv.lo + delta), down(iv.hi - delta))


def contains(outer: RInterval, inner: RInterval) -> bool:
    return outer.lo <= inner.lo and inner.hi <= outer.hi
