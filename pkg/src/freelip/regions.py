"""Finite unions of real intervals with open/closed ends.

These are the symbolic selectors used for clopen parts, level sets of
distance functions and the plateau bookkeeping of the separator.
"""

from __future__ import annotations

import math
from dataclasses import dataclass
from typing import Iterable

INF = math.inf


@dataclass(frozen=True)
class Interval:
    lo: object
    hi: object
    lo_closed: bool = True
    hi_closed: bool = False

    def is_empty(self) -> bool:
        if self.lo > self.hi:
            return True
        if self.lo == self.hi:
            return not (self.lo_closed and self.hi_closed)
        return False

    def contains(self, c) -> bool:
        if c < self.lo or c > self.hi:
            return False
        if c == self.lo and not self.lo_closed:
            return False
        if c == self.hi and not self.hi_closed:
            return False
        return True

    def germ(self, c) -> bool:
        """True when (c, c+eps) lies inside the interval for small eps."""
        return self.lo <= c < self.hi

    def meets_span(self, a, b) -> bool:
        """Does the closed segment [a, b] meet this interval?"""
        if b < self.lo or (b == self.lo and not self.lo_closed):
            return False
        if a > self.hi or (a == self.hi and not self.hi_closed):
            return False
        return not self.is_empty()

    def intersect(self, other: "Interval") -> "Interval":
        if self.lo > other.lo:
            lo, lc = self.lo, self.lo_closed
        elif self.lo < other.lo:
            lo, lc = other.lo, other.lo_closed
        else:
            lo, lc = self.lo, self.lo_closed and other.lo_closed
        if self.hi < other.hi:
            hi, hc = self.hi, self.hi_closed
        elif self.hi > other.hi:
            hi, hc = other.hi, other.hi_closed
        else:
            hi, hc = self.hi, self.hi_closed and other.hi_closed
        return Interval(lo, hi, lc, hc)

    def closure(self) -> "Interval":
        return Interval(self.lo, self.hi, self.lo != -INF, self.hi != INF)

    def interior(self) -> "Interval":
        return Interval(self.lo, self.hi, False, False)

    def to_json(self) -> dict:
        from .numbers import scalar_to_json

        def enc(v):
            if v == INF:
                return "inf"
            if v == -INF:
                return "-inf"
            return scalar_to_json(v)

        return {"lo": enc(self.lo), "hi": enc(self.hi), "lo_closed": self.lo_closed, "hi_closed": self.hi_closed}

    @classmethod
    def from_json(cls, obj: dict) -> "Interval":
        from .numbers import to_fraction

        def dec(v):
            if v in ("inf", "+inf"):
                return INF
            if v == "-inf":
                return -INF
            return to_fraction(v)

        return cls(dec(obj["lo"]), dec(obj["hi"]), bool(obj.get("lo_closed", True)), bool(obj.get("hi_closed", False)))

    def __repr__(self):
        return f"{'[' if self.lo_closed else '('}{self.lo}, {self.hi}{']' if self.hi_closed else ')'}"


def _touch_or_overlap(a: Interval, b: Interval) -> bool:
    # a starts no later than b
    if b.lo < a.hi:
        return True
    if b.lo == a.hi:
        return a.hi_closed or b.lo_closed
    return False


class Region:
    """Normalized (sorted, merged) union of intervals."""

    __slots__ = ("intervals",)

    def __init__(self, intervals: Iterable[Interval] = ()):
        items = sorted((iv for iv in intervals if not iv.is_empty()), key=lambda iv: (iv.lo, not iv.lo_closed))
        merged: list[Interval] = []
        for iv in items:
            if merged and _touch_or_overlap(merged[-1], iv):
                last = merged[-1]
                if iv.hi > last.hi:
                    hi, hc = iv.hi, iv.hi_closed
                elif iv.hi < last.hi:
                    hi, hc = last.hi, last.hi_closed
                else:
                    hi, hc = last.hi, last.hi_closed or iv.hi_closed
                merged[-1] = Interval(last.lo, hi, last.lo_closed, hc)
            else:
                merged.append(iv)
        self.intervals = tuple(merged)

    @classmethod
    def everything(cls) -> "Region":
        return cls([Interval(-INF, INF, False, False)])

    @classmethod
    def closed(cls, lo, hi) -> "Region":
        return cls([Interval(lo, hi, True, True)])

    @classmethod
    def half_open(cls, lo, hi) -> "Region":
        return cls([Interval(lo, hi, True, False)])

    def is_empty(self) -> bool:
        return not self.intervals

    def contains(self, c) -> bool:
        return any(iv.contains(c) for iv in self.intervals)

    def union(self, other: "Region") -> "Region":
        return Region(self.intervals + other.intervals)

    def intersect(self, other: "Region") -> "Region":
        return Region(a.intersect(b) for a in self.intervals for b in other.intervals)

    def complement(self) -> "Region":
        out = []
        lo, lc = -INF, False
        for iv in self.intervals:
            out.append(Interval(lo, iv.lo, lc, not iv.lo_closed))
            lo, lc = iv.hi, not iv.hi_closed
        out.append(Interval(lo, INF, lc, False))
        return Region(out)

    def minus(self, other: "Region") -> "Region":
        return self.intersect(other.complement())

    def closure(self) -> "Region":
        return Region(iv.closure() for iv in self.intervals)

    def interior(self) -> "Region":
        return Region(iv.interior() for iv in self.intervals)

    def endpoints(self) -> list:
        pts = []
        for iv in self.intervals:
            for v in (iv.lo, iv.hi):
                if v not in (INF, -INF):
                    pts.append(v)
        return pts

    def __eq__(self, other):
        return isinstance(other, Region) and self.intervals == other.intervals

    def __hash__(self):
        return hash(self.intervals)

    def __repr__(self):
        return "Region(" + " ∪ ".join(map(repr, self.intervals)) + ")" if self.intervals else "Region(∅)"

    def to_json(self) -> list:
        return [iv.to_json() for iv in self.intervals]

    @classmethod
    def from_json(cls, obj) -> "Region":
        return cls(Interval.from_json(o) for o in obj)


def radial_preimage(center, distances: Region) -> Region:
    """Coordinates c with |c - center| in ``distances`` (a subset of [0, inf))."""
    out = []
    for iv in distances.intersect(Region([Interval(0, INF, True, False)])).intervals:
        out.append(Interval(center + iv.lo, center + iv.hi, iv.lo_closed, iv.hi_closed))
        out.append(Interval(center - iv.hi, center - iv.lo, iv.hi_closed, iv.lo_closed))
    return Region(out)
