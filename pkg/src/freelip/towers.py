"""Countable compacta of finite Cantor-Bendixson rank, realized as towers on the line.

A rank-k tower anchored at ``t`` with scale ``r`` is ``{t}`` together with the
rank-(k-1) towers anchored at ``t + r q**i`` with scale ``r q**(i+1)``,
``i = 1, 2, ...``.  Every point is a finite index path and every accumulation
happens from the right, so each point has an empty left neighbourhood.  All
queries below walk the tree symbolically and never depend on a truncation.
"""

from __future__ import annotations

from dataclasses import dataclass, replace
from functools import lru_cache
from fractions import Fraction
from typing import Iterator, NamedTuple, Sequence

from .metric import FiniteSpace, MetricError
from .numbers import scalar_to_json, to_fraction
from .regions import INF, Interval, Region


class InfiniteSetError(ValueError):
    """Raised when a finite enumeration is requested for an infinite set."""


@dataclass(frozen=True)
class Tower:
    rank: int
    ratio: Fraction
    anchor: Fraction
    scale: Fraction

    def __post_init__(self):
        object.__setattr__(self, "ratio", to_fraction(self.ratio))
        object.__setattr__(self, "anchor", to_fraction(self.anchor))
        object.__setattr__(self, "scale", to_fraction(self.scale))
        if self.rank < 0:
            raise MetricError("tower rank must be a natural number")
        if not 0 < self.ratio < 1:
            raise MetricError("tower ratio must lie in (0, 1)")
        if self.rank >= 2 and self.ratio > Fraction(1, 4):
            raise MetricError("towers of rank >= 2 need ratio <= 1/4 for disjoint sub-tower spans")
        if self.scale <= 0:
            raise MetricError("tower scale must be positive")
        if self.anchor < 0:
            raise MetricError("tower anchors must be >= 0 (the basepoint sits at 0)")

    def span(self) -> tuple[Fraction, Fraction]:
        return self.anchor, self.anchor + extent(self.rank, self.scale, self.ratio)

    def to_json(self) -> dict:
        return {
            "rank": self.rank,
            "ratio": scalar_to_json(self.ratio),
            "anchor": scalar_to_json(self.anchor),
            "scale": scalar_to_json(self.scale),
        }


def extent(rank: int, scale, ratio):
    """Offset of the rightmost point of a tower from its anchor."""
    total = Fraction(0)
    rho = scale
    for _ in range(rank):
        total += rho * ratio
        rho = rho * ratio * ratio
    return total


class Node(NamedTuple):
    comp: int
    path: tuple
    anchor: Fraction
    scale: Fraction
    rank: int  # Cantor-Bendixson rank of the anchor inside the current space
    ratio: Fraction

    @property
    def key(self) -> tuple:
        return (self.comp,) + self.path

    def span_hi(self):
        return self.anchor + extent(self.rank, self.scale, self.ratio)

    def child(self, i: int) -> "Node":
        q = self.ratio
        return Node(self.comp, self.path + (i,), self.anchor + self.scale * q**i, self.scale * q ** (i + 1), self.rank - 1, q)


@dataclass(frozen=True)
class TowerSpace:
    """Union of disjoint towers plus the basepoint at coordinate 0.

    ``level`` records how many Cantor-Bendixson derivatives were taken: the
    points are those of the level-0 space whose rank is at least ``level``.
    The basepoint is adjoined at level 0 when no component is anchored at 0.
    """

    components: tuple
    depth: int = 6
    level: int = 0

    def __post_init__(self):
        comps = tuple(self.components)
        object.__setattr__(self, "components", comps)
        spans = sorted(c.span() for c in comps)
        for (a0, b0), (a1, b1) in zip(spans, spans[1:]):
            if a1 <= b0:
                raise MetricError("tower components must have disjoint spans")
        if self.depth < 1:
            raise MetricError("truncation depth must be >= 1")

    @classmethod
    def single(cls, rank: int, ratio="1/4", anchor=0, scale=1, depth: int = 6) -> "TowerSpace":
        return cls((Tower(rank, ratio, anchor, scale),), depth)

    # structure --------------------------------------------------------------
    @property
    def rank(self) -> int:
        ranks = [c.rank - self.level for c in self.components if c.rank >= self.level]
        if not ranks:
            return -1 if self.is_empty() else 0
        return max(ranks)

    @property
    def base_key(self) -> tuple:
        for ci, c in enumerate(self.components):
            if c.anchor == 0:
                return (ci,)
        return (len(self.components),)

    @property
    def base_adjoined(self) -> bool:
        return all(c.anchor != 0 for c in self.components)

    def is_empty(self) -> bool:
        return not self.roots()

    def roots(self) -> list[Node]:
        out = []
        for ci, c in enumerate(self.components):
            if c.rank >= self.level:
                out.append(Node(ci, (), c.anchor, c.scale, c.rank - self.level, c.ratio))
        if self.level == 0 and self.base_adjoined:
            out.append(Node(len(self.components), (), Fraction(0), Fraction(1), 0, Fraction(1, 2)))
        return sorted(out, key=lambda nd: nd.anchor)

    def node(self, key: Sequence[int]) -> Node:
        key = tuple(key)
        if key == self.base_key and self.base_adjoined:
            if self.level > 0:
                raise KeyError(f"{key} is not a point of this derived space")
            return Node(len(self.components), (), Fraction(0), Fraction(1), 0, Fraction(1, 2))
        ci = key[0]
        if not 0 <= ci < len(self.components):
            raise KeyError(f"no component {ci}")
        c = self.components[ci]
        nd = Node(ci, (), c.anchor, c.scale, c.rank - self.level, c.ratio)
        for i in key[1:]:
            if nd.rank < 1 or i < 1:
                raise KeyError(f"{key} is not a point of this space")
            nd = nd.child(i)
        if nd.rank < 0:
            raise KeyError(f"{key} is not a point of this space")
        return nd

    def coordinate(self, key: Sequence[int]) -> Fraction:
        return self.node(key).anchor

    def point_rank(self, key: Sequence[int]) -> int:
        return self.node(key).rank

    def contains_key(self, key) -> bool:
        try:
            self.node(key)
            return True
        except KeyError:
            return False

    # enumeration --------------------------------------------------------------
    def keys(self, depth: int | None = None) -> list[tuple]:
        """Points of the space whose path indices are all <= depth."""
        depth = self.depth if depth is None else depth
        out: list[tuple] = []

        def walk(nd: Node):
            out.append(nd.key)
            if nd.rank >= 1:
                for i in range(1, depth + 1):
                    walk(nd.child(i))

        for r in self.roots():
            walk(r)
        return out

    def nodes(self, depth: int | None = None) -> list[Node]:
        depth = self.depth if depth is None else depth
        out: list[Node] = []

        def walk(nd: Node):
            out.append(nd)
            if nd.rank >= 1:
                for i in range(1, depth + 1):
                    walk(nd.child(i))

        for r in self.roots():
            walk(r)
        return out

    def to_json(self) -> dict:
        if len(self.components) == 1:
            body = self.components[0].to_json()
            body["depth"] = self.depth
            out = {"tower": body}
        else:
            out = {"towers": [c.to_json() for c in self.components], "depth": self.depth}
        if self.level:
            out["level"] = self.level
        return out

    @classmethod
    def from_json(cls, obj: dict) -> "TowerSpace":
        level = int(obj.get("level", 0))
        if "tower" in obj:
            body = obj["tower"]
            comps = (_tower_from_json(body),)
            depth = int(body.get("depth", obj.get("depth", 6)))
        elif "towers" in obj:
            comps = tuple(_tower_from_json(b) for b in obj["towers"])
            depth = int(obj.get("depth", 6))
        else:
            raise MetricError("tower description needs a 'tower' or 'towers' key")
        return cls(comps, depth, level)

    # symbolic queries -----------------------------------------------------------
    def max_rank(self, region: Region) -> int:
        """Largest Cantor-Bendixson rank of a point of K ∩ region (-1 if empty)."""
        best = -1
        for iv in region.intervals:
            for r in self.roots():
                best = max(best, _max_rank(r, iv))
        return best

    def is_finite(self, region: Region) -> bool:
        for iv in region.intervals:
            for r in self.roots():
                if _has_accumulation(r, iv):
                    return False
        return True

    def points_in(self, region: Region) -> list[Node]:
        """All points of K ∩ region, sorted by coordinate; raises when infinite."""
        out: list[Node] = []
        for iv in region.intervals:
            for r in self.roots():
                out.extend(_points_in(r, iv))
        return sorted(out, key=lambda nd: nd.anchor)

    def top_points(self, region: Region) -> tuple[int, list[Node]]:
        """(beta, S^(beta)) for S = K ∩ region, beta the largest rank present.

        S^(beta) is finite and non-empty whenever S is non-empty and closed.
        """
        beta = self.max_rank(region)
        if beta < 0:
            return beta, []
        if beta == 0:
            return 0, self.points_in(region)
        out: list[Node] = []
        for iv in region.intervals:
            for r in self.roots():
                out.extend(_rank_points(r, iv, beta))
        return beta, sorted(out, key=lambda nd: nd.anchor)

    def inf_in(self, region: Region):
        """(value, attained) for inf(K ∩ region), or None when empty."""
        best = None
        for iv in region.intervals:
            for r in self.roots():
                got = _inf(r, iv)
                if got is not None and (best is None or got[0] < best[0] or (got[0] == best[0] and got[1])):
                    best = got
        return best

    def sup_in(self, region: Region):
        best = None
        for iv in region.intervals:
            for r in self.roots():
                got = _sup(r, iv)
                if got is not None and (best is None or got[0] > best[0] or (got[0] == best[0] and got[1])):
                    best = got
        return best

    def dist_to(self, c, region: Region):
        """inf{|p - c| : p in K ∩ region}; ``inf`` when the set is empty."""
        best = INF
        right = region.intersect(Region([Interval(c, INF, True, False)]))
        left = region.intersect(Region([Interval(-INF, c, False, True)]))
        got = self.inf_in(right)
        if got is not None:
            best = min(best, got[0] - c)
        got = self.sup_in(left)
        if got is not None:
            best = min(best, c - got[0])
        return best

    def locate(self, c) -> Node | None:
        pts = self.points_in(Region.closed(c, c))
        return pts[0] if pts else None

    def left_gap(self, c):
        """sup of the points strictly left of ``c`` (-inf when none)."""
        got = self.sup_in(Region([Interval(-INF, c, False, False)]))
        return -INF if got is None else got[0]


def _tower_from_json(body: dict) -> Tower:
    return Tower(int(body["rank"]), to_fraction(body.get("ratio", "1/4")), to_fraction(body.get("anchor", 0)), to_fraction(body.get("scale", 1)))


# -- recursive walkers ------------------------------------------------------------

def _children_meeting(nd: Node, iv: Interval) -> Iterator[Node]:
    """Children whose span meets ``iv``; only finite when the anchor lies left of iv."""
    i = 1
    while True:
        ch = nd.child(i)
        hi = ch.span_hi()
        if hi < iv.lo or (hi == iv.lo and not iv.lo_closed):
            return
        if iv.meets_span(ch.anchor, hi):
            yield ch
        i += 1


def _left_of(a, iv: Interval) -> bool:
    return a < iv.lo


def _max_rank(nd: Node, iv: Interval) -> int:
    a = nd.anchor
    if not iv.meets_span(a, nd.span_hi()):
        return -1
    if iv.contains(a):
        return nd.rank if iv.germ(a) else 0
    if nd.rank == 0:
        return -1
    if a == iv.lo:  # open left end at an accumulation point
        return nd.rank - 1 if iv.hi > a else -1
    if a >= iv.hi:
        return -1
    best = -1
    for ch in _children_meeting(nd, iv):
        best = max(best, _max_rank(ch, iv))
    return best


def _has_accumulation(nd: Node, iv: Interval) -> bool:
    a = nd.anchor
    if not iv.meets_span(a, nd.span_hi()):
        return False
    if nd.rank == 0:
        return False
    if iv.germ(a):
        return True
    if a >= iv.hi or a >= iv.lo:
        return False
    return any(_has_accumulation(ch, iv) for ch in _children_meeting(nd, iv))


def _points_in(nd: Node, iv: Interval) -> Iterator[Node]:
    a = nd.anchor
    if not iv.meets_span(a, nd.span_hi()):
        return
    if nd.rank >= 1 and iv.germ(a):
        raise InfiniteSetError(f"infinitely many points accumulate at {a}")
    if iv.contains(a):
        yield nd
    if nd.rank == 0 or not a < iv.lo:
        return
    for ch in _children_meeting(nd, iv):
        yield from _points_in(ch, iv)


def _rank_points(nd: Node, iv: Interval, beta: int) -> Iterator[Node]:
    a = nd.anchor
    if not iv.meets_span(a, nd.span_hi()) or nd.rank < beta:
        return
    if iv.germ(a):
        if nd.rank > beta:
            raise InfiniteSetError(f"infinitely many rank-{beta} points accumulate at {a}")
        if iv.contains(a):
            yield nd
        elif nd.rank - 1 >= beta:
            raise InfiniteSetError(f"infinitely many rank-{beta} points accumulate at {a}")
        return
    if not a < iv.lo:
        return
    for ch in _children_meeting(nd, iv):
        yield from _rank_points(ch, iv, beta)


def _inf(nd: Node, iv: Interval):
    a = nd.anchor
    if not iv.meets_span(a, nd.span_hi()):
        return None
    if iv.contains(a):
        return a, True
    if nd.rank == 0 or a >= iv.hi:
        return None
    if a == iv.lo:
        return a, False
    kids = list(_children_meeting(nd, iv))
    for ch in reversed(kids):
        got = _inf(ch, iv)
        if got is not None:
            return got
    return None


def _sup(nd: Node, iv: Interval):
    a = nd.anchor
    if not iv.meets_span(a, nd.span_hi()):
        return None
    if a >= iv.hi:
        return (a, True) if iv.contains(a) else None
    if nd.rank >= 1:
        i = 1
        while True:
            ch = nd.child(i)
            hi = ch.span_hi()
            if hi < iv.lo or (hi == iv.lo and not iv.lo_closed):
                break
            if iv.meets_span(ch.anchor, hi):
                got = _sup(ch, iv)
                if got is not None:
                    return got
            i += 1
    return (a, True) if iv.contains(a) else None


# -- Cantor-Bendixson calculus ------------------------------------------------------

def cb_derivative(space, steps: int):
    """The ``steps``-th derived space.

    Towers lose ``steps`` levels of rank; finite spaces have no accumulation
    points, so any positive number of steps gives the empty space.
    """
    if steps < 0:
        raise ValueError("steps must be a natural number")
    if isinstance(space, FiniteSpace):
        return space if steps == 0 else EMPTY
    if isinstance(space, TowerSpace):
        return replace(space, level=space.level + steps)
    raise TypeError(f"unsupported space {type(space).__name__}")


EMPTY = TowerSpace((), 1, 1)


def cb_rank(space) -> int:
    """Least alpha with the alpha-th derivative finite."""
    if isinstance(space, FiniteSpace):
        return 0
    if space.is_empty():
        return 0
    return space.rank


def point_id(space: TowerSpace, key: Sequence[int]) -> str:
    key = tuple(key)
    if space.base_adjoined and key == space.base_key:
        return "base"
    return f"{key[0]}:" + ".".join(str(i) for i in key[1:])


def parse_point(space: TowerSpace, text) -> tuple:
    """Accepts ``"base"``, ``"c:i.j"``, or a JSON list path.

    For single-tower spaces a list path omits the component index.
    """
    if isinstance(text, str):
        if text == "base":
            return space.base_key
        comp, _, rest = text.partition(":")
        key = (int(comp),) + tuple(int(s) for s in rest.split(".") if s)
    else:
        path = tuple(int(i) for i in text)
        key = (0,) + path if len(space.components) == 1 else path
    if not space.contains_key(key):
        raise KeyError(f"{text!r} is not a point of the space")
    return key


def truncate(space: TowerSpace, depth: int | None = None) -> FiniteSpace:
    """Finite subspace of paths with indices <= depth, plus the basepoint."""
    depth = space.depth if depth is None else depth
    if depth < 1:
        raise ValueError("depth must be >= 1")
    return _truncation(replace(space, depth=depth), depth)[0]


@lru_cache(maxsize=32)
def _truncation(space: TowerSpace, depth: int):
    nodes = space.nodes(depth)
    keys = [nd.key for nd in nodes]
    coords = [nd.anchor for nd in nodes]
    if space.base_key not in keys:
        keys.append(space.base_key)
        coords.append(Fraction(0))
    order = sorted(range(len(keys)), key=lambda i: (coords[i], keys[i]))
    keys = tuple(keys[i] for i in order)
    coords = [coords[i] for i in order]
    ids = [point_id(space, k) for k in keys]
    base = keys.index(space.base_key)
    return FiniteSpace.from_coordinates(coords, base, ids), keys


def truncate_with_keys(space: TowerSpace, depth: int | None = None) -> tuple[FiniteSpace, tuple]:
    """The truncation together with the tower key of each of its points."""
    depth = space.depth if depth is None else depth
    if depth < 1:
        raise ValueError("depth must be >= 1")
    return _truncation(replace(space, depth=depth), depth)


def truncation_keys(space: TowerSpace, fs: FiniteSpace) -> list[tuple]:
    """Map point ids of a truncation back to tower keys."""
    full = replace(space, level=0)
    return [space.base_key if pid == "base" else parse_point(full, pid) for pid in fs.points]


def shallowest(space: TowerSpace, count: int) -> list[tuple]:
    """The ``count`` points with the smallest maximal path index (ties: shorter, then lexicographic)."""
    keys = space.keys(count)
    keys.sort(key=lambda k: (max(k[1:], default=0), len(k), k))
    return keys[:count]
