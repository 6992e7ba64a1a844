"""Finite pointed metric spaces and the quotient metric."""

from __future__ import annotations

import math
from dataclasses import dataclass, field
from functools import cached_property
from fractions import Fraction
from itertools import combinations
from typing import Any, Iterable, Sequence

from .numbers import all_exact, parse_scalar, scalar_to_json

DEFAULT_ATOL = 1e-12


class MetricError(ValueError):
    pass


class _LineRow(Sequence):
    __slots__ = ("_c", "_a")

    def __init__(self, coords, i):
        self._c = coords
        self._a = coords[i]

    def __len__(self):
        return len(self._c)

    def __getitem__(self, j):
        if isinstance(j, slice):
            return tuple(abs(self._a - b) for b in self._c[j])
        return abs(self._a - self._c[j])

    def __iter__(self):
        a = self._a
        return (abs(a - b) for b in self._c)


class LineMetric(Sequence):
    """Distance matrix |c_i - c_j| of points on the real line, computed on demand.

    Deep tower truncations have thousands of points, so the matrix is never
    materialized; indexing and iteration behave like a tuple of rows.
    """

    __slots__ = ("coords",)

    def __init__(self, coords: Sequence):
        self.coords = tuple(coords)

    def __len__(self):
        return len(self.coords)

    def __getitem__(self, i):
        if isinstance(i, slice):
            return tuple(_LineRow(self.coords, k) for k in range(len(self.coords))[i])
        return _LineRow(self.coords, i)

    def __eq__(self, other):
        if isinstance(other, LineMetric):
            return self.coords == other.coords
        if isinstance(other, Sequence):
            return len(other) == len(self) and all(tuple(r) == tuple(o) for r, o in zip(self, other))
        return NotImplemented

    def __hash__(self):
        return hash(self.coords)


@dataclass(frozen=True)
class FiniteSpace:
    """A finite metric space with a distinguished basepoint.

    ``coords`` is set when the space sits isometrically inside the real line
    (tower truncations); several routines use it for O(n log n) shortcuts.
    """

    points: tuple
    dist: tuple
    base: int = 0
    coords: tuple | None = field(default=None, compare=False)

    def __post_init__(self):
        n = len(self.points)
        if n == 0:
            raise MetricError("a pointed space needs at least its basepoint")
        if len(self.dist) != n or (not isinstance(self.dist, LineMetric) and any(len(row) != n for row in self.dist)):
            raise MetricError("distance matrix must be square and match the point list")
        if not 0 <= self.base < n:
            raise MetricError(f"basepoint index {self.base} out of range")
        if len(set(self.points)) != n:
            raise MetricError("point ids must be distinct")

    @classmethod
    def from_matrix(cls, dist: Sequence[Sequence], base: int = 0, points: Sequence | None = None, coords=None):
        n = len(dist)
        pts = tuple(points) if points is not None else tuple(str(i) for i in range(n))
        return cls(pts, tuple(tuple(row) for row in dist), base, None if coords is None else tuple(coords))

    @classmethod
    def from_coordinates(cls, coords: Sequence, base: int = 0, points: Sequence | None = None):
        """Subspace of the real line."""
        coords = tuple(coords)
        pts = tuple(points) if points is not None else tuple(str(i) for i in range(len(coords)))
        return cls(pts, LineMetric(coords), base, coords)

    def __len__(self):
        return len(self.points)

    @cached_property
    def line_order(self) -> tuple:
        """Indices sorted by coordinate (line spaces only)."""
        if self.coords is None:
            raise MetricError("not a subspace of the line")
        return tuple(sorted(range(self.n), key=self.coords.__getitem__))

    @property
    def n(self) -> int:
        return len(self.points)

    @property
    def exact(self) -> bool:
        if isinstance(self.dist, LineMetric):
            return all_exact(self.dist.coords)
        return all(all_exact(row) for row in self.dist)

    def d(self, i: int, j: int):
        return self.dist[i][j]

    def index(self, point) -> int:
        try:
            return self.points.index(point)
        except ValueError:
            raise KeyError(f"unknown point {point!r}") from None

    def others(self) -> list[int]:
        """Indices of the non-basepoint points, in order."""
        return [i for i in range(self.n) if i != self.base]

    def diameter(self):
        if self.n < 2:
            return 0
        if self.coords is not None:
            return max(self.coords) - min(self.coords)
        return max(self.dist[i][j] for i, j in combinations(range(self.n), 2))

    def min_distance(self):
        if self.n < 2:
            return math.inf
        if self.coords is not None:
            cs = sorted(self.coords)
            return min(b - a for a, b in zip(cs, cs[1:]))
        return min(self.dist[i][j] for i, j in combinations(range(self.n), 2))

    def dist_to_set(self, i: int, subset: Iterable[int]):
        return min(self.dist[i][a] for a in subset)

    def subspace(self, indices: Iterable[int]) -> "FiniteSpace":
        """Restriction to ``indices``; the basepoint must be among them."""
        idx = sorted(set(indices))
        if self.base not in idx:
            raise MetricError("subspace must contain the basepoint")
        coords = None if self.coords is None else tuple(self.coords[i] for i in idx)
        if isinstance(self.dist, LineMetric):
            return FiniteSpace.from_coordinates(coords, idx.index(self.base), [self.points[i] for i in idx])
        return FiniteSpace(
            tuple(self.points[i] for i in idx),
            tuple(tuple(self.dist[i][j] for j in idx) for i in idx),
            idx.index(self.base),
            coords,
        )

    def to_rational(self) -> "FiniteSpace":
        from .numbers import to_fraction

        coords = None if self.coords is None else tuple(to_fraction(c) for c in self.coords)
        if isinstance(self.dist, LineMetric):
            return FiniteSpace.from_coordinates(coords, self.base, self.points)
        return FiniteSpace(
            self.points,
            tuple(tuple(to_fraction(v) for v in row) for row in self.dist),
            self.base,
            coords,
        )

    def to_float(self) -> "FiniteSpace":
        coords = None if self.coords is None else tuple(float(c) for c in self.coords)
        if isinstance(self.dist, LineMetric):
            return FiniteSpace.from_coordinates(coords, self.base, self.points)
        return FiniteSpace(
            self.points, tuple(tuple(float(v) for v in row) for row in self.dist), self.base, coords
        )

    # JSON ----------------------------------------------------------------
    def to_json(self) -> dict:
        body: dict[str, Any] = {
            "points": list(self.points),
            "dist": [[scalar_to_json(v) for v in row] for row in self.dist],
            "base": self.base,
        }
        if self.coords is not None:
            body["coords"] = [scalar_to_json(c) for c in self.coords]
        return {"finite": body}

    @classmethod
    def from_json(cls, obj: dict, rational: bool = False) -> "FiniteSpace":
        body = obj["finite"] if "finite" in obj else obj
        dist = [[parse_scalar(v, rational) for v in row] for row in body["dist"]]
        points = body.get("points")
        coords = body.get("coords")
        if coords is not None:
            coords = [parse_scalar(c, rational) for c in coords]
        return cls.from_matrix(dist, int(body.get("base", 0)), points, coords)


@dataclass
class MetricReport:
    valid: bool
    violations: list = field(default_factory=list)

    def to_json(self) -> dict:
        return {"valid": self.valid, "violations": self.violations}


def validate_metric(space: FiniteSpace, atol: float = DEFAULT_ATOL) -> MetricReport:
    """Check every metric axiom; exact spaces are checked with zero tolerance."""
    tol = 0 if space.exact else atol
    n = space.n
    d = space.dist
    bad: list[dict] = []
    for i in range(n):
        if d[i][i] != 0:
            bad.append({"axiom": "diagonal", "witness": [space.points[i]], "value": scalar_to_json(d[i][i])})
    for i, j in combinations(range(n), 2):
        if d[i][j] != d[j][i]:
            bad.append({"axiom": "symmetry", "witness": [space.points[i], space.points[j]]})
        if not d[i][j] > 0:
            bad.append({"axiom": "positivity", "witness": [space.points[i], space.points[j]]})
    for i in range(n):
        for k in range(n):
            if k == i:
                continue
            for j in range(n):
                if j == i or j == k:
                    continue
                if d[i][k] > d[i][j] + d[j][k] + tol:
                    bad.append({"axiom": "triangle", "witness": [space.points[i], space.points[j], space.points[k]]})
    return MetricReport(not bad, bad)


def quotient(space: FiniteSpace, subset: Iterable[int]) -> tuple[FiniteSpace, list[int]]:
    """Collapse ``subset`` onto the basepoint.

    Returns the quotient space on ``(K \\ A) ∪ {0}`` together with the list
    mapping each quotient index to the original index.
    """
    A = set(subset)
    if space.base not in A:
        raise MetricError("the collapsed set must contain the basepoint")
    keep = [space.base] + [i for i in range(space.n) if i not in A]
    dA = {i: space.dist_to_set(i, A) for i in keep}
    rows = []
    for i in keep:
        row = []
        for j in keep:
            if i == j:
                row.append(space.dist[i][i] * 0)
            elif i == space.base:
                row.append(dA[j])
            elif j == space.base:
                row.append(dA[i])
            else:
                row.append(min(space.dist[i][j], dA[i] + dA[j]))
        rows.append(row)
    q = FiniteSpace.from_matrix(rows, 0, [space.points[i] for i in keep])
    return q, keep


def line_space(coords: Sequence, base: int = 0) -> FiniteSpace:
    """Convenience: a finite subset of the real line with exact coordinates."""
    cs = [Fraction(c) if isinstance(c, int) else c for c in coords]
    return FiniteSpace.from_coordinates(cs, base, points=[str(c) for c in coords])
