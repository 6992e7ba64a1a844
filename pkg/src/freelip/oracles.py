"""Slow reference computations that share no code with the solvers they check."""

from __future__ import annotations

import bisect
from fractions import Fraction
from functools import lru_cache
from itertools import combinations
from typing import Callable, Iterable, Sequence

from .metric import FiniteSpace
from .towers import TowerSpace, truncate_with_keys


# -- vertices of the Lipschitz unit ball ----------------------------------------

def _solve(rows: list[list[Fraction]], rhs: list[Fraction]):
    """Gauss-Jordan over the rationals; None when singular."""
    n = len(rows)
    a = [list(r) + [b] for r, b in zip(rows, rhs)]
    for c in range(n):
        p = next((r for r in range(c, n) if a[r][c] != 0), None)
        if p is None:
            return None
        a[c], a[p] = a[p], a[c]
        piv = a[c][c]
        a[c] = [v / piv for v in a[c]]
        for r in range(n):
            if r != c and a[r][c] != 0:
                k = a[r][c]
                a[r] = [u - k * v for u, v in zip(a[r], a[c])]
    return [a[r][n] for r in range(n)]


def lip_ball_vertices(space: FiniteSpace) -> list[tuple]:
    """All vertices of {f : f(0) = 0, f(x) - f(y) <= d(x, y)} by brute force.

    Every choice of n-1 constraints is made tight and the resulting system is
    solved exactly; feasible solutions are the vertices.  Meant for n <= 5.
    """
    free = space.others()
    k = len(free)
    if k == 0:
        return [tuple([Fraction(0)] * space.n)]
    col = {x: i for i, x in enumerate(free)}
    d = [[Fraction(v) for v in row] for row in space.dist]
    cons = []  # (coefficient row over free coordinates, rhs)
    for x in range(space.n):
        for y in range(space.n):
            if x == y:
                continue
            row = [Fraction(0)] * k
            if x in col:
                row[col[x]] += 1
            if y in col:
                row[col[y]] -= 1
            cons.append((row, d[x][y]))
    found = set()
    for pick in combinations(range(len(cons)), k):
        sol = _solve([cons[i][0] for i in pick], [cons[i][1] for i in pick])
        if sol is None:
            continue
        if all(sum(r * v for r, v in zip(row, sol)) <= b for row, b in cons):
            f = [Fraction(0)] * space.n
            for x, v in zip(free, sol):
                f[x] = v
            found.add(tuple(f))
    return sorted(found)


def vertex_norm(space: FiniteSpace, coeff: dict, vertices: Sequence[tuple] | None = None) -> Fraction:
    """max over ball vertices of sum_x coeff[x] f(x)."""
    verts = lip_ball_vertices(space) if vertices is None else vertices
    return max(sum((Fraction(c) * f[i] for i, c in coeff.items()), Fraction(0)) for f in verts)


# -- Lipschitz constants ------------------------------------------------------

def brute_lip_norm(space: FiniteSpace, values: Sequence):
    best = 0
    for i, j in combinations(range(space.n), 2):
        s = abs(values[i] - values[j]) / space.dist[i][j]
        if s > best:
            best = s
    return best


# -- derived sets -------------------------------------------------------------

def _nearest(sorted_coords: list, c):
    """Distance from c to the closest other member of a sorted coordinate list."""
    k = bisect.bisect_left(sorted_coords, c)
    best = None
    for j in (k - 1, k + 1) if k < len(sorted_coords) and sorted_coords[k] == c else (k - 1, k):
        if 0 <= j < len(sorted_coords) and sorted_coords[j] != c:
            gap = abs(sorted_coords[j] - c)
            best = gap if best is None or gap < best else best
    return best


def ladder_derived(coords_by_depth: Callable[[int], Sequence], depth: int, alpha: int,
                   member=None) -> frozenset:
    """Coordinates of the depth-``depth`` truncation lying in the alpha-th derived set.

    A point counts as an accumulation point when the distance to its nearest
    neighbour strictly shrinks twice as the truncation deepens by one and then
    two levels; isolated points have stopped gaining neighbours by then.
    ``coords_by_depth(d)`` returns the coordinates of the depth-d truncation;
    ``member`` optionally restricts to a subset (given as a predicate on
    coordinates) whose derived set is wanted.
    """

    @lru_cache(maxsize=None)
    def level(d: int, a: int) -> tuple:
        if a == 0:
            pts = coords_by_depth(d)
            return tuple(sorted(c for c in pts if member is None or member(c)))
        return tuple(accumulation_points_of(level(d, a - 1), level(d + 1, a - 1), level(d + 2, a - 1)))

    return frozenset(level(depth, alpha))


def tower_coords(space: TowerSpace):
    """coords_by_depth for a tower (basepoint included)."""

    @lru_cache(maxsize=None)
    def at(d: int) -> tuple:
        fs, _ = truncate_with_keys(space, d)
        return tuple(fs.coords)

    return at


def brute_derived(space: TowerSpace, depth: int, alpha: int, member=None) -> frozenset:
    return ladder_derived(tower_coords(space), depth, alpha, member)


def accumulation_points_of(coords: Iterable, finer: Iterable, finest: Iterable) -> list:
    """One ladder step: members of ``coords`` whose nearest-neighbour distance
    shrinks strictly from ``coords`` to ``finer`` to ``finest``."""
    here, one, two = sorted(coords), sorted(finer), sorted(finest)
    out = []
    for c in here:
        r = (_nearest(here, c), _nearest(one, c), _nearest(two, c))
        if None not in r and r[0] > r[1] > r[2]:
            out.append(c)
    return out
