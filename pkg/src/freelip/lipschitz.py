"""Lipschitz functions vanishing at the basepoint of a finite space."""

from __future__ import annotations

from dataclasses import dataclass
from itertools import combinations
from typing import Iterable, Sequence

import numpy as np

from .metric import FiniteSpace, MetricError
from .numbers import parse_scalar, scalar_to_json


@dataclass(frozen=True)
class LipFn:
    space: FiniteSpace
    values: tuple

    def __post_init__(self):
        object.__setattr__(self, "values", tuple(self.values))
        if len(self.values) != self.space.n:
            raise ValueError("one value per point is required")
        if self.values[self.space.base] != 0:
            raise ValueError("a Lip_0 function must vanish at the basepoint")

    def __call__(self, i: int):
        return self.values[i]

    @classmethod
    def zero(cls, space: FiniteSpace) -> "LipFn":
        return cls(space, (0,) * space.n)

    @classmethod
    def distance_to_base(cls, space: FiniteSpace) -> "LipFn":
        return cls(space, tuple(space.dist[space.base][i] for i in range(space.n)))

    def scaled(self, c) -> "LipFn":
        return LipFn(self.space, tuple(c * v for v in self.values))

    def to_json(self) -> list:
        return [scalar_to_json(v) for v in self.values]

    @classmethod
    def from_json(cls, space: FiniteSpace, obj: Sequence, rational: bool = False) -> "LipFn":
        return cls(space, tuple(parse_scalar(v, rational) for v in obj))


def _line_order(space: FiniteSpace):
    return space.line_order


def lip_norm(f: LipFn):
    """Exact max of |f(x) - f(y)| / d(x, y) over all pairs (0 on a single point)."""
    return _max_slope(f, None)


def little_lip_modulus(f: LipFn, scale):
    """Max slope over pairs with 0 < d(x, y) < scale (0 when there are none)."""
    return _max_slope(f, scale)


def _max_slope(f: LipFn, scale):
    space = f.space
    n = space.n
    if n < 2:
        return 0
    vals = f.values
    best = 0
    if space.coords is not None:
        # on the line every slope is an average of adjacent slopes
        cs = space.coords
        order = _line_order(space)
        for a, b in zip(order, order[1:]):
            if vals[a] == vals[b]:
                continue
            d = cs[b] - cs[a]
            if scale is not None and not d < scale:
                continue
            s = abs(vals[a] - vals[b]) / d
            if s > best:
                best = s
        return best
    if not space.exact and n > 40:
        D = np.asarray(space.dist, dtype=float)
        v = np.asarray(vals, dtype=float)
        iu = np.triu_indices(n, 1)
        d = D[iu]
        diff = np.abs(v[:, None] - v[None, :])[iu]
        mask = d < scale if scale is not None else np.ones_like(d, dtype=bool)
        if not mask.any():
            return 0
        return float((diff[mask] / d[mask]).max())
    for i, j in combinations(range(n), 2):
        d = space.dist[i][j]
        if scale is not None and not d < scale:
            continue
        s = abs(vals[i] - vals[j]) / d
        if s > best:
            best = s
    return best


def slope_witness(f: LipFn, scale=None):
    """A pair attaining the (local) Lipschitz constant, or None."""
    space = f.space
    best, arg = 0, None
    pairs = combinations(range(space.n), 2)
    if space.coords is not None:
        order = _line_order(space)
        pairs = zip(order, order[1:])
    for i, j in pairs:
        if f.values[i] == f.values[j]:
            continue
        d = space.dist[i][j]
        if scale is not None and not d < scale:
            continue
        s = abs(f.values[i] - f.values[j]) / d
        if s > best:
            best, arg = s, (i, j)
    return arg


def restrict(f: LipFn, subset: Iterable[int]) -> LipFn:
    """f on the subspace spanned by ``subset`` (which must hold the basepoint)."""
    idx = sorted(set(subset))
    if f.space.base not in idx:
        raise MetricError("restriction set must contain the basepoint")
    sub = f.space.subspace(idx)
    return LipFn(sub, tuple(f.values[i] for i in idx))


def extend_infconv(f: LipFn, target: FiniteSpace) -> LipFn:
    """Inf-convolution extension x -> min_y f(y) + ||f||_L d(x, y).

    ``f`` lives on a subspace of ``target``; points are matched by id.
    """
    src = f.space
    try:
        where = [target.index(p) for p in src.points]
    except KeyError as exc:
        raise MetricError(f"domain of f is not inside the target space: {exc}") from None
    if where[src.base] != target.base:
        raise MetricError("the subspace must contain the basepoint of the target")
    L = lip_norm(f)
    vals = []
    for x in range(target.n):
        vals.append(min(f.values[k] + L * target.dist[x][y] for k, y in enumerate(where)))
    vals[target.base] = vals[target.base] * 0
    return LipFn(target, tuple(vals))
