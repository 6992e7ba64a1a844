"""Seeded random spaces, molecules and Lipschitz functions for property checks."""

from __future__ import annotations

import random
from fractions import Fraction
from typing import Sequence

from .free_space import Molecule
from .lipschitz import LipFn
from .metric import FiniteSpace


def random_space(rng: random.Random, n: int, kind: str | None = None) -> FiniteSpace:
    """An exact rational metric on n points.

    ``plane`` takes l1 distances between random lattice points (scaled by 1/8),
    ``graph`` takes shortest paths in a random weighted complete graph; both
    are metrics by construction.
    """
    kind = kind or rng.choice(["plane", "graph"])
    if kind == "plane":
        pts = set()
        while len(pts) < n:
            pts.add((rng.randint(-20, 20), rng.randint(-20, 20)))
        pts = sorted(pts)
        rng.shuffle(pts)
        dist = [[Fraction(abs(a[0] - b[0]) + abs(a[1] - b[1]), 8) for b in pts] for a in pts]
    elif kind == "graph":
        w = [[Fraction(0)] * n for _ in range(n)]
        for i in range(n):
            for j in range(i + 1, n):
                w[i][j] = w[j][i] = Fraction(rng.randint(1, 40), rng.choice([1, 2, 3, 4]))
        for k in range(n):
            for i in range(n):
                for j in range(n):
                    if w[i][k] + w[k][j] < w[i][j]:
                        w[i][j] = w[i][k] + w[k][j]
        dist = w
    else:
        raise ValueError(f"unknown space kind {kind!r}")
    return FiniteSpace.from_matrix(dist, 0, [f"p{i}" for i in range(n)])


def random_molecule(rng: random.Random, space: FiniteSpace, support: Sequence[int] | None = None,
                    size: int | None = None) -> Molecule:
    """Small integer (exact) or uniform (float) coefficients on a random support."""
    pool = [i for i in (support if support is not None else range(space.n)) if i != space.base]
    if not pool:
        return Molecule(space, {})
    k = size if size is not None else rng.randint(1, len(pool))
    k = max(1, min(k, len(pool)))
    chosen = rng.sample(pool, k)
    if space.exact:
        coeff = {i: Fraction(rng.choice([-1, 1]) * rng.randint(1, 9), rng.randint(1, 4)) for i in chosen}
    else:
        coeff = {i: rng.uniform(-3.0, 3.0) for i in chosen}
    return Molecule(space, coeff)


def random_lipfn(rng: random.Random, space: FiniteSpace) -> LipFn:
    """Values drawn in [-diam, diam]; every function on a finite space is Lipschitz."""
    diam = space.diameter()
    vals = []
    for i in range(space.n):
        if i == space.base:
            vals.append(diam * 0)
        elif space.exact:
            vals.append(Fraction(rng.randint(-1000, 1000), 1000) * diam)
        else:
            vals.append(rng.uniform(-1.0, 1.0) * float(diam))
    return LipFn(space, tuple(vals))
