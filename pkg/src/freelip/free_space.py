"""Finitely supported elements of the free space and linear maps between them."""

from __future__ import annotations

from dataclasses import dataclass
from fractions import Fraction
from itertools import combinations
from typing import Iterable, Mapping

import numpy as np

from .lipschitz import LipFn
from .lp import lip_ball_lp
from .metric import FiniteSpace, MetricError, quotient
from .numbers import parse_scalar, scalar_to_json
from .transport import transport_cost

FLOAT_TOL = 1e-9


class SolverDisagreement(RuntimeError):
    """The transportation and Lipschitz-ball solvers returned different optima."""


@dataclass(frozen=True)
class Molecule:
    """sum_x coeff[x] delta_x; delta of the basepoint is zero and never stored."""

    space: FiniteSpace
    coeff: tuple  # sorted (index, value) pairs, no zeros, no basepoint

    def __init__(self, space: FiniteSpace, coeff: Mapping[int, object] | Iterable = ()):
        items = dict(coeff)
        clean = tuple(sorted((int(i), v) for i, v in items.items() if v != 0 and i != space.base))
        for i, _ in clean:
            if not 0 <= i < space.n:
                raise IndexError(f"point index {i} out of range")
        object.__setattr__(self, "space", space)
        object.__setattr__(self, "coeff", clean)

    @classmethod
    def delta(cls, space: FiniteSpace, i: int, c=1) -> "Molecule":
        return cls(space, {i: c})

    @classmethod
    def pair_molecule(cls, space: FiniteSpace, i: int, j: int) -> "Molecule":
        """(delta_i - delta_j) / d(i, j)."""
        d = space.dist[i][j]
        one = Fraction(1) if space.exact else 1.0
        return cls(space, {i: one / d, j: -one / d})

    def as_dict(self) -> dict:
        return dict(self.coeff)

    def is_zero(self) -> bool:
        return not self.coeff

    def __add__(self, other: "Molecule") -> "Molecule":
        _same(self.space, other.space)
        out = self.as_dict()
        for i, v in other.coeff:
            out[i] = out.get(i, 0) + v
        return Molecule(self.space, out)

    def __neg__(self):
        return Molecule(self.space, {i: -v for i, v in self.coeff})

    def __sub__(self, other):
        return self + (-other)

    def scaled(self, c) -> "Molecule":
        return Molecule(self.space, {i: c * v for i, v in self.coeff})

    def restricted(self, subset: Iterable[int]) -> "Molecule":
        keep = set(subset)
        return Molecule(self.space, {i: v for i, v in self.coeff if i in keep})

    def dense(self) -> list:
        zero = Fraction(0) if self.space.exact else 0.0
        out = [zero] * self.space.n
        for i, v in self.coeff:
            out[i] = v
        return out

    def to_json(self) -> dict:
        return {self.space.points[i]: scalar_to_json(v) for i, v in self.coeff}

    @classmethod
    def from_json(cls, space: FiniteSpace, obj: Mapping, rational: bool = False) -> "Molecule":
        return cls(space, {space.index(p): parse_scalar(v, rational) for p, v in obj.items()})


def _same(a: FiniteSpace, b: FiniteSpace):
    if a is not b and a != b:
        raise MetricError("objects live on different spaces")


def pair(m: Molecule, f: LipFn):
    """Canonical duality sum_x coeff(x) f(x)."""
    _same(m.space, f.space)
    return sum((v * f.values[i] for i, v in m.coeff), 0)


def _check(primal, dual, exact: bool, what: str):
    if exact:
        if primal != dual:
            raise SolverDisagreement(f"{what}: transport {primal} != lipschitz-ball {dual}")
    elif abs(float(primal) - float(dual)) > FLOAT_TOL * max(1.0, abs(float(dual))):
        raise SolverDisagreement(f"{what}: transport {primal} vs lipschitz-ball {dual}")


def _exact(m: Molecule) -> bool:
    return m.space.exact and all(isinstance(v, (int, Fraction)) for _, v in m.coeff)


def on_support(m: Molecule) -> Molecule:
    """The same element written on the subspace supp(m) ∪ {0}.

    Free spaces of subsets sit isometrically inside the big free space (every
    Lipschitz function on a subset extends with the same constant), so norms
    can be computed on the small space.
    """
    idx = sorted({i for i, _ in m.coeff} | {m.space.base})
    if len(idx) == m.space.n:
        return m
    sub = m.space.subspace(idx)
    where = {orig: k for k, orig in enumerate(idx)}
    return Molecule(sub, {where[i]: v for i, v in m.coeff})


def kr_norm(m: Molecule, method: str = "both"):
    """Free-space (Kantorovich-Rubinstein) norm.

    ``method="both"`` solves the transportation problem and the Lipschitz-ball
    program, raises if they disagree, and returns the latter.
    """
    if method not in ("both", "primal", "dual"):
        raise ValueError(f"unknown method {method!r}")
    if m.is_zero() or m.space.n < 2:
        return Fraction(0) if _exact(m) else 0.0
    m = on_support(m)
    if method == "primal":
        return transport_cost(m.space, m.as_dict())[0]
    dual, _ = lip_ball_lp(m.space, m.dense(), exact=_exact(m))
    if method == "dual":
        return dual
    primal = transport_cost(m.space, m.as_dict())[0]
    _check(primal, dual, _exact(m), "kr_norm")
    return dual


def attaining_function(m: Molecule) -> LipFn:
    """A 1-Lipschitz f (a vertex of the ball) with pair(m, f) = kr_norm(m)."""
    if m.is_zero():
        raise ValueError("the zero molecule attains its norm everywhere; no witness is singled out")
    _, f = lip_ball_lp(m.space, m.dense(), exact=_exact(m))
    f[m.space.base] = f[m.space.base] * 0
    return LipFn(m.space, tuple(f))


def quotient_distance(m: Molecule, subset: Iterable[int]):
    """dist(m, F(A)) = sup{<m, f> : ||f||_L <= 1, f = 0 on A}."""
    A = sorted(set(subset))
    if m.space.base not in A:
        raise MetricError("the subset must contain the basepoint")
    if m.is_zero():
        return Fraction(0) if _exact(m) else 0.0
    value, _ = lip_ball_lp(m.space, m.dense(), pinned=A, exact=_exact(m))
    return value


def push_to_quotient(m: Molecule, subset: Iterable[int]) -> Molecule:
    """Image of m in F(K/A): points of A collapse onto the basepoint."""
    q, keep = quotient(m.space, subset)
    where = {orig: k for k, orig in enumerate(keep)}
    return Molecule(q, {where[i]: v for i, v in m.coeff if i in where and where[i] != q.base})


# -- operators -------------------------------------------------------------------

@dataclass(frozen=True)
class FreeOperator:
    """Linear map F(domain) -> F(codomain); column x is the image of delta_x.

    Rows and columns are indexed by full point indices; basepoint rows and
    columns are kept at zero so indices line up with the spaces.
    """

    domain: FiniteSpace
    codomain: FiniteSpace
    matrix: np.ndarray

    def __post_init__(self):
        mat = np.array(self.matrix, dtype=object if _object_matrix(self.matrix) else float)
        if mat.shape != (self.codomain.n, self.domain.n):
            raise ValueError("matrix shape must be (codomain points, domain points)")
        mat[:, self.domain.base] = 0
        mat[self.codomain.base, :] = 0
        object.__setattr__(self, "matrix", mat)

    @classmethod
    def identity(cls, space: FiniteSpace) -> "FreeOperator":
        one = Fraction(1) if space.exact else 1.0
        return cls.diagonal(space, [one] * space.n)

    @classmethod
    def zero(cls, space: FiniteSpace) -> "FreeOperator":
        return cls.diagonal(space, [0] * space.n)

    @classmethod
    def diagonal(cls, space: FiniteSpace, weights) -> "FreeOperator":
        exact = all(isinstance(w, (int, Fraction)) for w in weights)
        mat = np.zeros((space.n, space.n), dtype=object if exact else float)
        if exact:
            mat[:, :] = Fraction(0)
        for i, w in enumerate(weights):
            mat[i, i] = w
        return cls(space, space, mat)

    def column(self, x: int) -> Molecule:
        return Molecule(self.codomain, {u: self.matrix[u, x] for u in range(self.codomain.n)})

    def compose(self, other: "FreeOperator") -> "FreeOperator":
        """self ∘ other."""
        _same(self.domain, other.codomain)
        return FreeOperator(other.domain, self.codomain, self.matrix.dot(other.matrix))

    def rank(self) -> int:
        return int(np.linalg.matrix_rank(self.matrix.astype(float)))

    def to_json(self) -> dict:
        return {
            "domain_points": list(self.domain.points),
            "codomain_points": list(self.codomain.points),
            "matrix": [[scalar_to_json(v) for v in row] for row in self.matrix.tolist()],
        }


def _object_matrix(mat) -> bool:
    arr = np.asarray(mat, dtype=object)
    return arr.size > 0 and all(isinstance(v, (int, Fraction)) for v in arr.flat) and any(
        isinstance(v, Fraction) for v in arr.flat
    )


def apply(T: FreeOperator, m: Molecule) -> Molecule:
    _same(T.domain, m.space)
    out: dict[int, object] = {}
    for x, c in m.coeff:
        col = T.matrix[:, x]
        for u in np.nonzero(col != 0)[0]:
            out[int(u)] = out.get(int(u), 0) + col[u] * c
    return Molecule(T.codomain, out)


def operator_norm(T: FreeOperator, method: str = "primal", return_witness: bool = False):
    """||T|| = max over domain pairs x != y of ||T(delta_x - delta_y)|| / d(x, y).

    The unit ball of F(K) is the closed convex hull of the normalized pair
    molecules, so this finite maximum is exact.  ``method`` picks the solver
    used for each pair norm ("primal", "dual" or "both").
    """
    dom = T.domain
    best, arg = 0, None
    for x, y in combinations(range(dom.n), 2):
        d = dom.dist[x][y]
        img = Molecule(T.codomain, _column_diff(T, x, y))
        if img.is_zero():
            continue
        val = kr_norm(img, method=method) / d
        if val > best:
            best, arg = val, (x, y)
    if return_witness:
        return best, arg
    return best


def _column_diff(T: FreeOperator, x: int, y: int) -> dict:
    diff = T.matrix[:, x] - T.matrix[:, y]
    return {int(u): diff[u] for u in np.nonzero(diff != 0)[0]}
