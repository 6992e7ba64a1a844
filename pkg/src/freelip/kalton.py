"""Dyadic shell operators around the basepoint and the bounded approximation scheme."""

from __future__ import annotations

import math
import random
from dataclasses import dataclass
from fractions import Fraction
from typing import Iterable, Sequence

import numpy as np

from .free_space import FreeOperator, Molecule, apply, kr_norm, operator_norm
from .metric import FiniteSpace
from .numbers import dyadic_band, log2_exact
from .parallel import parallel_map

KALTON_BOUND = 72


@dataclass(frozen=True)
class ShellSystem:
    """Shells K_n = {d(0,x) <= 2^n}, O_n = {d(0,x) < 2^n} and bands F_N of a finite space."""

    space: FiniteSpace

    def radius(self, i: int):
        return self.space.dist[self.space.base][i]

    def band(self, i: int) -> int:
        """m with 2^(m-1) < d(0, x) <= 2^m."""
        return dyadic_band(self.radius(i))

    def ramp(self, i: int):
        """t = log2 d(0,x) - (m-1), in (0, 1]; an exact 1 at powers of two."""
        m = self.band(i)
        lg = log2_exact(self.radius(i))
        if isinstance(lg, int):
            return 1
        return min(1.0, max(0.0, lg - (m - 1)))

    def K(self, n: int) -> list[int]:
        return [i for i in range(self.space.n) if _le_pow2(self.radius(i), n)]

    def O(self, n: int) -> list[int]:
        return [i for i in range(self.space.n) if _lt_pow2(self.radius(i), n)]

    def F(self, N: int) -> list[int]:
        """F_N = K_{N+1} minus O_{-N-1}: points with 2^(-N-1) <= d(0,x) <= 2^(N+1)."""
        if N < 0:
            raise ValueError("N must be a natural number")
        return [i for i in range(self.space.n)
                if _le_pow2(self.radius(i), N + 1) and not _lt_pow2(self.radius(i), -N - 1)]

    def weight(self, n: int, i: int):
        """Coefficient of delta_x in T_n delta_x."""
        if i == self.space.base:
            return 0
        m = self.band(i)
        if n == m:
            return self.ramp(i)
        if n == m - 1:
            t = self.ramp(i)
            return 0 if t == 1 else 1 - t
        return 0

    def S_weight(self, N: int, i: int):
        """sum_{n=-N}^{N} weight_n(x), added term by term."""
        total = 0
        for n in _live_bands(self, i):
            if -N <= n <= N:
                total = total + self.weight(n, i)
        return total


def _pow2(n: int, like):
    if isinstance(like, (int, Fraction)):
        return Fraction(2) ** n
    return math.ldexp(1.0, n)


def _le_pow2(r, n: int) -> bool:
    return r <= _pow2(n, r)


def _lt_pow2(r, n: int) -> bool:
    return r < _pow2(n, r)


def _live_bands(sys: ShellSystem, i: int):
    if i == sys.space.base:
        return ()
    m = sys.band(i)
    return (m - 1, m)


def _diagonal(space: FiniteSpace, weights: Sequence) -> FreeOperator:
    exact = all(isinstance(w, (int, Fraction)) for w in weights)
    if exact and any(isinstance(w, Fraction) for w in weights):
        mat = np.empty((space.n, space.n), dtype=object)
        mat[:, :] = Fraction(0)
    else:
        mat = np.zeros((space.n, space.n))
    for i, w in enumerate(weights):
        mat[i, i] = w
    return FreeOperator(space, space, mat)


def kalton_T(sys: ShellSystem, n: int) -> FreeOperator:
    return _diagonal(sys.space, [sys.weight(n, i) for i in range(sys.space.n)])


def kalton_S(sys: ShellSystem, N: int) -> FreeOperator:
    if N < 0:
        raise ValueError("N must be a natural number")
    return _diagonal(sys.space, [sys.S_weight(N, i) for i in range(sys.space.n)])


# -- net retraction ----------------------------------------------------------------

def greedy_net(space: FiniteSpace, mesh) -> list[int]:
    """Points farther than ``mesh`` from every earlier pick, scanned outward from the basepoint."""
    if not mesh > 0:
        raise ValueError("mesh must be positive")
    b = space.base
    order = sorted(range(space.n), key=lambda i: (space.dist[b][i], i))
    net = [b]
    for i in order:
        if i != b and all(space.dist[i][j] > mesh for j in net):
            net.append(i)
    return net


def nearest_in(space: FiniteSpace, net: Sequence[int], i: int) -> int:
    b = space.base
    return min(net, key=lambda j: (space.dist[i][j], space.dist[b][j], j))


def net_retraction(space: FiniteSpace, mesh, method: str = "primal") -> tuple[FreeOperator, object]:
    """delta_x -> delta_pi(x) with pi the nearest point of a greedy mesh-net; returns (R, ||R||)."""
    net = greedy_net(space, mesh)
    one = Fraction(1) if space.exact else 1.0
    mat = np.zeros((space.n, space.n), dtype=object if space.exact else float)
    if space.exact:
        mat[:, :] = Fraction(0)
    for i in range(space.n):
        mat[nearest_in(space, net, i), i] = one
    R = FreeOperator(space, space, mat)
    return R, operator_norm(R, method)


# -- the approximation experiment ---------------------------------------------------

def molecule_battery(space: FiniteSpace, seed: int = 0, count: int = 9) -> list[Molecule]:
    """Deterministic test molecules: point masses, normalized pairs and random integer mixes."""
    rng = random.Random(seed)
    others = space.others()
    if not others:
        return []
    b = space.base
    by_radius = sorted(others, key=lambda i: (space.dist[b][i], i))
    out = []
    for i in dict.fromkeys([by_radius[0], by_radius[len(by_radius) // 2], by_radius[-1]]):
        out.append(Molecule.delta(space, i, 1))
    for _ in range(count // 3):
        if len(others) >= 2:
            i, j = rng.sample(others, 2)
            out.append(Molecule(space, {i: 1, j: -1}))
    for _ in range(count - len(out)):
        k = min(len(others), 3)
        out.append(Molecule(space, {i: rng.choice([-3, -2, -1, 1, 2, 3]) for i in rng.sample(others, k)}))
    return out


def _q_cell(args):
    space, N, mesh, mols = args
    sys = ShellSystem(space)
    S = kalton_S(sys, N)
    R, norm_R = net_retraction(space, mesh)
    Q = R.compose(S)
    errors = [kr_norm(apply(Q, g) - g) for g in mols]
    return {
        "N": N,
        "mesh": mesh,
        "rank": Q.rank(),
        "norm_R": norm_R,
        "norm_S": operator_norm(S),
        "norm_Q": operator_norm(Q),
        "errors": errors,
    }


def s_convergence(space: FiniteSpace, Ns: Iterable[int], molecules: Sequence[Molecule]) -> list[dict]:
    """kr_norm(S_N g - g) per molecule and N, plus when F_N first covers each support."""
    sys = ShellSystem(space)
    Ns = list(Ns)
    rows = []
    for k, g in enumerate(molecules):
        supp = {i for i, _ in g.coeff}
        errs = [kr_norm(apply(kalton_S(sys, N), g) - g) for N in Ns]
        cover = next((N for N in Ns if supp <= set(sys.F(N))), None)
        rows.append({"molecule": k, "N": Ns, "errors": errs, "first_cover": cover})
    return rows


def bap_experiment(space: FiniteSpace, Ns: Sequence[int], meshes: Sequence, seed: int = 0,
                   molecules: Sequence[Molecule] | None = None) -> dict:
    """Q = R o S_N over a grid of (N, mesh): ranks, norms and approximation errors."""
    mols = list(molecules) if molecules is not None else molecule_battery(space, seed)
    cells = parallel_map(_q_cell, [(space, N, mesh, mols) for N in Ns for mesh in meshes])
    conv = s_convergence(space, range(0, max(Ns) + 2), mols)
    worst_S = max(c["norm_S"] for c in cells) if cells else 0
    return {
        "points": space.n,
        "molecules": [m.to_json() for m in mols],
        "cells": cells,
        "s_convergence": conv,
        "max_norm_S": worst_S,
        "kalton_bound_holds": worst_S <= KALTON_BOUND,
    }


def convergence_csv_rows(report: dict) -> list[list]:
    rows = [["N", "mesh", "molecule", "error_Q"]]
    for c in report["cells"]:
        for k, e in enumerate(c["errors"]):
            rows.append([c["N"], c["mesh"], k, e])
    return rows


def s_convergence_csv_rows(report: dict) -> list[list]:
    rows = [["molecule", "N", "error_S", "first_cover"]]
    for r in report["s_convergence"]:
        for N, e in zip(r["N"], r["errors"]):
            rows.append([r["molecule"], N, e, r["first_cover"]])
    return rows
