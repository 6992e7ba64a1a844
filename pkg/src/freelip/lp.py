"""Linear programs over the Lipschitz unit ball of a finite pointed space.

The feasible set is {f : f = 0 on the pinned set, |f(x) - f(y)| <= d(x, y)}.
Shifting every free coordinate by its distance to the pinned set makes the
origin feasible and turns the constraint matrix into a network matrix, so
the exact simplex below pivots on +-1 entries only and keeps the tableau in
small integers while right-hand sides and costs stay exact rationals.
"""

from __future__ import annotations

from fractions import Fraction
from typing import Sequence

import numpy as np

from .metric import FiniteSpace


class LPError(RuntimeError):
    pass


def _rows(space: FiniteSpace, pinned: Sequence[int]):
    """Constraint rows as (plus, minus, rhs_in_f_coordinates) triples."""
    pin = sorted(set(pinned))
    pinset = set(pin)
    free = [i for i in range(space.n) if i not in pinset]
    d = space.dist
    rows = []
    for x in free:
        for y in free:
            if x != y:
                rows.append((x, y, d[x][y]))
    for x in free:
        for p in pin:
            rows.append((x, None, d[x][p]))
            rows.append((None, x, d[x][p]))
    return free, pin, rows


def lip_ball_lp(space: FiniteSpace, objective: Sequence, pinned: Sequence[int] | None = None, exact: bool | None = None):
    """Maximize sum_x objective[x] * f(x) over the pinned Lipschitz unit ball.

    Returns ``(value, f)`` with ``f`` a full list of values (0 on the pinned
    set).  Exact inputs go through the rational simplex, floats through HiGHS.
    """
    pinned = [space.base] if pinned is None else list(pinned)
    if space.base not in pinned:
        raise ValueError("the basepoint must be pinned")
    if exact is None:
        exact = space.exact and all(isinstance(c, (int, Fraction)) for c in objective)
    if exact:
        return _solve_exact(space, objective, pinned)
    return _solve_highs(space, objective, pinned)


def _solve_exact(space, objective, pinned):
    free, pin, rows = _rows(space, pinned)
    zero = Fraction(0)
    if not free:
        return zero, [zero] * space.n
    col = {x: k for k, x in enumerate(free)}
    d = space.dist
    shift = {x: min(Fraction(d[x][p]) for p in pin) for x in free}
    m, nv = len(rows), len(free)
    A = np.zeros((m, nv + m), dtype=np.int64)
    b: list[Fraction] = []
    for i, (plus, minus, rhs) in enumerate(rows):
        r = Fraction(rhs)
        if plus is not None:
            A[i, col[plus]] += 1
            r += shift[plus]
        if minus is not None:
            A[i, col[minus]] -= 1
            r -= shift[minus]
        if r < 0:
            raise LPError("shifted right-hand side is negative: the input violates the triangle inequality")
        A[i, nv + i] = 1
        b.append(r)
    c = [Fraction(objective[x]) for x in free]
    const = -sum((c[k] * shift[x] for k, x in enumerate(free)), zero)
    g, z = _simplex_max(A, b, c + [zero] * m, nv)
    f = [zero] * space.n
    for k, x in enumerate(free):
        f[x] = g[k] - shift[x]
    return z + const, f


def _simplex_max(A: np.ndarray, b: list, rc: list, nv: int):
    """Primal simplex from the slack basis; A must stay unimodular."""
    m, ncols = A.shape
    basis = list(range(nv, nv + m))
    z = Fraction(0)
    degenerate = 0
    while True:
        # Dantzig's rule, falling back to Bland's after a long degenerate run
        if degenerate > 50:
            enter = next((j for j in range(ncols) if rc[j] > 0), None)
        else:
            best, enter = 0, None
            for j in range(ncols):
                if rc[j] > best:
                    best, enter = rc[j], j
        if enter is None:
            break
        column = A[:, enter]
        cand = np.nonzero(column > 0)[0]
        if cand.size == 0:
            raise LPError("unbounded program")  # pragma: no cover - the ball is bounded
        leave, ratio = None, None
        for i in cand:
            r = b[i] / int(column[i])
            if ratio is None or r < ratio or (r == ratio and basis[i] < basis[leave]):
                leave, ratio = int(i), r
        piv = int(A[leave, enter])
        if piv != 1:
            raise LPError(f"non-unit pivot {piv}: constraint matrix is not unimodular")
        degenerate = degenerate + 1 if ratio == 0 else 0
        prow = A[leave].copy()
        colv = A[:, enter].copy()
        colv[leave] = 0
        nz = np.nonzero(colv)[0]
        if nz.size:
            A[nz] -= np.outer(colv[nz], prow)
            bl = b[leave]
            for i in nz:
                b[i] -= int(colv[i]) * bl
        step = rc[enter]
        for j in np.nonzero(prow)[0]:
            rc[j] -= step * int(prow[j])
        z += step * b[leave]
        basis[leave] = enter
    g = [Fraction(0)] * nv
    for i, v in enumerate(basis):
        if v < nv:
            g[v] = b[i]
    return g, z


def _solve_highs(space, objective, pinned):
    from scipy.optimize import linprog

    free, pin, rows = _rows(space, pinned)
    if not free:
        return 0.0, [0.0] * space.n
    col = {x: k for k, x in enumerate(free)}
    m, nv = len(rows), len(free)
    A = np.zeros((m, nv))
    bub = np.empty(m)
    for i, (plus, minus, rhs) in enumerate(rows):
        if plus is not None:
            A[i, col[plus]] += 1.0
        if minus is not None:
            A[i, col[minus]] -= 1.0
        bub[i] = float(rhs)
    c = np.array([float(objective[x]) for x in free])
    res = linprog(-c, A_ub=A, b_ub=bub, bounds=[(None, None)] * nv, method="highs-ds",
                  options={"primal_feasibility_tolerance": 1e-10, "dual_feasibility_tolerance": 1e-10})
    if res.status != 0:
        raise LPError(f"HiGHS failed: {res.message}")
    f = [0.0] * space.n
    for k, x in enumerate(free):
        f[x] = float(res.x[k])
    return float(-res.fun), f
