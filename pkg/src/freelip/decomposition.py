"""Restriction to clopen pieces and the quotient identity for free spaces.

Checks that
  * restricting f to the pieces K_i = G_i ∪ {0} loses at most the factor
    a / (2 diam K), a being the smallest gap between different pieces,
  * splitting a molecule by piece changes its norm by at most the same factor,
  * dist(m, F(A)) equals the norm of the image of m in F(K/A).
"""

from __future__ import annotations

import random
from fractions import Fraction
from typing import Iterable, Sequence

from .free_space import (FLOAT_TOL, Molecule, attaining_function, kr_norm, push_to_quotient,
                         quotient_distance)
from .lipschitz import LipFn, lip_norm, restrict
from .metric import FiniteSpace, MetricError
from .partition import ClopenPartition, materialize
from .sampling import random_lipfn, random_molecule
from .towers import TowerSpace, cb_derivative, truncate_with_keys


class DecompositionError(ValueError):
    pass


def _parts(space: FiniteSpace, partition) -> list[frozenset]:
    parts = partition.parts if isinstance(partition, ClopenPartition) else partition
    parts = [frozenset(p) for p in parts]
    seen: set = set()
    for p in parts:
        if seen & p:
            raise DecompositionError("parts overlap")
        seen |= p
    if seen != set(range(space.n)):
        raise DecompositionError("parts do not cover the space")
    return parts


def partition_gap(space: FiniteSpace, partition):
    """min d(G_i, G_j) over distinct parts (infinite for a single part)."""
    parts = _parts(space, partition)
    best = None
    for a in range(len(parts)):
        for b in range(a + 1, len(parts)):
            for i in parts[a]:
                for j in parts[b]:
                    d = space.dist[i][j]
                    if best is None or d < best:
                        best = d
    return best


def _pieces(space: FiniteSpace, partition) -> list[list[int]]:
    return [sorted(p | {space.base}) for p in _parts(space, partition)]


def phi_map(space: FiniteSpace, partition, f: LipFn) -> list[LipFn]:
    """f -> (f|K_i)_i with K_i = G_i ∪ {0}."""
    if f.space != space:
        raise MetricError("f lives on a different space")
    gap = partition_gap(space, partition)
    if gap is not None and not gap > 0:
        raise DecompositionError("parts must be a positive distance apart")
    return [restrict(f, piece) for piece in _pieces(space, partition)]


def phi_norm(space: FiniteSpace, partition, f: LipFn):
    return max(lip_norm(g) for g in phi_map(space, partition, f))


def lower_constant(space: FiniteSpace, partition):
    """a / (2 diam K), or 1 for a single part."""
    gap = partition_gap(space, partition)
    if gap is None:
        return Fraction(1) if space.exact else 1.0
    return gap / (2 * space.diameter())


def vertex_functions(space: FiniteSpace) -> list[tuple[str, LipFn]]:
    """Extreme points of the Lip-1 ball picked out by point masses and normalized pairs."""
    out = []
    for i in space.others():
        out.append((f"delta:{space.points[i]}", attaining_function(Molecule.delta(space, i, 1))))
    for i in range(space.n):
        for j in range(i + 1, space.n):
            m = Molecule.pair_molecule(space, i, j)
            out.append((f"pair:{space.points[i]}~{space.points[j]}", attaining_function(m)))
    return out


def indicator_functions(space: FiniteSpace, partition) -> list[tuple[str, LipFn]]:
    """f = a/2 on one part away from the basepoint and 0 elsewhere: all slope sits across gaps."""
    gap = partition_gap(space, partition)
    if gap is None:
        return []
    out = []
    for k, p in enumerate(_parts(space, partition)):
        if space.base in p:
            continue
        vals = [gap / 2 if i in p else gap * 0 for i in range(space.n)]
        out.append((f"indicator:{k}", LipFn(space, tuple(vals))))
    return out


def phi_sandwich_check(space: FiniteSpace, partition, samples: int, seed: int = 0,
                       vertices: bool = True) -> dict:
    """Both sides of a/(2 diam)·||f||_L <= max_i ||f|K_i||_L <= ||f||_L on random and vertex f."""
    rng = random.Random(seed)
    low = lower_constant(space, partition)
    funcs = [(f"random:{k}", random_lipfn(rng, space)) for k in range(samples)]
    if vertices:
        funcs += vertex_functions(space)
    funcs += indicator_functions(space, partition)
    rows, violations = [], []
    worst = None
    for label, f in funcs:
        L = lip_norm(f)
        P = phi_norm(space, partition, f)
        upper_ok = P <= L
        lower_ok = low * L <= P
        if not (upper_ok and lower_ok):
            violations.append({"f": label, "lip": L, "phi": P, "upper": upper_ok, "lower": lower_ok})
        ratio = P / L if L else None
        if ratio is not None and (worst is None or ratio < worst[0]):
            worst = (ratio, label)
        rows.append([label, L, P, ratio])
    return {
        "functions": len(funcs),
        "gap": partition_gap(space, partition),
        "diameter": space.diameter(),
        "lower_constant": low,
        "violations": violations,
        "worst_ratio": None if worst is None else worst[0],
        "worst_witness": None if worst is None else worst[1],
        "rows": rows,
    }


def split_by_part(m: Molecule, partition) -> list[Molecule]:
    return [m.restricted(p) for p in _parts(m.space, partition)]


def _straddling_pairs(space: FiniteSpace, partition, limit: int = 4) -> list[Molecule]:
    parts = _parts(space, partition)
    pairs = []
    for a in range(len(parts)):
        for b in range(a + 1, len(parts)):
            for i in parts[a]:
                for j in parts[b]:
                    if space.base not in (i, j):
                        pairs.append((space.dist[i][j], i, j))
    pairs.sort()
    return [Molecule.pair_molecule(space, i, j) for _, i, j in pairs[:limit]]


def l1_sum_check(space: FiniteSpace, partition, samples: int, seed: int = 0) -> dict:
    """||m|| <= sum ||m_i|| <= max(1, 2 diam / a)·||m|| for m split by part."""
    rng = random.Random(seed)
    low = lower_constant(space, partition)
    factor = max(1, 1 / low)
    mols = [random_molecule(rng, space) for _ in range(samples)] + _straddling_pairs(space, partition)
    rows, violations = [], []
    worst = None
    for k, m in enumerate(mols):
        if m.is_zero():
            continue
        whole = kr_norm(m)
        split = sum((kr_norm(p) for p in split_by_part(m, partition)), whole * 0)
        ok = whole <= split + _slack(space, whole) and split <= factor * whole + _slack(space, split)
        if not ok:
            violations.append({"molecule": m.to_json(), "norm": whole, "sum": split})
        ratio = split / whole
        if worst is None or ratio > worst[0]:
            worst = (ratio, m.to_json())
        rows.append([k, whole, split, ratio])
    return {
        "molecules": len(rows),
        "factor": factor,
        "violations": violations,
        "worst_ratio": None if worst is None else worst[0],
        "worst_witness": None if worst is None else worst[1],
        "rows": rows,
    }


def _slack(space: FiniteSpace, value):
    return 0 if space.exact else FLOAT_TOL * max(1.0, abs(float(value)))


def quotient_isometry_check(space: FiniteSpace, A: Iterable[int], samples: int, seed: int = 0,
                            molecules: Sequence[Molecule] | None = None) -> dict:
    """dist(m, F(A)) against ||image of m in F(K/A)|| for molecules supported off A."""
    A = sorted(set(A))
    if space.base not in A:
        raise MetricError("the collapsed set must contain the basepoint")
    rng = random.Random(seed)
    off = [i for i in range(space.n) if i not in set(A)]
    if molecules is None:
        molecules = [random_molecule(rng, space, off) for _ in range(samples)] if off else []
    worst, rows, ok = 0, [], True
    for k, m in enumerate(molecules):
        lhs = quotient_distance(m, A)
        rhs = kr_norm(push_to_quotient(m, A))
        gap = abs(lhs - rhs)
        rows.append([k, lhs, rhs, gap])
        worst = max(worst, gap)
        ok = ok and gap <= _slack(space, lhs)
    return {
        "molecules": len(rows),
        "collapsed": [space.points[i] for i in A],
        "max_discrepancy": worst,
        "ok": ok,
        "rows": rows,
    }


def derived_indices(space: TowerSpace, alpha: int, depth: int | None = None) -> list[int]:
    """Indices of the truncation lying in the alpha-th derived set, plus the basepoint."""
    fs, keys = truncate_with_keys(space, depth)
    upper = cb_derivative(space, alpha)
    return sorted({i for i, k in enumerate(keys) if upper.contains_key(k)} | {fs.base})


def tower_partition(space: TowerSpace, partition: ClopenPartition, depth: int | None = None) -> list[frozenset]:
    """A symbolic clopen partition restricted to a truncation."""
    fs, keys = truncate_with_keys(space, depth)
    return materialize(partition, keys, fs.coords)


def csv_rows(report: dict, header: Sequence[str]) -> list[list]:
    return [list(header)] + [list(r) for r in report["rows"]]
