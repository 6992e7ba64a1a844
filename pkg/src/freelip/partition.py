"""Clopen partitions and their lifting through Cantor-Bendixson derivatives."""

from __future__ import annotations

from dataclasses import dataclass, replace

from .metric import FiniteSpace
from .regions import INF, Interval, Region
from .towers import TowerSpace, cb_derivative


class PartitionError(ValueError):
    pass


@dataclass(frozen=True)
class ClopenPartition:
    """Parts are Regions (tower spaces) or frozensets of indices (finite spaces)."""

    space: object
    parts: tuple

    def __post_init__(self):
        object.__setattr__(self, "parts", tuple(self.parts))

    def problems(self) -> list[str]:
        if isinstance(self.space, FiniteSpace):
            return _finite_problems(self.space, self.parts)
        return _tower_problems(self.space, self.parts)

    def is_valid(self) -> bool:
        return not self.problems()

    def part_of(self, key) -> int:
        """Index of the part holding a tower key or finite-space index."""
        for i, part in enumerate(self.parts):
            if isinstance(part, Region):
                if part.contains(self.space.coordinate(key)):
                    return i
            elif key in part:
                return i
        raise KeyError(f"{key} lies in no part")

    def to_json(self) -> dict:
        if isinstance(self.space, FiniteSpace):
            return {"parts": [sorted(p) for p in self.parts]}
        return {"parts": [p.to_json() for p in self.parts]}


def _finite_problems(space: FiniteSpace, parts) -> list[str]:
    out = []
    seen: set[int] = set()
    for i, p in enumerate(parts):
        if seen & set(p):
            out.append(f"part {i} overlaps an earlier part")
        seen |= set(p)
    if seen != set(range(space.n)):
        out.append("parts do not cover the space")
    return out


def _is_empty_in(space: TowerSpace, region: Region) -> bool:
    return space.inf_in(region) is None


def _inconsistent_endpoints(space: TowerSpace, region: Region) -> list:
    """Accumulation points p of ``space`` with [p in region] != [germ at p in region]."""
    bad = []
    for e in sorted(set(region.endpoints())):
        nd = space.locate(e)
        if nd is None or nd.rank < 1:
            continue
        germ_in = any(iv.germ(e) for iv in region.intervals)
        if region.contains(e) != germ_in:
            bad.append(e)
    return bad


def _tower_problems(space: TowerSpace, parts) -> list[str]:
    out = []
    for i in range(len(parts)):
        for j in range(i + 1, len(parts)):
            if not _is_empty_in(space, parts[i].intersect(parts[j])):
                out.append(f"parts {i} and {j} share points")
    union = Region()
    for p in parts:
        union = union.union(p)
    if not _is_empty_in(space, union.complement()):
        out.append("parts do not cover the space")
    for i, p in enumerate(parts):
        for e in _inconsistent_endpoints(space, p):
            out.append(f"part {i} is not clopen: boundary at accumulation point {e}")
    return out


def clopen_lift(space, partition: ClopenPartition, alpha: int) -> ClopenPartition:
    """Lift a clopen partition of the alpha-th derived space to the whole space.

    Each step goes down one derivative: the new parts keep the same points of
    the higher derived set, every accumulation point drags its right germ into
    its own part, and points left uncovered join the first part.
    """
    if alpha < 0:
        raise ValueError("alpha must be a natural number")
    problems = partition.problems()
    if problems:
        raise PartitionError("invalid input partition: " + "; ".join(problems))
    if alpha == 0:
        return partition
    if isinstance(space, FiniteSpace):
        raise PartitionError("finite spaces have empty derived sets; only alpha = 0 applies")
    expected = cb_derivative(space, alpha)
    ps = partition.space
    if not isinstance(ps, TowerSpace) or (ps.components, ps.level) != (expected.components, expected.level):
        raise PartitionError("partition is not defined on the alpha-th derived space")
    regions = list(partition.parts)
    for beta in range(alpha, 0, -1):
        upper = cb_derivative(space, beta)  # the space the current parts partition
        lower = cb_derivative(space, beta - 1)
        regions = _lift_one(lower, upper, regions)
    return ClopenPartition(space, tuple(regions))


def _owner(regions, c) -> int | None:
    for i, r in enumerate(regions):
        if r.contains(c):
            return i
    return None


def _lift_one(lower: TowerSpace, upper: TowerSpace, regions: list[Region]) -> list[Region]:
    regions = list(regions)
    while True:
        todo = []
        for r in regions:
            todo.extend(_inconsistent_endpoints(lower, r))
        if not todo:
            break
        e = min(todo)
        owner = _owner(regions, e)
        if owner is None:
            raise PartitionError(f"accumulation point {e} is not covered")  # pragma: no cover
        nxt = upper.inf_in(Region([Interval(e, INF, False, False)]))
        bound_p = INF if nxt is None else nxt[0]
        ends = [v for r in regions for v in r.endpoints() if v > e]
        bound_b = min(ends, default=INF)
        if bound_b < bound_p:
            cut = bound_b
        elif bound_p != INF:
            cut = (lower_full(lower).left_gap(bound_p) + bound_p) / 2
        else:
            cut = INF
        germ = Region([Interval(e, cut, True, False)])
        regions = [r.union(germ) if i == owner else r.minus(germ) for i, r in enumerate(regions)]
    union = Region()
    for r in regions:
        union = union.union(r)
    leftover = union.complement()
    if not _is_empty_in(lower, leftover):
        regions[0] = regions[0].union(leftover)
    return regions


def lower_full(space: TowerSpace) -> TowerSpace:
    """The level-0 space: gaps of the full space are gaps at every level."""
    return replace(space, level=0)


def materialize(partition: ClopenPartition, keys, coords) -> list[frozenset]:
    """Index sets of a truncation (given its tower keys and coordinates)."""
    out = [set() for _ in partition.parts]
    for idx, (key, c) in enumerate(zip(keys, coords)):
        for i, part in enumerate(partition.parts):
            if part.contains(c):
                out[i].add(idx)
                break
        else:
            raise PartitionError(f"point {key} lies in no part")
    return [frozenset(s) for s in out]
