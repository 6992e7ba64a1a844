"""Little-Lipschitz functions separating two points of a tower space.

The construction balls around ``x``, reads off the top Cantor-Bendixson level
of the ball, and builds a radial staircase phi (constant on plateaus around
the distances of those points, affine in between).  While the set of points
whose distance to ``x`` falls outside every plateau is infinite, its own top
level seeds a new, thinner family of plateaus.  Ranks drop at every round, so
the cascade stops after at most rank-of-the-ball rounds.
"""

from __future__ import annotations

import math
from dataclasses import dataclass, field
from fractions import Fraction
from typing import Sequence

from .lipschitz import LipFn, lip_norm, little_lip_modulus, slope_witness
from .regions import INF, Interval, Region, radial_preimage
from .towers import TowerSpace, parse_point, point_id, truncate_with_keys


class SeparatorError(ValueError):
    pass


class PlateauOverlapError(SeparatorError):
    """A freshly placed plateau meets the closure of an earlier one."""

    def __init__(self, message: str, config: dict):
        super().__init__(message)
        self.config = config


# -- staircase functions ---------------------------------------------------------------

@dataclass(frozen=True)
class Plateau:
    lo: Fraction
    hi: object  # Fraction or INF
    value: Fraction
    level: int

    def to_json(self) -> dict:
        return {"lo": _enc(self.lo), "hi": _enc(self.hi), "value": _enc(self.value), "level": self.level}


def _enc(v):
    if v == INF:
        return "inf"
    v = Fraction(v)
    return str(v.numerator) if v.denominator == 1 else f"{v.numerator}/{v.denominator}"


def _dec(s):
    return INF if s == "inf" else Fraction(s)


@dataclass(frozen=True)
class StaircaseFn:
    """Continuous map [0, inf) -> [0, inf), constant on each plateau and affine between.

    The first plateau is [0, hi); the others are open intervals.
    """

    plateaus: tuple

    def __post_init__(self):
        ps = tuple(sorted(self.plateaus, key=lambda p: p.lo))
        object.__setattr__(self, "plateaus", ps)

    def problems(self) -> list[str]:
        ps = self.plateaus
        out = []
        if not ps or ps[0].lo != 0:
            out.append("the first plateau must start at 0")
        if ps and ps[-1].hi != INF:
            out.append("the last plateau must be unbounded")
        for p, q in zip(ps, ps[1:]):
            if q.lo < p.hi:
                out.append(f"plateaus ({_enc(p.lo)}, {_enc(p.hi)}) and ({_enc(q.lo)}, {_enc(q.hi)}) overlap")
            elif q.lo == p.hi and q.value != p.value:
                out.append(f"plateaus meet at {_enc(p.hi)} with different values: jump")
            if q.value < p.value:
                out.append(f"values decrease at {_enc(q.lo)}")
        return out

    def __call__(self, t):
        ps = self.plateaus
        lo, hi = 0, len(ps) - 1
        # last plateau with lo <= t
        while lo < hi:
            mid = (lo + hi + 1) // 2
            if ps[mid].lo <= t:
                lo = mid
            else:
                hi = mid - 1
        p = ps[lo]
        if t < p.hi or lo == len(ps) - 1:
            return p.value
        q = ps[lo + 1]
        return p.value + (q.value - p.value) * (t - p.hi) / (q.lo - p.hi)

    def gaps(self) -> list[tuple]:
        """(start, end, slope) of every affine piece."""
        out = []
        for p, q in zip(self.plateaus, self.plateaus[1:]):
            if q.lo > p.hi:
                out.append((p.hi, q.lo, (q.value - p.value) / (q.lo - p.hi)))
        return out

    def lipschitz(self) -> Fraction:
        return max((s for _, _, s in self.gaps()), default=Fraction(0))

    def plateau_region(self, closed: bool) -> Region:
        ivs = []
        for p in self.plateaus:
            if closed:
                ivs.append(Interval(p.lo, p.hi, True, p.hi != INF))
            else:
                ivs.append(Interval(p.lo, p.hi, p.lo == 0, False))
        return Region(ivs)

    def to_json(self) -> list:
        return [p.to_json() for p in self.plateaus]

    @classmethod
    def from_json(cls, obj) -> "StaircaseFn":
        return cls(tuple(Plateau(_dec(o["lo"]), _dec(o["hi"]), _dec(o["value"]), int(o["level"])) for o in obj))


# -- the constant -------------------------------------------------------------------------

def separation_constant(levels=math.inf):
    """2 * prod_{j=1}^{levels} (1 + 1/(2^j - 1)); exact for finite levels."""
    if levels == math.inf or levels is None:
        c = 2.0
        j = 1
        while True:
            step = c / (2**j - 1)
            c += step
            if step < 1e-12:
                return c
            j += 1
    if levels < 0:
        raise ValueError("levels must be a natural number")
    c = Fraction(2)
    for j in range(1, int(levels) + 1):
        c *= 1 + Fraction(1, 2**j - 1)
    return c


# -- certificates -------------------------------------------------------------------------

@dataclass(frozen=True)
class LevelTrace:
    level: int
    alpha: int
    top_points: tuple  # point ids of the top Cantor-Bendixson level
    distances: tuple  # v_n^1 < ... < v_n^{r_n}
    v: Fraction
    half_width: Fraction
    phi_lipschitz: Fraction
    C: Region
    C_finite: bool
    C_points: tuple  # ids, only when finite
    D_points: tuple

    @property
    def r(self) -> int:
        return len(self.distances)

    def to_json(self) -> dict:
        return {
            "level": self.level,
            "alpha": self.alpha,
            "top_points": list(self.top_points),
            "distances": [_enc(v) for v in self.distances],
            "r": self.r,
            "v": _enc(self.v),
            "half_width": _enc(self.half_width),
            "phi_lipschitz": _enc(self.phi_lipschitz),
            "C": self.C.to_json(),
            "C_finite": self.C_finite,
            "C_points": list(self.C_points),
            "D_points": list(self.D_points),
        }


@dataclass(frozen=True)
class SeparatorCertificate:
    space: TowerSpace
    x: tuple
    y: tuple
    a: Fraction
    phi: StaircaseFn
    levels: int
    slope_bound: Fraction
    witness_delta: Fraction
    trace: tuple = field(default_factory=tuple)
    printed_delta: Fraction | None = None
    overlap: str = "raise"

    @property
    def shift(self) -> Fraction:
        return self.phi(abs(self.space.coordinate(self.space.base_key)))

    def value_at(self, coord) -> Fraction:
        """h(z) = 2 (phi(d(z, x)) - phi(d(0, x)))."""
        cx = self.space.coordinate(self.x)
        return 2 * (self.phi(abs(Fraction(coord) - cx)) - self.phi(abs(cx)))

    def h(self, depth: int | None = None) -> LipFn:
        """h on the truncation at ``depth`` (deep enough to hold x and y)."""
        fs, _ = truncate_with_keys(self.space, self._depth(depth))
        return LipFn(fs, radial_values(self.phi, fs, self.space.coordinate(self.x)))

    def _depth(self, depth):
        need = max(max(self.x[1:], default=1), max(self.y[1:], default=1))
        return max(self.space.depth if depth is None else depth, need)

    def to_json(self, depth: int | None = None) -> dict:
        h = self.h(depth)
        return {
            "space": self.space.to_json(),
            "x": point_id(self.space, self.x),
            "y": point_id(self.space, self.y),
            "a": _enc(self.a),
            "levels": self.levels,
            "slope_bound": _enc(self.slope_bound),
            "witness_delta": _enc(self.witness_delta),
            "printed_delta": None if self.printed_delta is None else _enc(self.printed_delta),
            "overlap": self.overlap,
            "phi": self.phi.to_json(),
            "trace": [t.to_json() for t in self.trace],
            "h": {"points": list(h.space.points), "values": h.to_json()},
        }

    @classmethod
    def from_json(cls, obj: dict) -> "SeparatorCertificate":
        space = TowerSpace.from_json(obj["space"])
        return cls(
            space,
            parse_point(space, obj["x"]),
            parse_point(space, obj["y"]),
            Fraction(obj["a"]),
            StaircaseFn.from_json(obj["phi"]),
            int(obj["levels"]),
            Fraction(obj["slope_bound"]),
            Fraction(obj["witness_delta"]),
            (),
            None if obj.get("printed_delta") is None else Fraction(obj["printed_delta"]),
            obj.get("overlap", "raise"),
        )


# -- the construction ---------------------------------------------------------------------

def _closed_gaps(phi: StaircaseFn) -> Region:
    return phi.plateau_region(closed=False).complement().intersect(Region([Interval(0, INF, True, False)]))


def _open_gaps(phi: StaircaseFn) -> Region:
    return phi.plateau_region(closed=True).complement().intersect(Region([Interval(0, INF, True, False)]))


def _merge_equal(plateaus: list[Plateau]) -> list[Plateau]:
    """Fuse overlapping plateaus that carry the same value (level-1 degenerate cases)."""
    ps = sorted(plateaus, key=lambda p: p.lo)
    out: list[Plateau] = []
    for p in ps:
        if out and p.lo < out[-1].hi and p.value == out[-1].value:
            q = out[-1]
            out[-1] = Plateau(q.lo, max(q.hi, p.hi), q.value, q.level)
        else:
            out.append(p)
    return out


def separate(space: TowerSpace, x, y, overlap: str = "raise") -> SeparatorCertificate:
    """Run the plateau cascade for the pair (x, y); ``x`` is the ball centre.

    ``overlap`` decides what happens when a new plateau meets the closure of
    an older one: ``"raise"`` stops with PlateauOverlapError, ``"merge"``
    fuses the two when they carry the same value (a centre sitting on an old
    plateau edge) and still raises otherwise.
    """
    if overlap not in ("raise", "merge"):
        raise ValueError("overlap must be 'raise' or 'merge'")
    if space.level:
        raise SeparatorError("separators are built on the full space, not a derived one")
    kx = parse_point(space, x) if not isinstance(x, tuple) else x
    ky = parse_point(space, y) if not isinstance(y, tuple) else y
    if not (space.contains_key(kx) and space.contains_key(ky)):
        raise SeparatorError("both points must belong to the space")
    cx, cy = space.coordinate(kx), space.coordinate(ky)
    if cx == cy:
        raise SeparatorError("x and y must be distinct")
    a = abs(cx - cy)
    half = a / 2

    def pid(nd):
        return point_id(space, nd.key)

    # level 1
    alpha, top = space.top_points(Region.closed(cx - half, cx + half))
    dists = sorted({abs(nd.anchor - cx) for nd in top})
    if [nd.anchor for nd in top] == [cx]:
        v = half
    else:
        cands = {dists[0], half - dists[-1]} - {0}
        cands |= {q - p for p, q in zip(dists, dists[1:])}
        v = min(cands)
    w = v / 4
    plateaus = [Plateau(Fraction(0), w, Fraction(0), 1)]
    plateaus += [Plateau(max(t - w, Fraction(0)), t + w, t, 1) for t in dists]
    plateaus.append(Plateau(half - w, INF, half, 1))
    phi = StaircaseFn(tuple(_merge_equal(plateaus)))
    trace = []
    n = 1
    prev_alpha = alpha
    while True:
        C = radial_preimage(cx, _closed_gaps(phi))
        finite = space.is_finite(C)
        cpts = space.points_in(C) if finite else []
        dpts = space.points_in(radial_preimage(cx, _open_gaps(phi))) if finite else []
        trace.append(
            LevelTrace(n, alpha, tuple(pid(nd) for nd in top), tuple(dists), v, w, phi.lipschitz(), C, finite,
                       tuple(pid(nd) for nd in cpts), tuple(pid(nd) for nd in dpts))
        )
        if finite:
            break
        # next level: top Cantor-Bendixson level of C
        alpha, top = space.top_points(C)
        if not 1 <= alpha < prev_alpha:
            raise SeparatorError(f"rank failed to decrease at level {n + 1}: {prev_alpha} -> {alpha}")
        prev_alpha = alpha
        n += 1
        dists = sorted({abs(nd.anchor - cx) for nd in top})
        v = min({v, dists[0]} | {q - p for p, q in zip(dists, dists[1:])})
        w = v / 2 ** (n + 1)
        placed = list(phi.plateaus)
        for t in dists:
            p = Plateau(t - w, t + w, phi(t), n)
            hits = [q for q in placed if p.lo <= q.hi and q.lo <= p.hi]
            if hits and not (overlap == "merge" and all(q.value == p.value for q in hits)):
                q = hits[0]
                raise PlateauOverlapError(
                    f"level {n} plateau around {_enc(t)} meets the closure of a level {q.level} plateau "
                    f"[{_enc(q.lo)}, {_enc(q.hi)}]",
                    {"space": space.to_json(), "x": point_id(space, kx), "y": point_id(space, ky), "level": n,
                     "centre": _enc(t), "half_width": _enc(w), "old": q.to_json()},
                )
            placed.append(p)
        phi = StaircaseFn(tuple(_merge_equal(placed)))
    printed = _printed_delta(space, v, cpts, dpts, C)
    # two points in different plateaus are at least a plateau gap apart, and
    # strictly more when no point of K sits on a plateau edge (C empty)
    gap = min((e - s for s, e, _ in phi.gaps()), default=INF)
    delta = min(printed, gap if not cpts else gap / 2)
    return SeparatorCertificate(space, kx, ky, a, phi, n, separation_constant(n), delta, tuple(trace), printed, overlap)


def _printed_delta(space: TowerSpace, v, cpts, dpts, C: Region) -> Fraction:
    """delta exactly as the construction states it (before the plateau-gap cap)."""
    if not cpts:
        return v / 2
    cands = [v]
    coords = [nd.anchor for nd in cpts]
    cands += [q - p for p, q in zip(coords, coords[1:])]
    outside = C.complement()
    for nd in dpts:
        cands.append(space.dist_to(nd.anchor, outside))
    return min(cands) / 2


# -- verification ---------------------------------------------------------------------------

@dataclass
class CheckReport:
    checks: list = field(default_factory=list)
    notes: dict = field(default_factory=dict)

    def add(self, name: str, ok: bool, detail=None):
        self.checks.append({"check": name, "ok": bool(ok), "detail": detail})

    @property
    def ok(self) -> bool:
        return all(c["ok"] for c in self.checks)

    def failures(self) -> list:
        return [c for c in self.checks if not c["ok"]]

    def to_json(self) -> dict:
        return {"ok": self.ok, "checks": self.checks, "notes": self.notes}


def radial_values(phi: StaircaseFn, fs, cx) -> tuple:
    """2 (phi(|c - cx|) - phi(|cx|)) at every coordinate of a line space.

    Points are swept in order of distance so that plateau points cost a
    comparison and only gap points need arithmetic.
    """
    dist = [abs(c - cx) for c in fs.coords]
    order = sorted(range(len(dist)), key=dist.__getitem__)
    shift = phi(abs(cx))
    ps = phi.plateaus
    out = [None] * len(dist)
    k = 0
    for i in order:
        t = dist[i]
        while k + 1 < len(ps) and ps[k + 1].lo <= t:
            k += 1
        p = ps[k]
        if t < p.hi or k + 1 == len(ps):
            out[i] = 2 * (p.value - shift)
        else:
            out[i] = 2 * (phi(t) - shift)
    return tuple(out)


def level_staircase(phi: StaircaseFn, level: int) -> StaircaseFn:
    """phi_level: the plateaus placed up to ``level``."""
    return StaircaseFn(tuple(p for p in phi.plateaus if p.level <= level))


def verify_certificate(cert: SeparatorCertificate, depth: int) -> CheckReport:
    """Re-evaluate h from the stored staircase on a truncation and re-check every claim.

    ``notes`` carries diagnostics that are not certificate invariants: the
    slope of each phi_n on the whole half-line against 2*prod, and whether the
    uncapped delta would also have worked.
    """
    rep = CheckReport()
    rep.add("staircase well formed", not cert.phi.problems(), cert.phi.problems() or None)
    rep.add("slope bound formula", cert.slope_bound == separation_constant(cert.levels), _enc(cert.slope_bound))
    rep.add("slope bound below c", cert.slope_bound <= separation_constant(math.inf) + 1e-6, _enc(cert.slope_bound))
    fs, keys = truncate_with_keys(cert.space, cert._depth(depth))
    cx = cert.space.coordinate(cert.x)
    h = cert.h(depth)
    ix, iy = keys.index(cert.x), keys.index(cert.y)
    gap = abs(h.values[ix] - h.values[iy])
    rep.add("|h(x) - h(y)| = d(x, y)", gap == fs.dist[ix][iy], {"h(x)": _enc(h.values[ix]), "h(y)": _enc(h.values[iy])})
    rep.add("h(0) = 0", cert.value_at(0) == 0, _enc(cert.value_at(0)))
    L = lip_norm(h)
    rep.add("lip_norm(h) <= slope bound", L <= cert.slope_bound, _enc(L))
    # slope accounting level by level, measured on the points of K
    phi_slopes = {}
    for n in range(1, cert.levels + 1):
        phin = level_staircase(cert.phi, n)
        hn = LipFn(fs, radial_values(phin, fs, cx))
        Ln = lip_norm(hn)
        rep.add(f"level {n}: lip_norm(h_{n}) <= 2*prod", Ln <= separation_constant(n), _enc(Ln))
        phi_slopes[n] = {"phi_lipschitz": _enc(phin.lipschitz()), "bound": _enc(separation_constant(n) / 2),
                         "within": phin.lipschitz() <= separation_constant(n) / 2}
    rep.notes["phi_slopes_on_half_line"] = phi_slopes
    d = cert.witness_delta
    mod = little_lip_modulus(h, d)
    wit = slope_witness(h, d)
    rep.add("little lip modulus at delta is 0", mod == 0,
            None if wit is None else {"pair": [fs.points[wit[0]], fs.points[wit[1]]], "modulus": _enc(mod)})
    closed_bad = _closed_scale_violation(h, d)
    rep.add("h constant on pairs with d <= delta", closed_bad is None, closed_bad)
    if cert.printed_delta is not None:
        rep.notes["printed_delta"] = {"value": _enc(cert.printed_delta),
                                      "violation": _closed_scale_violation(h, cert.printed_delta)}
    seen: dict = {}
    radial_ok = True
    for c, v in zip(fs.coords, h.values):
        if seen.setdefault(abs(c - cx), v) != v:
            radial_ok = False
    rep.add("h depends only on d(., x)", radial_ok)
    return rep


def _closed_scale_violation(h: LipFn, delta):
    fs = h.space
    vals, cs = h.values, fs.coords
    order = fs.line_order
    for i, j in zip(order, order[1:]):
        if vals[i] != vals[j] and cs[j] - cs[i] <= delta:
            return {"pair": [fs.points[i], fs.points[j]]}
    return None


def separate_all(space: TowerSpace, keys: Sequence[tuple], overlap: str = "raise") -> list:
    """Certificates for every ordered pair of distinct keys, failures kept as exceptions."""
    out = []
    for kx in keys:
        for ky in keys:
            if kx == ky:
                continue
            try:
                out.append((kx, ky, separate(space, kx, ky, overlap)))
            except SeparatorError as exc:
                out.append((kx, ky, exc))
    return out
