"""The acceptance battery.

Every criterion returns a JSON-ready dict with a ``checks`` map of named
booleans; ``passed`` is their conjunction.  Checks under ``supplementary``
are reported but do not decide the verdict.  Wall-clock timings are kept
apart from the report so that two runs with one seed give identical bytes.
"""

from __future__ import annotations

import math
import random
import time
from fractions import Fraction
from typing import Callable

from . import report
from .decomposition import derived_indices, phi_sandwich_check, quotient_isometry_check, tower_partition
from .free_space import FLOAT_TOL, Molecule, apply, kr_norm, operator_norm
from .kalton import KALTON_BOUND, ShellSystem, kalton_S, molecule_battery
from .lipschitz import extend_infconv, restrict
from .metric import FiniteSpace
from .oracles import brute_derived, brute_lip_norm, lip_ball_vertices, vertex_norm
from .partition import ClopenPartition, clopen_lift, materialize
from .regions import INF, Interval, Region
from .sampling import random_lipfn, random_molecule, random_space
from .separator import (SeparatorError, separate_all, separation_constant,
                        verify_certificate)
from .towers import Tower, TowerSpace, cb_derivative, point_id, shallowest, truncate, truncate_with_keys

BUDGETS = {1: 30, 2: 60, 3: 300, 4: 300, 5: 120, 6: 120, 7: 10, 8: 30}

TITLES = {
    1: "delta isometry",
    2: "primal / dual / vertex-enumeration agreement",
    3: "separator certificates",
    4: "Kalton bound, partition of unity, convergence",
    5: "quotient isometry",
    6: "Phi sandwich",
    7: "inf-convolution extension",
    8: "Cantor-Bendixson calculus and clopen lifting",
    9: "determinism",
}


def _result(num: int, checks: dict, details: dict, supplementary: dict | None = None) -> dict:
    return {
        "criterion": num,
        "title": TITLES[num],
        "passed": all(checks.values()),
        "checks": checks,
        "supplementary": supplementary or {},
        "details": details,
    }


def _towers(max_rank: int = 3, max_depth: int = 5) -> list[TowerSpace]:
    out = []
    for rank in range(max_rank + 1):
        for depth in range(1, max_depth + 1):
            out.append(TowerSpace.single(rank, "1/4", 0, 1, depth))
    out.append(TowerSpace((Tower(1, "1/4", 0, 1), Tower(2, "1/4", 3, 1)), depth=3))
    out.append(TowerSpace((Tower(2, "1/4", 1, 2),), depth=3))  # basepoint adjoined
    return out


# -- 1 -------------------------------------------------------------------------

def criterion_1(seed: int) -> dict:
    rng = random.Random(seed)
    spaces = [random_space(rng, rng.randint(2, 12)) for _ in range(50)]
    spaces += [truncate(t) for t in _towers()]
    exact_bad, float_worst, points = [], 0.0, 0
    for sp in spaces:
        fl = sp.to_float()
        for i in sp.others():
            points += 1
            v = kr_norm(Molecule.delta(sp, i, 1))
            if v != sp.dist[sp.base][i]:
                exact_bad.append([sp.points[i], report.canonical(v)])
            w = kr_norm(Molecule.delta(fl, i, 1.0))
            float_worst = max(float_worst, abs(w - fl.dist[fl.base][i]))
    checks = {"exact mode: equality": not exact_bad, "float mode: discrepancy <= 1e-9": float_worst <= FLOAT_TOL}
    return _result(1, checks, {"spaces": len(spaces), "points": points, "exact_failures": exact_bad[:5],
                               "float_max_discrepancy": float_worst})


# -- 2 -------------------------------------------------------------------------

def criterion_2(seed: int) -> dict:
    rng = random.Random(seed)
    bad, count = [], 0
    while count < 200:
        sp = random_space(rng, rng.randint(2, 5))
        verts = lip_ball_vertices(sp)
        for _ in range(5):
            m = random_molecule(rng, sp)
            primal = kr_norm(m, "primal")
            dual = kr_norm(m, "dual")
            brute = vertex_norm(sp, m.as_dict(), verts)
            count += 1
            if not primal == dual == brute:
                bad.append({"molecule": m.to_json(), "primal": primal, "dual": dual, "vertex": brute})
    return _result(2, {"transport = LP = vertex enumeration (exact)": not bad},
                   {"molecules": count, "failures": bad[:5]})


# -- 3 -------------------------------------------------------------------------

def _separator_sweep(overlap: str) -> dict:
    per_rank = {}
    for rank in (1, 2, 3):
        sp = TowerSpace.single(rank, "1/4", 0, 1, depth=10)
        keys = shallowest(sp, 10)
        certs, errors, failures = 0, [], []
        bounds: dict = {}
        max_lip: dict = {}
        for kx, ky, res in separate_all(sp, keys, overlap):
            pair = [point_id(sp, kx), point_id(sp, ky)]
            if isinstance(res, SeparatorError):
                errors.append({"pair": pair, "error": str(res)})
                continue
            certs += 1
            bounds.setdefault(res.levels, set()).add(res.slope_bound)
            for depth in (10, 20):
                rep = verify_certificate(res, depth)
                if not rep.ok:
                    failures.append({"pair": pair, "depth": depth, "failed": [c["check"] for c in rep.failures()]})
                lip = next(c["detail"] for c in rep.checks if c["check"] == "lip_norm(h) <= slope bound")
                key = str(res.levels)
                if key not in max_lip or Fraction(lip) > Fraction(max_lip[key]):
                    max_lip[key] = lip
        per_rank[str(rank)] = {
            "pairs": len(keys) * (len(keys) - 1),
            "certificates": certs,
            "construction_errors": errors,
            "verification_failures": failures,
            "slope_bounds_by_levels": {str(k): sorted(v) for k, v in sorted(bounds.items())},
            "max_lip_norm_by_levels": max_lip,
        }
    return per_rank


def _separator_checks(per_rank: dict) -> dict:
    every = all(r["certificates"] == r["pairs"] for r in per_rank.values())
    verified = all(not r["verification_failures"] for r in per_rank.values())
    by_level: dict = {}
    for r in per_rank.values():
        for k, v in r["slope_bounds_by_levels"].items():
            by_level.setdefault(k, set()).update(v)
    c = separation_constant(math.inf)
    return {
        "a certificate for every pair": every,
        "all invariants verified at depths 10 and 20": verified,
        "one-level bound is exactly 4": by_level.get("1") == {Fraction(4)},
        "two-level bound is exactly 16/3": by_level.get("2") == {Fraction(16, 3)},
        "all bounds <= 6.9255 + 1e-6": all(b <= c + 1e-6 and b <= 6.9255 + 1e-6 for v in by_level.values() for b in v),
    }


def criterion_3(seed: int) -> dict:
    strict = _separator_sweep("raise")
    merged = _separator_sweep("merge")
    supp = {f"overlap policy 'merge': {k}": v for k, v in _separator_checks(merged).items()}
    return _result(3, _separator_checks(strict), {"raise": strict, "merge": merged}, supp)


# -- 4 -------------------------------------------------------------------------

KALTON_SPACES = [  # (rank, scale, depth) with ratio 1/4 and anchor 0: 20 to 57 points
    (1, 1, 19),
    (1, 16, 39),
    (2, 1, 4),
    (2, 8, 6),
    (2, 1, 7),
]


def _covers(sys: ShellSystem, N: int, supp: set) -> bool:
    return N >= 0 and supp <= set(sys.F(N))


def criterion_4(seed: int) -> dict:
    spaces, bound_ok, unity_ok = [], True, True
    mono_fail, cover_fail, cover_next_fail = [], [], []
    for rank, scale, depth in KALTON_SPACES:
        fs = truncate(TowerSpace.single(rank, "1/4", 0, scale, depth))
        sys = ShellSystem(fs)
        norms = {}
        for N in range(1, 7):
            S = kalton_S(sys, N)
            norms[str(N)] = operator_norm(S, "both")
            bound_ok = bound_ok and norms[str(N)] <= KALTON_BOUND
            for i in fs.others():
                r = sys.radius(i)
                if 2.0 ** -N < r <= 2.0 ** N and sys.S_weight(N, i) != 1:
                    unity_ok = False
        mols = molecule_battery(fs, seed)
        Nmax = max(abs(sys.band(i)) for i in fs.others()) + 2
        for k, g in enumerate(mols):
            supp = {i for i, _ in g.coeff}
            errs = [kr_norm(apply(kalton_S(sys, N), g) - g) for N in range(Nmax + 1)]
            tag = {"space": [rank, scale, depth], "molecule": g.to_json(), "errors": errs}
            if any(b > a + FLOAT_TOL for a, b in zip(errs, errs[1:])):
                mono_fail.append(tag)
            if any(_covers(sys, N, supp) and e != 0 for N, e in enumerate(errs)):
                cover_fail.append(tag)
            if any(_covers(sys, N - 1, supp) and e != 0 for N, e in enumerate(errs)):
                cover_next_fail.append(tag)
        spaces.append({"space": [rank, scale, depth], "points": fs.n, "norm_S": norms,
                       "max_norm_S": max(norms.values())})
    checks = {
        "||S_N|| <= 72 for N = 1..6": bound_ok,
        "partition of unity exact on interior bands": unity_ok,
        "kr_norm(S_N g - g) nonincreasing in N": not mono_fail,
        "error 0 once F_N covers the support": not cover_fail,
    }
    supp = {"error 0 once F_(N-1) covers the support": not cover_next_fail}
    details = {"spaces": spaces, "monotonicity_failures": mono_fail, "cover_failures": cover_fail}
    return _result(4, checks, details, supp)


# -- 5 -------------------------------------------------------------------------

def _quotient_configs(rng: random.Random) -> list[tuple[str, FiniteSpace, list[int]]]:
    from .metric import line_space

    out = [("line 0..3, A = {0, 3}", line_space([0, 1, 2, 3]), [0, 3])]
    for rank, depth, alpha in [(1, 6, 1), (2, 3, 1), (2, 3, 2), (3, 2, 1), (3, 2, 2)]:
        t = TowerSpace.single(rank, "1/4", 0, 1, depth)
        out.append((f"rank {rank} depth {depth}, A = K^({alpha})", truncate(t), derived_indices(t, alpha)))
    two = TowerSpace((Tower(1, "1/4", 0, 1), Tower(2, "1/4", 3, 1)), depth=3)
    out.append(("rank 1 at 0 and rank 2 at 3, A = K'", truncate(two), derived_indices(two, 1)))
    for k in range(3):
        sp = random_space(rng, rng.randint(5, 9))
        A = sorted({sp.base} | set(rng.sample(sp.others(), rng.randint(1, 3))))
        out.append((f"random space {k}", sp, A))
    return out


def criterion_5(seed: int) -> dict:
    rng = random.Random(seed)
    configs = _quotient_configs(rng)
    rows, exact_ok, float_ok, total = [], True, True, 0
    per = 200 // len(configs)
    for name, sp, A in configs:
        r = quotient_isometry_check(sp, A, per, seed)
        f = quotient_isometry_check(sp.to_float(), A, per, seed)
        total += r["molecules"]
        exact_ok = exact_ok and r["ok"] and r["max_discrepancy"] == 0
        float_ok = float_ok and f["ok"]
        rows.append({"config": name, "points": sp.n, "collapsed": len(A), "molecules": r["molecules"],
                     "exact_discrepancy": r["max_discrepancy"], "float_discrepancy": f["max_discrepancy"]})
    checks = {"discrepancy 0 in exact mode": exact_ok, "discrepancy <= 1e-9 in float mode": float_ok,
              "200 molecules": total >= 200}
    return _result(5, checks, {"configs": rows})


# -- 6 -------------------------------------------------------------------------

def _threshold(t) -> tuple[Region, Region]:
    t = Fraction(t)
    return Region([Interval(-INF, t, False, False)]), Region([Interval(t, INF, True, False)])


def partition_suite() -> list[tuple[str, TowerSpace, int, ClopenPartition]]:
    """(name, space, alpha, partition of the alpha-th derived space)."""
    out = []
    two = TowerSpace((Tower(1, "1/4", 0, 1), Tower(1, "1/4", 3, 1)), depth=5)
    out.append(("two rank-1 towers, split at 3/2", two, 1, ClopenPartition(cb_derivative(two, 1), _threshold("3/2"))))
    out.append(("two rank-1 towers, alpha 0", two, 0, ClopenPartition(two, _threshold("3/2"))))
    r2 = TowerSpace.single(2, "1/4", 0, 1, depth=4)
    out.append(("rank 2, anchors split at 1/32", r2, 1, ClopenPartition(cb_derivative(r2, 1), _threshold("1/32"))))
    out.append(("rank 2, top level single part", r2, 2, ClopenPartition(cb_derivative(r2, 2), (Region.everything(),))))
    r3 = TowerSpace.single(3, "1/4", 0, 1, depth=3)
    out.append(("rank 3, alpha 1 split at 1/8", r3, 1, ClopenPartition(cb_derivative(r3, 1), _threshold("1/8"))))
    out.append(("rank 3, alpha 2 split at 1/8", r3, 2, ClopenPartition(cb_derivative(r3, 2), _threshold("1/8"))))
    three = TowerSpace((Tower(1, "1/4", 0, 1), Tower(2, "1/4", 2, 1), Tower(1, "1/4", 4, 1)), depth=3)
    lo, rest = _threshold(1)
    mid, hi = rest.intersect(_threshold(3)[0]), _threshold(3)[1]
    out.append(("three towers, alpha 1", three, 1, ClopenPartition(cb_derivative(three, 1), (lo, mid, hi))))
    return out


def _sandwich_spaces(rng: random.Random):
    out = []
    for name, space, alpha, part in partition_suite():
        if name in ("two rank-1 towers, split at 3/2", "rank 2, anchors split at 1/32", "three towers, alpha 1"):
            lifted = clopen_lift(space, part, alpha)
            out.append((name, truncate(space), tower_partition(space, lifted)))
    r1 = TowerSpace.single(1, "1/4", 0, 1, depth=8)
    lifted = ClopenPartition(r1, _threshold("1/32"))
    out.append(("rank 1, isolated points beyond 1/32 split off", truncate(r1), tower_partition(r1, lifted)))
    sp = random_space(rng, 12, "plane")
    idx = sp.others()
    rng.shuffle(idx)
    out.append(("random 12-point space", sp, [frozenset([sp.base] + idx[:5]), frozenset(idx[5:])]))
    return out


def criterion_6(seed: int) -> dict:
    rng = random.Random(seed)
    rows, violations = [], 0
    spaces = _sandwich_spaces(rng)
    for k, (name, sp, parts) in enumerate(spaces):
        rep = phi_sandwich_check(sp, parts, 1000, seed + k)
        violations += len(rep["violations"])
        rows.append({"space": name, "points": sp.n, "parts": len(parts), "functions": rep["functions"],
                     "lower_constant": rep["lower_constant"], "worst_ratio": rep["worst_ratio"],
                     "worst_witness": rep["worst_witness"], "violations": rep["violations"][:3]})
    return _result(6, {"zero sandwich violations": violations == 0, "5 partitioned spaces": len(spaces) == 5},
                   {"spaces": rows})


# -- 7 -------------------------------------------------------------------------

def criterion_7(seed: int) -> dict:
    rng = random.Random(seed)
    norm_bad, agree_bad = [], []
    for k in range(100):
        sp = random_space(rng, rng.randint(2, 10))
        sub = sorted({sp.base} | set(rng.sample(sp.others(), rng.randint(0, sp.n - 1))))
        f = restrict(random_lipfn(rng, sp), sub)
        ext = extend_infconv(f, sp)
        if brute_lip_norm(sp, ext.values) != brute_lip_norm(f.space, f.values):
            norm_bad.append(k)
        if restrict(ext, sub).values != f.values:
            agree_bad.append(k)
    checks = {"lip_norm preserved exactly": not norm_bad, "extension agrees on the subset": not agree_bad}
    return _result(7, checks, {"instances": 100, "norm_failures": norm_bad, "agreement_failures": agree_bad})


# -- 8 -------------------------------------------------------------------------

def criterion_8(seed: int) -> dict:
    mism = []
    cases = 0
    for t in _towers():
        fs, keys = truncate_with_keys(t)
        for alpha in range(t.rank + 2):
            upper = cb_derivative(t, alpha)
            symbolic = {fs.coords[i] for i, k in enumerate(keys) if upper.contains_key(k)}
            brute = brute_derived(t, t.depth, alpha)
            cases += 1
            if symbolic != brute:
                mism.append({"space": t.to_json(), "alpha": alpha})
    lift_bad = []
    for name, space, alpha, part in partition_suite():
        lifted = clopen_lift(space, part, alpha)
        problems = lifted.problems()
        fs, keys = truncate_with_keys(space)
        dfs, dkeys = truncate_with_keys(cb_derivative(space, alpha), space.depth)
        wanted = materialize(part, dkeys, dfs.coords)
        for i, region in enumerate(lifted.parts):
            got = brute_derived(space, space.depth, alpha, member=region.contains)
            want = {dfs.coords[j] for j in wanted[i]}
            if got != want:
                problems.append(f"part {i}: derived set differs")
        if problems:
            lift_bad.append({"partition": name, "problems": problems})
    checks = {"symbolic derivative = brute force": not mism, "lifted parts satisfy G_i^(alpha) = F_i": not lift_bad}
    return _result(8, checks, {"derivative_cases": cases, "mismatches": mism,
                               "partitions": len(partition_suite()), "lift_failures": lift_bad})


# -- driver -------------------------------------------------------------------------

CRITERIA: dict[int, Callable[[int], dict]] = {
    1: criterion_1, 2: criterion_2, 3: criterion_3, 4: criterion_4,
    5: criterion_5, 6: criterion_6, 7: criterion_7, 8: criterion_8,
}


def run_suite(seed: int = 0, only=None) -> tuple[dict, dict]:
    """(report, timings in seconds).  Criterion 9 compares two runs and lives in ``run_acceptance``."""
    results, timings = [], {}
    for num, fn in CRITERIA.items():
        if only is not None and num not in only:
            continue
        t0 = time.perf_counter()
        results.append(fn(seed))
        timings[num] = time.perf_counter() - t0
    return {"seed": seed, "criteria": results}, timings


def run_acceptance(seed: int = 0) -> tuple[dict, dict]:
    """All nine criteria; the suite runs twice and the canonical bytes are compared."""
    first, timings = run_suite(seed)
    second, _ = run_suite(seed)
    a, b = report.dumps(first), report.dumps(second)
    first["criteria"].append(_result(9, {"byte-identical reports": a == b}, {"bytes": len(a)}))
    first["passed"] = all(r["passed"] for r in first["criteria"])
    return first, timings


def summary_lines(rep: dict) -> list[str]:
    lines = []
    for r in rep["criteria"]:
        tag = "PASS" if r["passed"] else "FAIL"
        bad = [k for k, v in r["checks"].items() if not v]
        line = f"[{tag}] criterion {r['criterion']}: {r['title']}"
        if bad:
            line += " -- failed: " + "; ".join(bad)
        lines.append(line)
        for k, v in r.get("supplementary", {}).items():
            lines.append(f"    [{'PASS' if v else 'FAIL'}] supplementary: {k}")
    return lines
