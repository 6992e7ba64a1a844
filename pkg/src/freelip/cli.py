"""Command line front door: one JSON config in, JSON/CSV reports out.

Exit status: 0 when every invariant held, 1 when a check failed, 2 for a
malformed config or bad usage.
"""

from __future__ import annotations

import argparse
import json
import sys
from pathlib import Path
from typing import Any

import jsonschema

from . import report
from .decomposition import (derived_indices, l1_sum_check, phi_sandwich_check, quotient_isometry_check,
                            tower_partition)
from .free_space import FreeOperator, Molecule, SolverDisagreement, attaining_function, kr_norm, operator_norm
from .kalton import bap_experiment, convergence_csv_rows, s_convergence_csv_rows
from .metric import FiniteSpace, MetricError, validate_metric
from .numbers import parse_scalar
from .oracles import brute_derived
from .partition import ClopenPartition, PartitionError, clopen_lift
from .regions import Region
from .separator import PlateauOverlapError, SeparatorError, separate, verify_certificate
from .suite import run_acceptance, summary_lines
from .towers import TowerSpace, cb_derivative, cb_rank, parse_point, point_id, truncate_with_keys

COMMANDS = ("norm", "opnorm", "qdist", "separate", "kalton", "decompose", "quotient-check", "cb", "suite")


class ConfigError(ValueError):
    pass


_NUMBER = {"anyOf": [{"type": "number"}, {"type": "string"}]}
_TOWER = {
    "type": "object",
    "required": ["rank"],
    "properties": {"rank": {"type": "integer", "minimum": 0}, "ratio": _NUMBER, "anchor": _NUMBER,
                   "scale": _NUMBER, "depth": {"type": "integer", "minimum": 1}},
}
_SPACE = {
    "type": "object",
    "oneOf": [
        {"required": ["finite"], "properties": {"finite": {
            "type": "object", "required": ["dist"],
            "properties": {"points": {"type": "array"}, "dist": {"type": "array", "items": {"type": "array"}},
                           "base": {"type": "integer", "minimum": 0}}}}},
        {"required": ["tower"], "properties": {"tower": _TOWER}},
        {"required": ["towers"], "properties": {"towers": {"type": "array", "items": _TOWER, "minItems": 1},
                                                "depth": {"type": "integer", "minimum": 1}}},
    ],
}
_MOLECULE = {"type": "object", "additionalProperties": _NUMBER}
_POINTS = {"type": "array", "items": {"anyOf": [{"type": "string"}, {"type": "integer"}, {"type": "array"}]}}

SCHEMAS = {
    "norm": {"required": ["space", "molecule"], "properties": {"space": _SPACE, "molecule": _MOLECULE}},
    "opnorm": {"required": ["space"], "properties": {
        "space": _SPACE, "matrix": {"type": "array", "items": {"type": "array", "items": _NUMBER}},
        "diagonal": _MOLECULE, "method": {"enum": ["primal", "dual", "both"]}},
        "oneOf": [{"required": ["matrix"]}, {"required": ["diagonal"]}]},
    "qdist": {"required": ["space", "molecule", "subset"], "properties": {
        "space": _SPACE, "molecule": _MOLECULE, "subset": _POINTS}},
    "separate": {"required": ["space", "x", "y"], "properties": {
        "space": _SPACE, "overlap": {"enum": ["raise", "merge"]},
        "verify_depth": {"type": "integer", "minimum": 1}}},
    "kalton": {"required": ["space"], "properties": {
        "space": _SPACE, "N": {"type": "array", "items": {"type": "integer", "minimum": 0}},
        "mesh": {"type": "array", "items": _NUMBER}, "molecules": {"type": "integer", "minimum": 1}}},
    "decompose": {"required": ["space", "partition"], "properties": {
        "space": _SPACE, "samples": {"type": "integer", "minimum": 0},
        "partition": {"anyOf": [
            {"type": "array", "items": _POINTS},
            {"type": "object", "required": ["parts"], "properties": {
                "alpha": {"type": "integer", "minimum": 0}, "parts": {"type": "array"}}}]}}},
    "quotient-check": {"required": ["space", "subset"], "properties": {
        "space": _SPACE, "samples": {"type": "integer", "minimum": 1},
        "subset": {"anyOf": [_POINTS, {"type": "object", "required": ["derived"],
                                       "properties": {"derived": {"type": "integer", "minimum": 0}}}]}}},
    "cb": {"required": ["space"], "properties": {"space": _SPACE, "steps": {"type": "integer", "minimum": 0}}},
    "suite": {"properties": {"name": {"enum": ["acceptance"]}}},
}


def validate_config(cfg: Any) -> None:
    if not isinstance(cfg, dict):
        raise ConfigError("config: expected a JSON object")
    cmd = cfg.get("cmd")
    if cmd not in COMMANDS:
        raise ConfigError(f"config.cmd: unknown subcommand {cmd!r} (choose from {', '.join(COMMANDS)})")
    schema = dict(SCHEMAS[cmd], type="object")
    e = jsonschema.exceptions.best_match(jsonschema.Draft7Validator(schema).iter_errors(cfg))
    if e is not None:
        # descend into oneOf/anyOf branches so the message names the offending field
        while e.context:
            e = jsonschema.exceptions.best_match(e.context)
        where = "config" + "".join(f"[{p!r}]" if isinstance(p, int) else f".{p}" for p in e.absolute_path)
        raise ConfigError(f"{where}: {e.message}")


# -- spaces and points ------------------------------------------------------------------

def _tower(cfg: dict, depth: int | None) -> TowerSpace:
    body = dict(cfg["space"])
    if depth is not None:
        if "tower" in body:
            body["tower"] = dict(body["tower"], depth=depth)
        else:
            body["depth"] = depth
    try:
        return TowerSpace.from_json(body)
    except (MetricError, ValueError, ZeroDivisionError) as exc:
        raise ConfigError(f"config.space: {exc}") from None


def _is_tower(cfg: dict) -> bool:
    return "tower" in cfg["space"] or "towers" in cfg["space"]


def load_space(cfg: dict, rational: bool, depth: int | None):
    """(finite space, tower or None, tower keys or None)."""
    if _is_tower(cfg):
        t = _tower(cfg, depth)
        fs, keys = truncate_with_keys(t)
        return fs, t, keys
    try:
        fs = FiniteSpace.from_json(cfg["space"], rational=rational)
    except (MetricError, ValueError, TypeError, ZeroDivisionError) as exc:
        raise ConfigError(f"config.space.finite: {exc}") from None
    rep = validate_metric(fs)
    if not rep.valid:
        raise ConfigError(f"config.space.finite: not a metric: {rep.violations[0]}")
    return fs, None, None


def _index(fs: FiniteSpace, tower, keys, p, where: str) -> int:
    if tower is not None:
        try:
            key = parse_point(tower, p)
        except (KeyError, ValueError) as exc:
            raise ConfigError(f"{where}: {exc}") from None
        if key not in keys:
            raise ConfigError(f"{where}: point {p!r} lies beyond the truncation depth")
        return keys.index(key)
    for i, q in enumerate(fs.points):
        if q == p or str(q) == str(p):
            return i
    raise ConfigError(f"{where}: unknown point {p!r}")


def _molecule(cfg: dict, fs, tower, keys, rational: bool) -> Molecule:
    coeff = {}
    for p, v in cfg["molecule"].items():
        i = _index(fs, tower, keys, p, f"config.molecule.{p}")
        coeff[i] = parse_scalar(v, rational or fs.exact)
    return Molecule(fs, coeff)


def _subset(cfg: dict, fs, tower, keys, key: str = "subset") -> list[int]:
    spec = cfg[key]
    if isinstance(spec, dict):
        if tower is None:
            raise ConfigError(f"config.{key}.derived: derived sets need a tower space")
        return derived_indices(tower, spec["derived"])
    idx = {_index(fs, tower, keys, p, f"config.{key}[{k}]") for k, p in enumerate(spec)}
    return sorted(idx | {fs.base})


# -- commands ---------------------------------------------------------------------------

def cmd_norm(cfg, args):
    fs, t, keys = load_space(cfg, args.rational, args.depth)
    m = _molecule(cfg, fs, t, keys, args.rational)
    value = kr_norm(m, "both")
    out = {"kr_norm": value, "points": list(fs.points)}
    if not m.is_zero():
        out["attaining"] = attaining_function(m).to_json()
    return out, True, {}


def cmd_opnorm(cfg, args):
    fs, t, keys = load_space(cfg, args.rational, args.depth)
    if "diagonal" in cfg:
        w = [0] * fs.n
        for p, v in cfg["diagonal"].items():
            w[_index(fs, t, keys, p, f"config.diagonal.{p}")] = parse_scalar(v, args.rational or fs.exact)
        T = FreeOperator.diagonal(fs, w)
    else:
        rows = cfg["matrix"]
        if len(rows) != fs.n or any(len(r) != fs.n for r in rows):
            raise ConfigError(f"config.matrix: expected a {fs.n}x{fs.n} matrix")
        T = FreeOperator(fs, fs, [[parse_scalar(v, args.rational or fs.exact) for v in r] for r in rows])
    value, wit = operator_norm(T, cfg.get("method", "both"), return_witness=True)
    pair = None if wit is None else [fs.points[wit[0]], fs.points[wit[1]]]
    return {"operator_norm": value, "witness_pair": pair, "points": list(fs.points)}, True, {}


def cmd_qdist(cfg, args):
    fs, t, keys = load_space(cfg, args.rational, args.depth)
    m = _molecule(cfg, fs, t, keys, args.rational)
    A = _subset(cfg, fs, t, keys)
    rep = quotient_isometry_check(fs, A, 0, args.seed, molecules=[m])
    lhs, rhs = rep["rows"][0][1], rep["rows"][0][2]
    out = {"quotient_distance": lhs, "quotient_space_norm": rhs, "discrepancy": rep["max_discrepancy"],
           "collapsed": rep["collapsed"]}
    return out, rep["ok"], {}


def cmd_separate(cfg, args):
    t = _tower(cfg, args.depth)
    try:
        x, y = parse_point(t, cfg["x"]), parse_point(t, cfg["y"])
    except (KeyError, ValueError) as exc:
        raise ConfigError(f"config.x/y: {exc}") from None
    try:
        cert = separate(t, x, y, cfg.get("overlap", "raise"))
    except PlateauOverlapError as exc:
        return {"error": str(exc), "overlap": exc.config}, False, {}
    except SeparatorError as exc:
        raise ConfigError(f"config: {exc}") from None
    depth = cfg.get("verify_depth", t.depth + 10)
    rep = verify_certificate(cert, depth)
    return {"certificate": cert.to_json(), "verification": rep.to_json(), "verify_depth": depth}, rep.ok, {}


def cmd_kalton(cfg, args):
    fs, _, _ = load_space(cfg, args.rational, args.depth)
    Ns = cfg.get("N", [1, 2, 3, 4, 5, 6])
    meshes = [parse_scalar(v, fs.exact) for v in cfg.get("mesh", ["1/8"])]
    if any(not m > 0 for m in meshes):
        raise ConfigError("config.mesh: every mesh must be positive")
    from .kalton import molecule_battery

    mols = molecule_battery(fs, args.seed, cfg.get("molecules", 9))
    rep = bap_experiment(fs, Ns, meshes, args.seed, mols)
    tables = {"convergence.csv": convergence_csv_rows(rep), "s_convergence.csv": s_convergence_csv_rows(rep)}
    return rep, rep["kalton_bound_holds"], tables


def _partition(cfg, fs, t, keys):
    spec = cfg["partition"]
    if isinstance(spec, list):
        parts = [frozenset(_index(fs, t, keys, p, f"config.partition[{k}][{j}]") for j, p in enumerate(part))
                 for k, part in enumerate(spec)]
        return parts
    if t is None:
        raise ConfigError("config.partition: region partitions need a tower space")
    alpha = spec.get("alpha", 0)
    try:
        regions = tuple(Region.from_json(p) for p in spec["parts"])
        lifted = clopen_lift(t, ClopenPartition(cb_derivative(t, alpha), regions), alpha)
    except (PartitionError, KeyError, ValueError, TypeError) as exc:
        raise ConfigError(f"config.partition: {exc}") from None
    return tower_partition(t, lifted)


def cmd_decompose(cfg, args):
    fs, t, keys = load_space(cfg, args.rational, args.depth)
    parts = _partition(cfg, fs, t, keys)
    n = cfg.get("samples", 200)
    try:
        sand = phi_sandwich_check(fs, parts, n, args.seed)
        l1 = l1_sum_check(fs, parts, n, args.seed)
    except ValueError as exc:
        raise ConfigError(f"config.partition: {exc}") from None
    ok = not sand["violations"] and not l1["violations"]
    tables = {"sandwich.csv": [["f", "lip_norm", "phi_norm", "ratio"]] + sand.pop("rows"),
              "l1_sum.csv": [["molecule", "norm", "sum_of_parts", "ratio"]] + l1.pop("rows")}
    return {"parts": [sorted(fs.points[i] for i in p) for p in parts], "sandwich": sand, "l1_sum": l1}, ok, tables


def cmd_quotient_check(cfg, args):
    fs, t, keys = load_space(cfg, args.rational, args.depth)
    A = _subset(cfg, fs, t, keys)
    rep = quotient_isometry_check(fs, A, cfg.get("samples", 200), args.seed)
    tables = {"quotient.csv": [["molecule", "quotient_distance", "quotient_space_norm", "discrepancy"]]
              + rep.pop("rows")}
    return rep, rep["ok"], tables


def cmd_cb(cfg, args):
    t = _tower(cfg, args.depth)
    steps = cfg.get("steps", 1)
    der = cb_derivative(t, steps)
    fs, keys = truncate_with_keys(t)
    pts = [i for i, k in enumerate(keys) if der.contains_key(k)]
    brute = brute_derived(t, t.depth, steps)
    agree = {fs.coords[i] for i in pts} == brute
    out = {"rank": cb_rank(t), "steps": steps, "derived": der.to_json(),
           "derived_points": [point_id(t, keys[i]) for i in pts], "brute_force_agrees": agree}
    return out, agree, {}


def cmd_suite(cfg, args):
    rep, timings = run_acceptance(args.seed)
    for line in summary_lines(rep):
        print(line, file=sys.stderr)
    for k, v in timings.items():
        print(f"    criterion {k}: {v:.1f} s", file=sys.stderr)
    return rep, rep["passed"], {}


HANDLERS = {
    "norm": cmd_norm, "opnorm": cmd_opnorm, "qdist": cmd_qdist, "separate": cmd_separate,
    "kalton": cmd_kalton, "decompose": cmd_decompose, "quotient-check": cmd_quotient_check,
    "cb": cmd_cb, "suite": cmd_suite,
}


def build_parser() -> argparse.ArgumentParser:
    p = argparse.ArgumentParser(prog="freelip", description=__doc__.splitlines()[0])
    p.add_argument("--config", required=True, help="JSON experiment description (use - for stdin)")
    p.add_argument("--out", help="directory for JSON/CSV artifacts (default: JSON to stdout)")
    p.add_argument("--seed", type=int, default=None, help="seed for every random choice (default: config or 0)")
    p.add_argument("--rational", action="store_true", help="read decimal inputs as exact rationals")
    p.add_argument("--depth", type=int, default=None, help="override the tower truncation depth")
    return p


def run(argv=None) -> int:
    args = build_parser().parse_args(argv)
    try:
        text = sys.stdin.read() if args.config == "-" else Path(args.config).read_text(encoding="utf-8")
    except OSError as exc:
        print(f"error: cannot read config: {exc}", file=sys.stderr)
        return 2
    try:
        cfg = json.loads(text)
    except json.JSONDecodeError as exc:
        print(f"error: config: invalid JSON at line {exc.lineno} column {exc.colno}: {exc.msg}", file=sys.stderr)
        return 2
    try:
        validate_config(cfg)
        if args.seed is None:
            args.seed = int(cfg.get("seed", 0))
        if args.seed < 0:
            raise ConfigError("--seed must be a non-negative integer")
        if args.depth is not None and args.depth < 1:
            raise ConfigError("--depth must be >= 1")
        result, ok, tables = HANDLERS[cfg["cmd"]](cfg, args)
    except ConfigError as exc:
        print(f"error: {exc}", file=sys.stderr)
        return 2
    except SolverDisagreement as exc:
        print(f"invariant violated: {exc}", file=sys.stderr)
        return 1
    payload = {"cmd": cfg["cmd"], "seed": args.seed, "ok": bool(ok), "result": result}
    if args.out:
        out = Path(args.out)
        report.write_json(out / f"{cfg['cmd']}.json", payload)
        for name, rows in tables.items():
            report.write_csv(out / name, rows)
    else:
        sys.stdout.write(report.dumps(payload))
    if not ok:
        print("invariant violated: see the report", file=sys.stderr)
    return 0 if ok else 1


def main() -> None:
    sys.exit(run())


if __name__ == "__main__":
    main()
