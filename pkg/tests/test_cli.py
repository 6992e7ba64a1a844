import json
import subprocess
import sys

import pytest

from freelip.cli import run

NORM = {"cmd": "norm", "space": {"finite": {"points": ["0", "1", "2"], "dist": [[0, 1, 2], [1, 0, 1], [2, 1, 0]]}},
        "molecule": {"1": 1, "2": 1}}


def _run(tmp_path, cfg, *extra):
    path = tmp_path / "cfg.json"
    path.write_text(cfg if isinstance(cfg, str) else json.dumps(cfg))
    return run(["--config", str(path), *extra])


def _payload(capsys):
    return json.loads(capsys.readouterr().out)


def test_norm(tmp_path, capsys):
    assert _run(tmp_path, NORM) == 0
    out = _payload(capsys)
    assert out["ok"] and out["result"]["kr_norm"] == 3 and out["seed"] == 0


def test_opnorm_diagonal(tmp_path, capsys):
    cfg = {"cmd": "opnorm", "space": {"finite": {"points": ["0", "x"], "dist": [[0, 1], [1, 0]]}},
           "diagonal": {"x": 2}}
    assert _run(tmp_path, cfg) == 0
    assert _payload(capsys)["result"]["operator_norm"] == 2


def test_qdist(tmp_path, capsys):
    d = [[abs(i - j) for j in range(4)] for i in range(4)]
    cfg = {"cmd": "qdist", "space": {"finite": {"points": ["0", "1", "2", "3"], "dist": d}},
           "molecule": {"1": 1}, "subset": ["3"]}
    assert _run(tmp_path, cfg) == 0
    res = _payload(capsys)["result"]
    assert res["quotient_distance"] == res["quotient_space_norm"] == 1


def test_separate_ok_and_overlap(tmp_path, capsys):
    cfg = {"cmd": "separate", "space": {"tower": {"rank": 1, "ratio": "1/2", "scale": 2, "depth": 8}},
           "x": "0:1", "y": "0:2", "verify_depth": 20}
    assert _run(tmp_path, cfg) == 0
    assert _payload(capsys)["result"]["verification"]["ok"]
    bad = {"cmd": "separate", "space": {"tower": {"rank": 2, "depth": 6}}, "x": "0:3", "y": "0:1"}
    assert _run(tmp_path, bad) == 1
    assert "overlap" in _payload(capsys)["result"]
    assert _run(tmp_path, dict(bad, overlap="merge")) == 0


def test_kalton_writes_tables(tmp_path):
    cfg = {"cmd": "kalton", "space": {"tower": {"rank": 1, "depth": 8}}, "N": [1, 2], "mesh": ["1/8"]}
    out = tmp_path / "out"
    assert _run(tmp_path, cfg, "--out", str(out)) == 0
    assert {p.name for p in out.iterdir()} == {"kalton.json", "convergence.csv", "s_convergence.csv"}
    assert (out / "convergence.csv").read_text().startswith("N,mesh,molecule,error_Q\n")


def test_decompose_and_quotient_check(tmp_path, capsys):
    dec = {"cmd": "decompose", "samples": 20,
           "space": {"towers": [{"rank": 1, "anchor": 0}, {"rank": 1, "anchor": 3}], "depth": 4},
           "partition": {"alpha": 1, "parts": [[{"lo": "-inf", "hi": "3/2"}], [{"lo": "3/2", "hi": "inf"}]]}}
    assert _run(tmp_path, dec) == 0
    assert len(_payload(capsys)["result"]["parts"]) == 2
    qc = {"cmd": "quotient-check", "space": {"tower": {"rank": 2, "depth": 3}}, "subset": {"derived": 1},
          "samples": 10}
    assert _run(tmp_path, qc) == 0
    assert _payload(capsys)["result"]["ok"]


def test_cb(tmp_path, capsys):
    assert _run(tmp_path, {"cmd": "cb", "space": {"tower": {"rank": 3, "depth": 3}}, "steps": 2}) == 0
    res = _payload(capsys)["result"]
    assert res["rank"] == 3 and res["brute_force_agrees"]


@pytest.mark.parametrize("cfg, message", [
    ('{"cmd": "norm",', "invalid JSON at line 1"),
    ({"cmd": "frobnicate"}, "unknown subcommand"),
    ({"cmd": "norm", "space": {"tower": {"rank": "two"}}, "molecule": {}},
     "config.space.tower.rank: 'two' is not of type 'integer'"),
    ({"cmd": "norm", "space": {"finite": {"dist": [[0, 1, 5], [1, 0, 1], [5, 1, 0]]}}, "molecule": {"1": 1}},
     "not a metric"),
    ({"cmd": "norm", "space": {"finite": {"dist": [[0, 1], [1, 0]]}}, "molecule": {"7": 1}}, "unknown point"),
    ({"cmd": "kalton", "space": {"tower": {"rank": 1}}, "mesh": [0]}, "mesh must be positive"),
    ([1, 2], "expected a JSON object"),
])
def test_config_errors(tmp_path, capsys, cfg, message):
    assert _run(tmp_path, cfg) == 2
    err = capsys.readouterr().err
    assert message in err


def test_missing_config_file(tmp_path, capsys):
    assert run(["--config", str(tmp_path / "nope.json")]) == 2
    assert "cannot read config" in capsys.readouterr().err


def test_negative_seed(tmp_path, capsys):
    assert _run(tmp_path, NORM, "--seed", "-1") == 2


def test_repeated_runs_are_byte_identical(tmp_path):
    cfg = {"cmd": "decompose", "samples": 15,
           "space": {"towers": [{"rank": 2, "anchor": 0}, {"rank": 1, "anchor": 3}], "depth": 3},
           "partition": {"alpha": 0, "parts": [[{"lo": "-inf", "hi": "3/2"}], [{"lo": "3/2", "hi": "inf"}]]}}
    path = tmp_path / "cfg.json"
    path.write_text(json.dumps(cfg))
    outs = []
    for k in range(2):
        d = tmp_path / f"o{k}"
        assert run(["--config", str(path), "--out", str(d), "--seed", "7"]) == 0
        outs.append({p.name: p.read_bytes() for p in d.iterdir()})
    assert outs[0] == outs[1]


def test_console_entry_point_reads_stdin():
    proc = subprocess.run([sys.executable, "-m", "freelip.cli", "--config", "-"], input=json.dumps(NORM),
                          capture_output=True, text=True)
    assert proc.returncode == 0
    assert json.loads(proc.stdout)["result"]["kr_norm"] == 3
