import csv
import json
import math
import subprocess
import sys

import pytest

from clwn import checks, cli


def run(tmp_path, command, cfg, *extra):
    path = tmp_path / f"{command}.json"
    path.write_text(json.dumps(cfg))
    return cli.main([command, "--config", str(path), "--output", str(tmp_path / "out"), *extra])


CHORDAL = {"driving": 0, "seeds": [[0, 3], "0+2i", [1, 1]], "t_end": 1.5}
SURFACE = {"generators": [[-2, -1, 9], [1, 2, 9]], "base_triple": [3, 5, -4], "c": 4, "driving": 0,
           "t_end": 0.005, "mesh_dt": 0.001, "seeds": [[0, 2], [1, 1]], "max_word_length": 4}


def rows(path):
    with open(path) as fh:
        return list(csv.DictReader(fh))


def test_chordal_output(tmp_path):
    assert run(tmp_path, "simulate-chordal", dict(CHORDAL, t_end=1.0)) == 0
    r = [x for x in rows(tmp_path / "out" / "chordal.csv") if x["seed_im"] == "3"]
    last = r[-1]
    assert float(last["t"]) == 1.0
    assert abs(complex(float(last["g_re"]), float(last["g_im"])) - 1j * math.sqrt(5)) < 1e-6


def test_chordal_swallow_reported(tmp_path):
    assert run(tmp_path, "simulate-chordal", CHORDAL) == 0
    summary = json.loads((tmp_path / "out" / "chordal_summary.json").read_text())
    text = json.dumps(summary)
    assert "swallow" in text


def test_idempotent(tmp_path):
    a, b = tmp_path / "a", tmp_path / "b"
    a.mkdir(), b.mkdir()
    assert run(a, "simulate-surface", SURFACE) == 0
    assert run(b, "simulate-surface", SURFACE) == 0
    names = sorted(p.name for p in (a / "out").iterdir())
    assert names == sorted(p.name for p in (b / "out").iterdir())
    for n in names:
        assert (a / "out" / n).read_bytes() == (b / "out" / n).read_bytes()


def test_missing_key(tmp_path, capsys):
    assert run(tmp_path, "simulate-chordal", {"seeds": [[0, 1]]}) == 2
    err = json.loads(capsys.readouterr().err.strip().splitlines()[-1])
    assert err["key"] == "t_end" and err["exit_code"] == 2


def test_unknown_key(tmp_path, capsys):
    assert run(tmp_path, "simulate-chordal", {"seeds": [[0, 1]], "t_end": 1, "foo": 2}) == 2
    assert "foo" in capsys.readouterr().err


def test_bad_complex(tmp_path, capsys):
    assert run(tmp_path, "simulate-chordal", {"seeds": ["nonsense"], "t_end": 1}) == 2
    assert "seeds" in capsys.readouterr().err


def test_bad_flag():
    assert cli.main(["simulate-chordal", "--no-such-flag"]) == 2


def test_guard_trip_exit(tmp_path, capsys):
    assert run(tmp_path, "simulate-surface", dict(SURFACE, base_triple=[-1, 5, 3])) == 3
    err = json.loads(capsys.readouterr().err.strip().splitlines()[-1])
    assert err["error"] == "GuardTripped" and "margins" in err


def test_check_fail_exit(tmp_path, monkeypatch):
    def failing():
        return checks.CheckResult("always fails", False, 0.0, 1.0, {})
    monkeypatch.setitem(checks.SUITES, "chordal", (failing,))
    assert run(tmp_path, "check", {}, "--suite", "chordal") == 4


def test_check_annulus_suite(tmp_path, capsys):
    assert run(tmp_path, "check", {}, "--suite", "annulus") == 0
    out = capsys.readouterr().out
    assert out.count("PASS") == 3
    res = json.loads((tmp_path / "out" / "check_annulus.json").read_text())
    assert all(r["passed"] for r in res) and all("runtime" not in r for r in res)


def test_env_precedence(tmp_path, monkeypatch):
    cfg = dict(CHORDAL, t_end=0.1, output_dir=str(tmp_path / "cfg"))
    path = tmp_path / "c.json"
    path.write_text(json.dumps(cfg))
    monkeypatch.setenv("CLWN_OUTPUT", str(tmp_path / "env"))
    assert cli.main(["simulate-chordal", "--config", str(path)]) == 0
    assert (tmp_path / "env" / "chordal.csv").exists() and not (tmp_path / "cfg").exists()
    assert cli.main(["simulate-chordal", "--config", str(path), "--output", str(tmp_path / "flag")]) == 0
    assert (tmp_path / "flag" / "chordal.csv").exists()


def test_bad_env_threads(tmp_path, monkeypatch):
    monkeypatch.setenv("CLWN_THREADS", "many")
    assert run(tmp_path, "simulate-chordal", dict(CHORDAL, t_end=0.1)) == 2


def test_svg(tmp_path):
    assert run(tmp_path, "simulate-chordal", CHORDAL, "--svg") == 0
    svg = (tmp_path / "out" / "chordal.svg").read_text()
    assert svg.startswith("<svg") and svg.count("<polyline") == 3


def test_enumerate_group(tmp_path):
    cfg = {"generators": [[-2, -1, 9], [1, 2, 9]], "max_word_length": 2}
    assert run(tmp_path, "enumerate-group", cfg) == 0
    assert len(rows(tmp_path / "out" / "group_ball.csv")) == 17


def test_eval_field_dump(tmp_path):
    cfg = {"generators": [[-2, -1, 9], [1, 2, 9]], "xi": 0, "c": 4, "points": [[0, 1], [0.5, 1]],
           "velocities": {"sl2": [list(map(list, x)) for x in checks.TEST_PERTURBATION]}}
    assert run(tmp_path, "eval-field", cfg, "--dump-system") == 0
    assert len(rows(tmp_path / "out" / "field.csv")) == 2
    assert (tmp_path / "out" / "delta_system.json").exists()


def test_export_driving(tmp_path):
    cfg = {"driving": {"type": "sle", "kappa": 4, "seed": 7, "dt": 0.01}, "t_end": 0.1}
    assert run(tmp_path, "export-driving", cfg) == 0
    r = rows(tmp_path / "out" / "driving.csv")
    assert len(r) == 11 and float(r[0]["xi"]) == 0.0


def test_entry_point(tmp_path):
    p = subprocess.run([sys.executable, "-m", "clwn.cli", "enumerate-group", "--output", str(tmp_path)],
                       capture_output=True, text=True)
    assert p.returncode == 2 and "generators" in p.stderr
