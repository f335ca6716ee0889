import json
import subprocess
import sys

import pytest

from borelkit.cli import dispatch


def run(capsys, *argv):
    code = dispatch(list(argv))
    out, err = capsys.readouterr()
    return code, out, err


def report(capsys, *argv):
    code, out, _ = run(capsys, *argv)
    d = json.loads(out)
    assert set(d) == {"tool", "version", "config", "results", "violations"}
    return code, d


def test_c0_fixture_verdict(capsys):
    code, d = report(capsys, "c0", "classify", "--fixture", "e0")
    assert code == 0 and d["results"][0]["verdict"] == "E0like"


def test_usage_errors_exit_2(capsys):
    assert run(capsys, "bogus")[0] == 2
    assert run(capsys, "tree", "rank", "--tree", "{not json")[0] == 2
    assert run(capsys, "ideal", "classify", "--weights", "{}")[0] == 2
    assert run(capsys, "reduce", "run", "--case", "nope")[0] == 2
    assert run(capsys, "suite", "99")[0] == 2


def test_env_seed(capsys, monkeypatch):
    monkeypatch.setenv("BORELKIT_SEED", "11")
    _, d = report(capsys, "reduce", "run", "--case", "t2_r", "--n", "5")
    assert d["config"]["seed"] == 11
    monkeypatch.setenv("BORELKIT_SEED", "x")
    assert run(capsys, "reduce", "run", "--case", "t2_r", "--n", "5")[0] == 2


def test_output_is_byte_identical(capsys):
    args = ("--seed", "4", "reduce", "run", "--case", "e3_c0", "--n", "20")
    assert run(capsys, *args)[1] == run(capsys, *args)[1]


def test_violations_exit_1(capsys):
    code, d = report(capsys, "reduce", "run", "--case", "e0_e1_faulty", "--n", "60")
    assert code == 1 and d["violations"]


def test_tree_and_game_commands(capsys):
    _, d = report(capsys, "tree", "rank", "--tree", "[[0, 1], [2]]")
    assert d["results"][0]["rank"] == {"exact": 2}
    _, d = report(capsys, "game", "solve", "--X", '[{"u": [0], "s": [1]}]', "--f", "1", "--u", "0")
    assert d["results"][0]["winner"] == "II"


def test_ideal_member(capsys):
    _, d = report(capsys, "ideal", "member", "--ideal", '{"kind": "fin"}',
                  "--set", '{"kind": "periodic", "period": "10"}')
    assert d["results"][0]["verdict"] == "Out"


def test_json_from_file(capsys, tmp_path):
    p = tmp_path / "t.json"
    p.write_text("[[0], [1]]")
    _, d = report(capsys, "tree", "rank", "--tree", f"@{p}")
    assert d["results"][0]["rank"] == {"exact": 1}


def test_out_file_and_koch_csv(capsys, tmp_path):
    dest = tmp_path / "r.json"
    assert run(capsys, "--out", str(dest), "c0", "grainy", "--words", "000,011", "--q", "1/2")[0] == 0
    assert json.loads(dest.read_text())["results"][0]["grainy"] is True
    code, out, _ = run(capsys, "reduce", "koch", "--alpha", "0.6", "--level", "1")
    lines = out.strip().splitlines()
    assert code == 0 and lines[0] == "t,x,y" and len(lines) == 6


def test_f2_round_trip(capsys, tmp_path):
    maps = tmp_path / "maps.json"
    code, d = report(capsys, "f2", "build", "--depth", "6", "--out", str(maps))
    assert code == 0 and maps.exists()
    code, d = report(capsys, "f2", "verify", str(maps))
    assert code == 0 and d["results"][0]["ok"]


def test_suite_lines_go_to_stderr(capsys):
    code, out, err = run(capsys, "--seed", "7", "suite", "1,6")
    assert code == 0
    assert err.splitlines()[0].startswith("[PASS]  1")
    assert [r["criterion"] for r in json.loads(out)["results"]] == [1, 6]


def test_module_entry_point():
    proc = subprocess.run([sys.executable, "-m", "borelkit", "c0", "classify", "--fixture", "e3"],
                          capture_output=True, text=True)
    assert proc.returncode == 0
    assert json.loads(proc.stdout)["results"][0]["verdict"] == "E3like"
