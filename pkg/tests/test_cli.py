import csv
import json
import subprocess
import sys

import pytest

from pencils.cli import main
from pencils.pipeline import report_schema


def run(*argv):
    return main([str(a) for a in argv])


def test_run_writes_valid_report(tmp_path):
    import jsonschema
    out = tmp_path / "r.json"
    assert run("run", "--space", "gen:grid2d:8", "--source", 0, "--target", 63, "--scale", 3, "--out", out) == 0
    jsonschema.validate(json.loads(out.read_text()), report_schema())


def test_run_dumps_then_verify_pc(tmp_path):
    p, c = tmp_path / "p.json", tmp_path / "c.json"
    assert run("run", "--space", "gen:grid2d:8", "--source", 0, "--target", 63, "--scale", 3,
               "--out", tmp_path / "r.json", "--pencil-out", p, "--current-out", c) == 0
    cur = json.loads(c.read_text())
    assert cur["boundary"] == {"0": "-1/1", "63": "1/1"}
    assert {"x", "y", "length", "weight"} == set(cur["segments"][0])
    out = tmp_path / "pc.json"
    assert run("verify-pc", "--pencil", p, "--space", "gen:grid2d:8", "--g", "random:5", "--out", out) == 0
    res = json.loads(out.read_text())
    assert len(res["tests"]) == 5 and res["passed"]
    assert run("verify-pc", "--pencil", p, "--space", "gen:grid2d:8", "--max-ratio", 1e-6, "--out", out) == 2


def test_verify_pc_with_g_file(tmp_path):
    p = tmp_path / "p.json"
    run("run", "--space", "gen:grid2d:4", "--source", 0, "--target", 15, "--scale", 2,
        "--out", tmp_path / "r.json", "--pencil-out", p)
    g = tmp_path / "g.json"
    g.write_text(json.dumps([1.0] * 16))
    assert run("verify-pc", "--pencil", p, "--space", "gen:grid2d:4", "--g", g, "--out", tmp_path / "o.json") == 0
    g.write_text(json.dumps([1.0] * 3))
    assert run("verify-pc", "--pencil", p, "--space", "gen:grid2d:4", "--g", g) == 1


def test_verify_pc_rejects_foreign_pencil(tmp_path):
    p = tmp_path / "p.json"
    p.write_text(json.dumps({"curves": [{"path": [0, 99], "weight_num": 1, "weight_den": 1, "length": 1}],
                             "normalized": True}))
    assert run("verify-pc", "--pencil", p, "--space", "gen:grid2d:4") == 1


def test_verify_pi_json_and_csv(tmp_path):
    out, table = tmp_path / "pi.json", tmp_path / "pi.csv"
    assert run("verify-pi", "--space", "gen:grid2d:8", "--num-tests", 12, "--out", out, "--csv", table) == 0
    rows = list(csv.DictReader(table.open()))
    assert len(rows) == 12 and set(rows[0]) == {"center", "radius", "lhs", "rhs", "ratio"}
    assert json.loads(out.read_text())["oscillation_violations"] == 0


def test_dump_graph_format(tmp_path):
    out = tmp_path / "g.json"
    assert run("dump-graph", "--space", "gen:grid2d:4", "--source", 0, "--target", 15, "--scale", 2, "--out", out) == 0
    g = json.loads(out.read_text())
    i, j, num, den, length = g["edges"][0]
    assert i < j and num > 0 and den > 0 and length > 0


def test_sweep_summary(tmp_path):
    out = tmp_path / "s.json"
    assert run("sweep", "--space", "gen:grid2d:8", "--source", 0, "--target", 63,
               "--nmin", 2, "--nmax", 3, "--out", out) == 0
    data = json.loads(out.read_text())
    assert set(data["reports"]) == {"2", "3"} and data["summary"]["min_cut_floor"] > 0


def test_disconnected_exit_code(tmp_path):
    assert run("run", "--space", "gen:dumbbell:4,0.1,3", "--source", 0, "--target", 34,
               "--scale", 6, "--out", tmp_path / "r.json") == 2


@pytest.mark.parametrize("argv", [
    ["run", "--space", "gen:grid2d:4", "--source", "0", "--target", "15"],
    ["run", "--space", "gen:bogus:4", "--source", "0", "--target", "1", "--scale", "1"],
    ["run", "--space", "gen:grid2d:4", "--source", "0", "--target", "99", "--scale", "1"],
    ["frobnicate"],
])
def test_input_errors_exit_one(argv, capsys):
    with pytest.raises(SystemExit) as err:
        code = main(argv)
        raise SystemExit(code)
    assert err.value.code == 1


def test_console_script_entry_point(tmp_path):
    proc = subprocess.run([sys.executable, "-m", "pencils.cli", "run", "--space", "gen:line:5", "--source", "0",
                           "--target", "4", "--scale", "2"], capture_output=True, text=True)
    assert proc.returncode == 0
    assert json.loads(proc.stdout)["status"] == "ok"
