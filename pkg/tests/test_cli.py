from __future__ import annotations

import io
import json
import subprocess
import sys

import pytest

from conftest import DOMAINS
from jsgraph.cli import RunConfig, oracle_rows, run
from jsgraph.errors import InputError


def call(*argv):
    out, err = io.StringIO(), io.StringIO()
    code = run(list(argv), stdout=out, stderr=err)
    return code, out.getvalue(), err.getvalue()


def domain(name):
    return str(DOMAINS / f"{name}.json")


def test_check_scherk_square(tmp_path) -> None:
    code, out, _ = call("check", "--domain", domain("scherk_square"), "--out", str(tmp_path))
    assert code == 0
    rep = json.loads(out)
    assert rep["verdict"] == "pass"
    assert rep["global"]["alpha_boundary"] == rep["global"]["beta_boundary"]
    assert json.loads((tmp_path / "check.json").read_text()) == rep


def test_check_failure_prints_certificate() -> None:
    code, out, _ = call("check", "--domain", domain("opposite_a_square"), "--mode", "translating")
    assert code == 1
    cert = json.loads(out)["certificate"]
    assert cert[0]["polygon"] == "boundary" and cert[0]["margin"] == 0.0


def test_malformed_json_exit_3(tmp_path) -> None:
    bad = tmp_path / "bad.json"
    bad.write_text('{\n  "arcs": [,]\n}')
    code, _, err = call("check", "--domain", str(bad))
    assert code == 3
    assert "line 2 column" in err


def test_bad_flag_exit_3() -> None:
    assert call("check", "--domain", domain("scherk_square"), "--h", "-1")[0] == 3
    assert call("frobnicate")[0] == 3


def test_hypothesis_violation_exit_3() -> None:
    assert call("check", "--domain", domain("scherk_square"), "--mode", "translating")[0] == 3


def test_js_example(tmp_path) -> None:
    code, out, _ = call("js", "--domain", domain("one_a_square"), "--kind", "translator",
                        "--caps", "1,2,4,8", "--trials", "3", "--out", str(tmp_path))
    assert code == 0
    rep = json.loads(out)
    table = rep["continuation"]["caps"]
    assert [r["cap"] for r in table] == [1.0, 2.0, 4.0, 8.0]
    assert all(r["monotone"] for r in table)
    assert rep["analysis"]["minimality"]["trials"] == 3
    assert sorted(p.name for p in tmp_path.iterdir()) == [
        "domain.json", "js.json", "limit.csv", "limit.json", "mesh.jsmesh"
    ]


def test_js_failed_check_exit_1() -> None:
    code, out, _ = call("js", "--domain", domain("opposite_a_square"), "--kind", "translator", "--caps", "1,2")
    assert code == 1
    assert json.loads(out)["verdict"] == "fail"


def test_solve_and_analyze(tmp_path) -> None:
    code, _, _ = call("solve", "--domain", domain("grim_reaper_strip"), "--mode", "translating",
                      "--h", "0.2", "--out", str(tmp_path))
    assert code == 0
    header = (tmp_path / "solution.csv").read_text().splitlines()[0]
    assert header == "x,y,u"
    code, out, _ = call("analyze", "--solution", str(tmp_path / "solution.json"), "--trials", "4",
                        "--out", str(tmp_path / "a"))
    assert code == 0
    assert json.loads(out)["minimality"]["trials"] == 4


def test_mesh_command(tmp_path) -> None:
    code, _, _ = call("mesh", "--domain", domain("pentagon"), "--h", "0.2", "--out", str(tmp_path))
    assert code == 0
    assert (tmp_path / "mesh.jsmesh").read_text().startswith("jsmesh 1\n")


def test_oracle_command_csv() -> None:
    code, out, _ = call("oracle", "--format", "csv", "--seed", "3")
    assert code == 0
    lines = out.strip().splitlines()
    assert lines[0].startswith("oracle,")
    assert len(lines) == 1 + 15
    for row in oracle_rows(3):
        assert row["abs_error"] <= row["tolerance"]


def test_run_config_rejects_unknown_keys() -> None:
    with pytest.raises(InputError):
        RunConfig.from_mapping({"command": "check", "colour": "red"})


def test_console_entry_point() -> None:
    proc = subprocess.run(
        [sys.executable, "-m", "jsgraph.cli", "check", "--domain", domain("one_a_square"), "--mode", "translating"],
        capture_output=True, text=True, check=False,
    )
    assert proc.returncode == 0
    assert json.loads(proc.stdout)["verdict"] == "pass"
