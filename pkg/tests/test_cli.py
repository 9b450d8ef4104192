import json
import subprocess
import sys

import jsonschema
import pytest

from cli_cases import CASES, FIXTURES, expand
from hvlab.cli import dispatch, main
from hvlab.schemas import PAYLOAD_SCHEMAS


@pytest.fixture(scope="module")
def scratch(tmp_path_factory):
    tmp = tmp_path_factory.mktemp("cli")
    assert main(["ks", "peres33", "--emit", str(tmp / "peres33.txt")]) == 0
    return tmp


@pytest.mark.parametrize("template,code,schema", CASES, ids=[c[0] or "<empty>" for c in CASES])
def test_exit_code_matrix(template, code, schema, scratch):
    result = dispatch(expand(template, scratch))
    assert result.exit_code == code, result.payload
    if schema is None:
        assert set(result.payload) == {"error"}
    else:
        jsonschema.validate(json.loads(json.dumps(result.payload, default=float)), PAYLOAD_SCHEMAS[schema])


def test_photon_equal_angles_payload(capsys):
    assert main(["predict", "photon", "--alpha", "0", "--beta", "0"]) == 0
    doc = json.loads(capsys.readouterr().out)
    assert doc["stats"]["mismatch"] == 0.0
    assert doc["stats"]["p11"] == 0.5


def test_scan_writes_violating_rows(scratch):
    path = scratch / "scan_rows.csv"
    assert main(["scan-boole", "--csv", str(path)]) == 1
    lines = path.read_text().splitlines()
    assert lines[0] == "theta,f,violation"
    assert len(lines) == 6285
    assert any(line.endswith(",1") and float(line.split(",")[1]) < 0 for line in lines[1:])


def test_peres_file_is_uncolorable(scratch, capsys):
    assert main(["ks", "color", str(scratch / "peres33.txt")]) == 1
    doc = json.loads(capsys.readouterr().out)
    assert doc["colorable"] is False and doc["exhausted"] is True and doc["witness"] is None


def test_error_is_one_line_on_stderr(capsys):
    assert main(["lhv", "check", str(FIXTURES / "truncated.json")]) == 2
    captured = capsys.readouterr()
    assert captured.out == ""
    assert captured.err.startswith("hvlab: error: ") and captured.err.count("\n") == 1


def test_stochastic_reduce_payload(capsys):
    assert main(["stochastic", "reduce", str(FIXTURES / "stochastic_model.json")]) == 0
    doc = json.loads(capsys.readouterr().out)
    assert doc["certified"] and doc["polytope_feasible"] and doc["boole"]["holds"]


def test_obstruction_round_trip_payload(capsys):
    args = ["ks", "obstruction", str(FIXTURES / "two_triads.txt"), "--model", str(FIXTURES / "spin1_model.json")]
    assert main(args) == 0
    doc = json.loads(capsys.readouterr().out)
    assert doc["status"] == "model consistent" and len(doc["colorings"]) == 5


def test_simulate_same_seed_same_bytes(capsys):
    args = ["lhv", "simulate", str(FIXTURES / "photon_model.json"), "--shots", "5000", "--seed", "3"]
    main(args)
    first = capsys.readouterr().out
    main(args)
    assert capsys.readouterr().out == first
    main(args[:-1] + ["4"])
    assert capsys.readouterr().out != first


def test_module_entry_point():
    proc = subprocess.run(
        [sys.executable, "-m", "hvlab", "predict", "photon", "--alpha", "1.0471975511965976", "--beta", "0"],
        capture_output=True,
        text=True,
        check=False,
    )
    assert proc.returncode == 0
    doc = json.loads(proc.stdout)
    assert abs(doc["stats"]["mismatch"] - 0.75) <= 1e-15
