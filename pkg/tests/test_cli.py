import csv
import io
import json
from importlib import resources

import jsonschema
import pytest

from artifact.cli import COLUMNS, run


def call(*argv, env=None, monkeypatch=None):
    out, err = io.StringIO(), io.StringIO()
    code = run(list(argv), out, err)
    return code, out.getvalue(), err.getvalue()


def schema(name):
    return json.loads(resources.files("artifact").joinpath("schemas", f"{name}.json").read_text())


def test_exact_text():
    code, out, _ = call("exact", "--n", "5", "--c", "6")
    assert code == 0
    assert "(2,0,1,0,1,0)" in out


def test_exact_json_validates():
    code, out, _ = call("exact", "--n", "5,10", "--c", "6", "--format", "json")
    assert code == 0
    doc = json.loads(out)
    jsonschema.validate(doc, schema("exact"))
    assert doc["schema_version"] == 1 and doc["command"] == "exact"


def test_tables_csv_layout():
    code, out, _ = call("tables", "--format", "csv")
    assert code == 0
    rows = list(csv.DictReader(io.StringIO(out)))
    assert tuple(rows[0].keys()) == COLUMNS["tables"]
    got = {(int(r["ell"]), int(r["n"])): r for r in rows}
    assert got[(1, 10)]["exact"] == "70" and got[(1, 10)]["estimate"] == "74"
    assert got[(3, 100)]["estimate"] == "44527640083065"
    assert abs(float(got[(1, 10)]["estimate_ratio"]) - 1.057143) < 1e-5


@pytest.mark.parametrize(
    "argv,name",
    [
        (("moments", "--ell", "1", "--n", "10"), "moments"),
        (("tables", "--ell", "2", "--n", "10"), "tables"),
        (("estimate-root", "--a", "1", "--c", "3", "--n", "50"), "estimate-root"),
        (("certify", "table3:1"), "certify"),
        (("verify-transforms", "--suite", "arc", "--precision", "96"), "verify-transforms"),
    ],
)
def test_json_schemas(argv, name):
    code, out, _ = call(*argv, "--format", "json")
    assert code == 0
    jsonschema.validate(json.loads(out), schema(name))


def test_repeat_runs_are_byte_identical():
    a = call("estimate-root", "--a", "1", "--c", "4", "--n", "40,80", "--format", "json")
    b = call("estimate-root", "--a", "1", "--c", "4", "--n", "40,80", "--format", "json")
    assert a == b


def test_thread_count_does_not_change_output():
    a = call("tables", "--ell", "1", "--n", "10", "--format", "json", "--threads", "1")
    b = call("tables", "--ell", "1", "--n", "10", "--format", "json", "--threads", "4")
    assert a == b


def test_certify_table3_row_json():
    code, out, _ = call("certify", "table3:1", "--format", "json")
    assert code == 0
    cert = json.loads(out)["certificates"][0]
    assert cert["status"] == "proved" and cert["checked_range"][1] >= 1287


def test_certify_list_names():
    code, out, _ = call("certify", "--list")
    assert code == 0 and "mao3" in out and "list:c7_1n+0_3lt2" in out


def test_certify_failing_spec_exits_2(tmp_path):
    p = tmp_path / "rev.json"
    p.write_text(json.dumps({"name": "rev", "c": 3, "plus": [0], "minus": [1], "step": 3, "n_start": 1}))
    code, out, _ = call("certify", str(p), "--format", "json")
    assert code == 2
    assert json.loads(out)["certificates"][0]["status"] != "proved"


def test_domain_error_exits_1():
    code, _, err = call("estimate-root", "--a", "1", "--c", "2", "--n", "10")
    assert code == 1 and err.startswith("error:")
    code, _, _ = call("certify", "no-such-spec")
    assert code == 1


def test_usage_errors_exit_64():
    assert call("frobnicate")[0] == 64
    assert call("exact")[0] == 64
    assert call("exact", "--n", "x")[0] == 64
    assert call("exact", "--n", "5", "--format", "xml")[0] == 64


def test_low_precision_rejected():
    assert call("moments", "--n", "10", "--precision", "32")[0] == 1


def test_cache_flag_overrides_env(tmp_path, monkeypatch):
    env_dir, flag_dir = tmp_path / "env", tmp_path / "flag"
    env_dir.mkdir()
    flag_dir.mkdir()
    monkeypatch.setenv("ARTIFACT_CACHE_DIR", str(env_dir))
    assert call("exact", "--n", "30")[0] == 0
    assert any(env_dir.iterdir())
    assert call("exact", "--n", "31", "--cache-dir", str(flag_dir))[0] == 0
    assert any(flag_dir.iterdir())
    assert len(list(env_dir.iterdir())) == 1
