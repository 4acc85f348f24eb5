import csv
import io
import json
import math
import subprocess
import sys

import jsonschema
import pytest

from seplab.cli import load_schema, main


def run_cli(*argv):
    out, err = io.StringIO(), io.StringIO()
    code = main(list(argv), stdout=out, stderr=err)
    return code, out.getvalue(), err.getvalue()


def rows(text):
    return list(csv.DictReader(io.StringIO(text)))


def validate(doc):
    name = doc["schema"].split("/")[1]
    jsonschema.validate(doc, load_schema(name))


# -- documented examples -------------------------------------------------

def test_separatrix_backward_example():
    code, out, _ = run_cli("separatrix", "--potential", "monomial:p=1", "--method", "backward")
    assert code == 0
    doc = json.loads(out)
    validate(doc)
    assert doc["r"] == pytest.approx(0.56917264, abs=1e-6)


def test_series_emodel_example():
    code, out, _ = run_cli("series", "--potential", "emodel:p=1,beta=1", "--order", "2")
    assert code == 0
    doc = json.loads(out)
    validate(doc)
    assert doc["coeffs"] == pytest.approx([1.0, -1.0, 0.5])


def test_classify_steep_exponential_example():
    code, out, _ = run_cli("classify", "--potential", "custom:v=exp(2*phi)", "--h0", "5", "--phi0", "0")
    assert code == 0
    doc = json.loads(out)
    validate(doc)
    assert doc["verdict"] == "TypeA"


# -- errors --------------------------------------------------------------

def test_config_error_exit_code_and_json():
    code, out, err = run_cli("classify", "--potential", "monomial:p=0", "--h0", "1")
    assert code == 2 and out == ""
    doc = json.loads(err)
    validate(doc)
    assert doc["error"] == "ConfigError" and doc["exit_code"] == 2


def test_numeric_failure_exit_code_and_json():
    code, _, err = run_cli("separatrix", "--potential", "custom:v=exp(2*phi)", "--phi0", "0", "--method", "shoot")
    assert code == 3
    doc = json.loads(err)
    validate(doc)
    assert doc["error"] == "NoBracket"


def test_unknown_method_is_a_config_error():
    code, _, err = run_cli("separatrix", "--potential", "monomial:p=1", "--method", "guess")
    assert code == 2
    assert json.loads(err)["exit_code"] == 2


# -- determinism and formats ---------------------------------------------

@pytest.mark.parametrize("argv", [
    ("series", "--potential", "monomial:p=1", "--order", "6", "--format", "csv"),
    ("potential", "describe", "--potential", "higgs:a=1", "--phi0", "1.5", "--format", "csv"),
    ("compare", "--potential", "monomial:p=1", "--points", "21"),
    ("timedomain", "--potential", "monomial:p=1", "--phi0", "0", "--format", "csv"),
])
def test_csv_is_byte_identical_across_runs(argv):
    first = run_cli(*argv)
    second = run_cli(*argv)
    assert first[0] == 0
    assert first[1] == second[1]
    assert first[1].splitlines()[0].count(",") >= 1


def test_portrait_order_is_independent_of_threads(tmp_path, monkeypatch):
    argv = ["portrait", "--potential", "monomial:p=1", "--phi0", "0", "--h0-list", "0.3,0.9,0.5,2.0"]
    monkeypatch.setenv("SEPLAB_THREADS", "1")
    assert run_cli(*argv, "--out", str(tmp_path / "serial"))[0] == 0
    monkeypatch.setenv("SEPLAB_THREADS", "4")
    assert run_cli(*argv, "--out", str(tmp_path / "parallel"))[0] == 0
    serial = sorted(p.name for p in (tmp_path / "serial").iterdir())
    assert serial == sorted(p.name for p in (tmp_path / "parallel").iterdir())
    for name in serial:
        assert (tmp_path / "serial" / name).read_bytes() == (tmp_path / "parallel" / name).read_bytes()
    index = json.loads((tmp_path / "serial" / "index.json").read_text())
    validate(index)
    assert [t["h0"] for t in index["trajectories"]] == [0.3, 0.9, 0.5, 2.0]


def test_out_directory_holds_all_artifacts(tmp_path):
    code, out, _ = run_cli("timedomain", "--potential", "exponential:alpha=0.5", "--phi0", "0",
                           "--out", str(tmp_path))
    assert code == 0 and out == ""
    names = {p.name for p in tmp_path.iterdir()}
    assert names == {"timedomain.csv", "blowup.json"}
    validate(json.loads((tmp_path / "blowup.json").read_text()))
    table = rows((tmp_path / "timedomain.csv").read_text())
    assert list(table[0]) == ["t", "phi", "h", "phidot"]


def test_describe_columns_and_values():
    code, out, _ = run_cli("potential", "describe", "--potential", "exponential:alpha=0.5", "--phi0", "0",
                           "--phi-max", "2", "--points", "3", "--format", "csv")
    assert code == 0
    table = rows(out)
    assert list(table[0]) == ["phi", "v", "vp", "frakv"]
    assert [float(r["phi"]) for r in table] == [0.0, 1.0, 2.0]
    assert all(float(r["frakv"]) == pytest.approx(0.5) for r in table)


def test_series_csv_keeps_exact_rationals():
    code, out, _ = run_cli("series", "--potential", "monomial:p=1", "--order", "4", "--format", "csv")
    assert code == 0
    table = rows(out)
    assert list(table[0]) == ["n", "valuation", "numerator", "denominator", "decimal"]
    # h_s = phi + 1/(2 phi) - 5/(8 phi^3) + ...
    got = [(r["valuation"], r["numerator"], r["denominator"]) for r in table[:3]]
    assert got == [("-1", "1", "1"), ("1", "1", "2"), ("3", "-5", "8")]


def test_compare_columns_agree_at_large_phi():
    code, out, _ = run_cli("compare", "--potential", "monomial:p=1", "--phi-max", "10", "--points", "11")
    assert code == 0
    last = rows(out)[-1]
    numeric = float(last["numeric"])
    assert float(last["match"]) == pytest.approx(numeric, rel=1e-4)
    assert float(last["pade"]) == pytest.approx(numeric, rel=1e-4)


def test_resum_values():
    code, out, _ = run_cli("resum", "--potential", "monomial:p=1", "--phi-list", "0")
    assert code == 0
    doc = json.loads(out)
    validate(doc)
    assert doc["value_at"] == [{"phi": 0.0, "value": pytest.approx(math.sqrt(math.pi / 10), rel=1e-14)}]


def test_console_script_entry_point():
    proc = subprocess.run([sys.executable, "-m", "seplab.cli", "series", "--potential", "monomial:p=2",
                           "--order", "2"], capture_output=True, text=True, check=False)
    assert proc.returncode == 0
    assert json.loads(proc.stdout)["schema"] == "seplab/series/v1"
