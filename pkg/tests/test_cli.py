import csv
import io
import json
import math
from pathlib import Path

import numpy as np
import pytest

from lfball import documents
from lfball.cli import main
from lfball.errors import DocumentParseError, SchemaError
from lfball.sampling import random_lfm

FIXTURES = Path(__file__).resolve().parent.parent / "fixtures"
IDENTITY = str(FIXTURES / "identity.json")
AUTO = str(FIXTURES / "disk_automorphism.json")
COUNTER = str(FIXTURES / "counterexample.json")


def run(capsys, *argv):
    code = main(list(argv))
    out, err = capsys.readouterr()
    return code, out, err


def run_json(capsys, *argv):
    code, out, err = run(capsys, *argv)
    assert code == 0, err
    return json.loads(out)


def test_fixtures_load():
    for path in (IDENTITY, AUTO, COUNTER):
        doc = documents.load(path)
        assert doc.version == 1
        assert doc.m == 2


def test_document_round_trip(rng):
    phi = random_lfm(3, rng)
    doc = documents.loads(documents.dumps(documents.lfm_document(phi)))
    assert np.array_equal(doc.build().T, phi.T)


def test_document_parse_error_has_location():
    with pytest.raises(DocumentParseError) as info:
        documents.loads('{"version": 1,\n  "kind": }')
    assert info.value.line == 2


@pytest.mark.parametrize(
    "doc, field",
    [
        ({"version": 2, "kind": "lfm", "m": 1, "payload": {}}, "version"),
        ({"version": 1, "kind": "xyz", "m": 1, "payload": {}}, "kind"),
        ({"version": 1, "kind": "lfm", "m": 0, "payload": {}}, "m"),
        ({"version": 1, "kind": "lfm", "m": 1, "payload": {"T": [[1, 0]]}}, "payload.T"),
        ({"version": 1, "kind": "lfm", "m": 1, "payload": {"T": [[1, {"re": "x"}], [0, 1]]}}, "payload.T[0][1].re"),
        ({"version": 1, "kind": "bcd", "m": 2, "payload": {"alpha": 2.0, "c": 1, "b": [0], "d": [0], "A": [[0]]}}, "payload.alpha"),
        ({"version": 1, "kind": "bcd", "m": 2, "payload": {"alpha": 0.5, "c": 1, "b": [0, 1], "d": [0], "A": [[0]]}}, "payload.b"),
    ],
)
def test_schema_errors_name_the_field(doc, field):
    with pytest.raises(SchemaError) as info:
        documents.from_json(doc)
    assert info.value.field == field


def test_validate_identity(capsys):
    r = run_json(capsys, "validate", IDENTITY)
    assert r["command"] == "validate"
    assert r["results"]["valid"]
    assert r["results"]["scale"] == pytest.approx(1.0, rel=1e-9)
    assert set(r) == {"command", "input_digest", "parameters", "results", "warnings", "wall_time"}


def test_validate_disk_automorphism(capsys):
    r = run_json(capsys, "validate", AUTO)
    assert r["results"]["valid"]
    assert r["results"]["scale"] == pytest.approx(4 / 3, rel=1e-9)


def test_validate_invalid_bcd_is_a_result(capsys, tmp_path):
    bad = tmp_path / "bad.json"
    bad.write_text(json.dumps({
        "version": 1, "kind": "bcd", "m": 2,
        "payload": {"alpha": 0.25, "c": 4, "b": [0], "d": [1], "A": [[0.9]]},
    }))
    r = run_json(capsys, "validate", str(bad))
    assert not r["results"]["valid"]
    assert any("sqrt(alpha)" in v for v in r["results"]["violations"])


@pytest.mark.parametrize(
    "path, kind, alpha",
    [(IDENTITY, "elliptic", None), (AUTO, "hyperbolic", 1 / 3), (COUNTER, "hyperbolic", 0.25)],
)
def test_classify(capsys, path, kind, alpha):
    r = run_json(capsys, "classify", path)
    assert r["results"]["kind"] == kind
    if alpha is None:
        assert r["results"]["alpha"] is None
    else:
        assert r["results"]["alpha"] == pytest.approx(alpha, abs=1e-9)


def test_specrad_disk_automorphism(capsys):
    r = run_json(capsys, "specrad", AUTO, "--beta", "1", "-n", "500")
    res = r["results"]
    assert res["predicted_radius"] == pytest.approx(math.sqrt(3))
    assert res["relative_gap"] < 0.02
    assert res["last_n"] == 500


def test_specrad_counterexample_predicts_four(capsys):
    r = run_json(capsys, "specrad", COUNTER, "--beta", "2", "-n", "200")
    assert r["results"]["predicted_radius"] == pytest.approx(4.0, rel=1e-9)


def test_specrad_csv(capsys):
    code, out, _ = run(capsys, "specrad", IDENTITY, "--beta", "2", "-n", "5", "--format", "csv")
    assert code == 0
    rows = list(csv.reader(io.StringIO(out)))
    assert rows[0] == ["n", "defect", "s_n", "ratio"]
    assert len(rows) == 6
    assert all(float(row[2]) == 1.0 for row in rows[1:])


def test_common_flags_work_before_or_after_the_command(capsys):
    before = run_json(capsys, "--seed", "3", "--points", "12", "kernel-check", AUTO)
    after = run_json(capsys, "kernel-check", AUTO, "--seed", "3", "--points", "12")
    assert before["parameters"] == after["parameters"] == {"points": 12, "seed": 3, "tol": 1e-9}
    assert before["results"] == after["results"]


def test_counterexample_command(capsys):
    res = run_json(capsys, "counterexample", "--alpha", "0.25", "-m", "2", "-n", "100")["results"]
    assert res["all_t_exceed_one"]
    assert res["t_first"] == pytest.approx(4.0)
    assert not res["special_limit_zero"]
    assert res["x_limit"]["re"] == pytest.approx(17.0)
    assert res["ratio_gap"] < 1e-4


def test_counterexample_csv_uses_round_trip_digits(capsys):
    code, out, _ = run(capsys, "counterexample", "-n", "4", "--format", "csv")
    rows = list(csv.reader(io.StringIO(out)))
    assert rows[0][:2] == ["n", "t_n"]
    assert float(rows[1][1]) == 4.0
    assert rows[4][1] == repr(float(rows[4][1])) or float(rows[4][1]) == pytest.approx(14.0625)


def test_kernel_check(capsys):
    res = run_json(capsys, "kernel-check", IDENTITY)["results"]
    assert res["gram"]["min_eig"] == pytest.approx(0.0, abs=1e-12)
    assert res["factorization_residual"] < 1e-9
    res = run_json(capsys, "kernel-check", AUTO, COUNTER, "--points", "40")["results"]
    assert res["gram"]["verdict"] == "positive"
    assert res["composition_identity_residual"] < 1e-10


def test_normbounds(capsys):
    res = run_json(capsys, "normbounds", AUTO, "--beta", "1")["results"]
    assert res["lower"] == pytest.approx(math.sqrt(4 / 3))
    assert res["upper"] == pytest.approx(math.sqrt(3))
    assert res["lower"] <= res["gram_lower_bound"] <= res["upper"]


def test_factor(capsys):
    res = run_json(capsys, "factor", AUTO)["results"]
    assert res["kernel_residual"] < 1e-9
    assert len(res["X"]) == 3


def test_out_file_and_determinism(capsys, tmp_path):
    a, b = tmp_path / "a.json", tmp_path / "b.json"
    for path in (a, b):
        assert main(["kernel-check", AUTO, "--seed", "7", "--out", str(path)]) == 0
    ra, rb = json.loads(a.read_text()), json.loads(b.read_text())
    ra.pop("wall_time"), rb.pop("wall_time")
    assert json.dumps(ra, sort_keys=True) == json.dumps(rb, sort_keys=True)
    assert ra["input_digest"] == documents.load(AUTO).digest


def test_exit_code_for_parse_error(capsys, tmp_path):
    bad = tmp_path / "bad.json"
    bad.write_text('{"version": 1,')
    code, _, err = run(capsys, "validate", str(bad))
    assert code == 2
    assert "line" in json.loads(err)["message"]


def test_exit_code_for_schema_error(capsys, tmp_path):
    bad = tmp_path / "bad.json"
    bad.write_text('{"version": 1, "kind": "lfm", "m": 2, "payload": {"T": [[1, 0], [0, 1]]}}')
    code, _, err = run(capsys, "classify", str(bad))
    assert code == 2
    assert "payload.T" in json.loads(err)["message"]


def test_exit_code_for_non_self_map(capsys, tmp_path):
    bad = tmp_path / "bad.json"
    bad.write_text('{"version": 1, "kind": "lfm", "m": 1, "payload": {"T": [[2, 0], [0, 1]]}}')
    assert run(capsys, "classify", str(bad))[0] == 2
    code, out, _ = run(capsys, "validate", str(bad))
    assert code == 0
    assert not json.loads(out)["results"]["valid"]


def test_exit_code_for_bad_alpha(capsys):
    assert run(capsys, "counterexample", "--alpha", "1.5")[0] == 2
