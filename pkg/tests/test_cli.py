from __future__ import annotations

import json
import subprocess
import sys
from pathlib import Path


from oplogic.cli import GRAMMAR, main

CORPUS = Path(__file__).resolve().parents[1] / "corpus"


def run(capsys, *argv):
    status = main(list(argv))
    out, err = capsys.readouterr()
    return status, out, err


def structured(capsys, *argv):
    status, out, _ = run(capsys, *argv, "--format", "structured")
    return status, json.loads(out)


def test_prove_identity_reflexivity(capsys):
    status, out, _ = run(capsys, "prove", str(CORPUS / "identity_refl.prf"))
    assert status == 0 and "accepted (4 lines)" in out


def test_prove_reports_every_justification(capsys):
    status, doc = structured(capsys, "prove", str(CORPUS / "identity_refl.prf"))
    assert doc["version"] == 1 and doc["accepted"]
    assert [ln.rsplit(";", 1)[1].strip() for ln in doc["lines"]] == ["A1", "GEN 1 X", "DEFEQ 2", "GEN 3 y"]


def test_whole_corpus_exit_statuses(capsys):
    files = [str(p) for p in sorted(CORPUS.glob("*.prf"))]
    status, doc = structured(capsys, "prove", *files)
    assert status == 0 and doc["rejected"] == 0 and doc["accepted"] == len(files)


def test_rejected_proof_exit_one(capsys, tmp_path):
    p = tmp_path / "bad.prf"
    p.write_text("1. P^<e1>(c^e1) -> Q^<e1>(c) ; A1\n")
    status, out, _ = run(capsys, "prove", str(p))
    assert status == 1 and "rejected" in out


def test_parse_error_carries_file_and_position(capsys, tmp_path):
    p = tmp_path / "broken.prf"
    p.write_text("# header\n1. P^<e1>(c^e1) -> ; A1\n")
    status, _, err = run(capsys, "prove", str(p))
    assert status == 2 and f"{p}:2:" in err


def test_classify(capsys):
    status, out, _ = run(capsys, "classify", "<e1,e2>")
    assert status == 1 and "not opaque: component 2 has leaf e2" in out
    status, out, _ = run(capsys, "classify", "<<e1>,e1>")
    assert status == 0 and "opaque" in out


def test_validity_counterexample_and_round_trip(capsys, tmp_path):
    frame_file = tmp_path / "ce.yaml"
    status, doc = structured(capsys, "validity", "--nm", "2", "--M", "1", "--depth", "1",
                             "--kind", "symmetric", "--out", str(frame_file), "forall x^e1 . P^<e1>(x)")
    assert status == 1 and doc["verdict"] == "counterexample"
    assert doc["counterexample"]["denotation"]["P^<e1>"] == []
    # both the dedicated frame file and the report itself reload as frames
    report_file = tmp_path / "report.json"
    report_file.write_text(json.dumps(doc))
    for path in (frame_file, report_file):
        status, back = structured(capsys, "eval", "--frame", str(path))
        assert status == 1 and back["true"] is False


def test_validity_holds(capsys):
    status, doc = structured(capsys, "validity", "--proof", str(CORPUS / "a4_basic.prf"))
    assert status == 0 and doc["verdict"] == "no-counterexample"


def test_bounds_from_environment(capsys, monkeypatch):
    monkeypatch.setenv("OPLOGIC_BOUNDS", "1,1,1,standard")
    _, doc = structured(capsys, "validity", "P^<e1>(c^e1) -> P(c)")
    assert doc["bounds"]["max_nm"] == 1 and doc["kind"] == "standard"
    monkeypatch.setenv("OPLOGIC_BOUNDS", "nonsense")
    status, _, err = run(capsys, "validity", "P^<e1>(c^e1) -> P(c)")
    assert status == 2 and "OPLOGIC_BOUNDS" in err


def test_usage_error_prints_grammar(capsys):
    status, _, err = run(capsys, "frobnicate")
    assert status == 2 and GRAMMAR in err
    status, _, err = run(capsys, "validity")
    assert status == 2 and "usage: oplogic" in err


def test_identity_at_e1_is_an_input_error(capsys):
    status, _, err = run(capsys, "parse", "x^e1 = y^e1")
    assert status == 2 and "1:6" in err


def test_qset_operations(capsys):
    q = "qset{ pure: {s: 2}, classical: [] }"
    assert structured(capsys, "qset", "card", q)[1]["result"] == 2
    assert structured(capsys, "qset", "power", q)[1]["total"] == 4
    status, _ = structured(capsys, "qset", "indist", q, "qset{ pure: {s: 3}, classical: [] }")
    assert status == 1


def test_permtest_is_deterministic(capsys):
    args = ("permtest", "--trials", "40", "--exchanges", "100", "--seed", "7", "--format", "structured")
    s1, out1, _ = run(capsys, *args)
    s2, out2, _ = run(capsys, *args)
    assert s1 == s2 == 0 and out1 == out2
    doc = json.loads(out1)
    assert doc["failures"] == 0 and doc["seed"] == 7


def test_timing_only_on_request(capsys):
    _, doc = structured(capsys, "validity", "P^<e1>(c^e1) -> P(c)", "--nm", "1", "--M", "1")
    assert "elapsed_seconds" not in json.dumps(doc)
    _, doc = structured(capsys, "validity", "P^<e1>(c^e1) -> P(c)", "--nm", "1", "--M", "1", "--timing")
    assert "elapsed_seconds" in json.dumps(doc)


def test_text_and_structured_carry_the_same_fields(capsys):
    _, doc = structured(capsys, "classify", "<e1,e2>")
    _, text, _ = run(capsys, "classify", "<e1,e2>")
    for key, value in doc.items():
        if key != "version":
            assert key in text and str(value) in text


def test_module_entry_point():
    r = subprocess.run([sys.executable, "-m", "oplogic", "classify", "<e1>"], capture_output=True, text=True)
    assert r.returncode == 0 and "opaque" in r.stdout
