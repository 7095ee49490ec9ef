import csv
import io
import json

import pytest

from fracperim.cli import main


def run(capsys, *argv):
    code = main(list(argv))
    out, err = capsys.readouterr()
    return code, out, err


def test_gen_counts(tmp_path, capsys):
    p = tmp_path / "k.json"
    assert run(capsys, "gen", "koch", "--level", "5", "--out", str(p))[0] == 0
    doc = json.loads(p.read_text())
    assert doc["kind"] == "polygon" and len(doc["vertices"]) == 3072
    code, out, _ = run(capsys, "gen", "exploded", "--b", "2", "--sigma", "0.5", "--n", "2", "--levels", "4")
    assert code == 0 and len(json.loads(out)["items"]) == 15
    code, out, _ = run(capsys, "gen", "sierpinski-dendrite", "--level", "3")
    assert len(json.loads(out)["items"]) == 13
    code, out, _ = run(capsys, "gen", "appendixA", "--a", "0.5")
    assert json.loads(out)["generator"] == {"a": 0.5, "name": "appendixA"}


def test_gen_unknown(capsys):
    code, _, err = run(capsys, "gen", "cantor")
    assert code == 2 and "unknown kind" in err


def test_perimeter_unit_interval(tmp_path, capsys):
    p = tmp_path / "iv.json"
    p.write_text('{"kind": "intervals", "items": [[0, 1]]}')
    code, out, _ = run(capsys, "perimeter", "--set", str(p), "--s", "0.5")
    doc = json.loads(out)
    assert code == 0 and doc["total"] == pytest.approx(8.0, rel=1e-14)
    assert doc["metadata"]["config"]["s"] == 0.5 and "version" in doc["metadata"]


def test_perimeter_breakdown_identity(capsys):
    code, out, _ = run(capsys, "perimeter", "--set", "square", "--s", "0.5", "--omega", "ball:2")
    doc = json.loads(out)
    assert doc["local"] + doc["nonlocal"] == doc["total"]


def test_domain_and_io_errors(capsys):
    code, _, err = run(capsys, "perimeter", "--set", "square", "--s", "1.0")
    assert code == 2 and "s must lie in (0,1)" in err
    code, _, err = run(capsys, "asym", "--set", "missing.json")
    assert code == 1
    code, _, _ = run(capsys, "perimeter", "--set", "square", "--s", "0.5", "--out", "/nonexistent/dir/x.json")
    assert code == 1


def test_dim_box(tmp_path, capsys):
    c = tmp_path / "box.csv"
    code, out, _ = run(capsys, "dim", "box", "--set", "koch7", "--deltas", "3^-1..3^-6", "--csv", str(c))
    assert code == 0
    assert json.loads(out)["slope"] == pytest.approx(1.262, abs=0.05)
    # level 5 has edges of length 3^-5, so the finest scale already sees a rectifiable curve
    _, out, _ = run(capsys, "dim", "box", "--set", "koch5", "--deltas", "3^-1..3^-6")
    assert 1.15 < json.loads(out)["slope"] < 1.262
    text = c.read_bytes().decode()
    assert "\r" not in text and text.splitlines()[0] == "delta,count"
    code, out, _ = run(capsys, "dim", "box", "--set", "segment", "--deltas", "2^-4..2^-12")
    assert json.loads(out)["slope"] == pytest.approx(1.0, abs=0.02)


def test_dim_threshold_deterministic(tmp_path, capsys):
    args = ["dim", "threshold", "--spec", "sierpinski-dendrite", "--levels", "5", "--csv", str(tmp_path / "t.csv")]
    _, out1, _ = run(capsys, *args)
    csv1 = (tmp_path / "t.csv").read_bytes()
    _, out2, _ = run(capsys, *args)
    assert out1 == out2 and csv1 == (tmp_path / "t.csv").read_bytes()
    rows = list(csv.reader(io.StringIO(csv1.decode())))
    assert rows[0] == ["s", "rate", "rate_err"]
    assert json.loads(out1)["s_star"] == pytest.approx(0.415037, abs=0.03)


def test_dim_content(capsys):
    code, out, _ = run(capsys, "dim", "content", "--set", "segment", "--deltas", "0.1,0.01,0.001")
    rows = json.loads(out)["rows"]
    assert rows[0]["content"] == pytest.approx(2.0, rel=0.01)


def test_asym_square_and_appendix(tmp_path, capsys):
    code, out, _ = run(capsys, "asym", "--set", "square", "--omega", "ball:2")
    assert code == 0 and json.loads(out)["rel_dev"] <= 0.02
    p = tmp_path / "a.json"
    run(capsys, "gen", "appendixA", "--a", "0.5", "--out", str(p))
    c = tmp_path / "a.csv"
    code, out, _ = run(capsys, "asym", "--set", str(p), "--csv", str(c))
    assert json.loads(out)["increasing"] is True
    assert c.read_text().splitlines()[0] == "s,scaled_local,err_local,scaled_nonlocal,err_nonlocal,scaled_total"


def test_check_quick(capsys):
    code, out, _ = run(capsys, "check", "--quick")
    assert code == 0 and "FAIL" not in out
