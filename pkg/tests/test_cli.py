import csv
import io
import json

import pytest

from ascifit.cli import main


@pytest.fixture
def data_file(tmp_path):
    p = tmp_path / "r.txt"
    p.write_text("# responses\n-1\n2\n−3\n")
    return p


def test_fit_three_points(data_file, capsys):
    assert main(["fit", str(data_file), "--eta", "0.2"]) == 0
    rows = list(csv.DictReader(io.StringIO(capsys.readouterr().out)))
    assert [float(r["mu_hat"]) for r in rows] == pytest.approx([1.0, 2.0, 3.0])
    assert float(rows[0]["sigma_hat"]) == 0.0
    assert [float(r["r"]) for r in rows] == [-1.0, 2.0, -3.0]


def test_fit_column_and_out(tmp_path):
    src = tmp_path / "d.csv"
    src.write_text("id,resp\n0,0.5\n1,-0.7\n2,1.1\n")
    out = tmp_path / "o.csv"
    assert main(["fit", str(src), "--eta", "0.2", "--column", "resp", "--out", str(out)]) == 0
    assert len(out.read_text().splitlines()) == 4
    assert main(["fit", str(src), "--eta", "0.2", "--column", "missing"]) == 1


@pytest.mark.parametrize("content,args", [
    ("1\nabc\n", ["--eta", "0.2"]),
    ("", ["--eta", "0.2"]),
    ("1\n2\n", ["--eta", "0"]),
    ("1\ninf\n", ["--eta", "0.2"]),
])
def test_fit_input_errors(tmp_path, content, args):
    p = tmp_path / "bad.txt"
    p.write_text(content)
    assert main(["fit", str(p), *args]) == 1


def test_missing_file(tmp_path):
    assert main(["fit", str(tmp_path / "nope.txt"), "--eta", "0.2"]) == 1


def test_simulate_and_rate_check(tmp_path, capsys):
    cfg = tmp_path / "c.json"
    cfg.write_text(json.dumps({"sigmas": [1.0], "ns": [20, 40, 80], "reps": 2}))
    out = tmp_path / "res"
    assert main(["simulate", "--config", str(cfg), "--out-dir", str(out), "--parallelism", "1"]) == 0
    assert len((out / "records.csv").read_text().splitlines()) == 7
    capsys.readouterr()
    assert main(["rate-check", str(out / "summary.csv")]) == 0
    lines = capsys.readouterr().out.splitlines()
    assert lines[0].startswith("eta,p,sigma,n_points,slope")
    assert len(lines) == 2


def test_simulate_seed_override(tmp_path):
    cfg = tmp_path / "c.json"
    cfg.write_text(json.dumps({"sigmas": [1.0], "ns": [20], "reps": 2}))
    a, b = tmp_path / "a", tmp_path / "b"
    main(["--seed", "5", "simulate", "--config", str(cfg), "--out-dir", str(a), "--parallelism", "1"])
    main(["simulate", "--config", str(cfg), "--out-dir", str(b), "--parallelism", "1"])
    assert (a / "records.csv").read_text() != (b / "records.csv").read_text()


def test_bad_config(tmp_path):
    cfg = tmp_path / "c.json"
    cfg.write_text(json.dumps({"reps": 0}))
    assert main(["simulate", "--config", str(cfg), "--out-dir", str(tmp_path)]) == 1


def test_verify_quick(capsys):
    assert main(["verify", "--quick"]) == 0
    out = capsys.readouterr().out
    assert out.count("PASS") == 5
