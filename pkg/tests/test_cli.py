"""CLI dispatch, exit codes, and file plumbing."""

import json

import pytest

from padicgz.cli import main
from padicgz.serialize import read_json


def test_classify(capsys):
    assert main(["classify", "--l", "3,5", "--k", "10"]) == 0
    assert "F-dominated, t=1" in capsys.readouterr().out
    assert main(["classify", "--l", "2,2", "--k", "2"]) == 0
    assert "special corner" in capsys.readouterr().out


def test_gen_apply_diag(tmp_path, capsys):
    g = tmp_path / "g.json"
    z = tmp_path / "z.json"
    assert main([
        "gen", "hilbert-eisenstein", "--k", "2", "--D", "5", "--p", "11",
        "--N", "8", "--B", "10", "--out", str(g),
    ]) == 0
    assert main(["apply", "diag", "--in", str(g), "--out", str(z)]) == 0
    doc = read_json(z)
    assert doc["flavor"] == "elliptic"
    # b_1 = 2: the two trace-one elements of the inverse different
    row = [c for c in doc["coeffs"] if c["n"] == 1][0]
    assert row["value"][0].startswith("2,")


def test_gen_deplete_support(tmp_path):
    g = tmp_path / "g.json"
    gd = tmp_path / "gd.json"
    main(["gen", "random-depleted", "--seed", "3", "--D", "5", "--p", "11",
          "--N", "8", "--B", "10", "--out", str(g)])
    assert main(["apply", "deplete", "--in", str(g), "--out", str(gd),
                 "--primes", "p1"]) == 0
    assert read_json(gd)["coeffs"]


def test_config_error_exit_code(tmp_path, capsys):
    assert main(["gen", "hilbert-eisenstein", "--k", "2", "--D", "6", "--p", "11",
                 "--N", "8", "--B", "10", "--out", str(tmp_path / "x.json")]) == 3
    err = capsys.readouterr().err
    assert "configuration" in err


def test_schema_error_exit_code(tmp_path, capsys):
    bad = tmp_path / "bad.json"
    bad.write_text("{not json")
    assert main(["apply", "diag", "--in", str(bad), "--out",
                 str(tmp_path / "o.json")]) == 3


def test_verify_exit_codes(capsys):
    rc = main(["verify", "gz-inert", "--D", "5", "--p", "7", "--l", "4,4",
               "--s", "0", "--N", "8", "--B", "16"])
    assert rc == 0
    assert "PASS gz-inert" in capsys.readouterr().out


def test_euler_and_report_render(tmp_path, capsys):
    assert main(["euler", "--kind", "split", "--t", "0",
                 "--g-roots", "0,0,0,0", "--f-roots", "1,0", "--p", "7"]) == 0
    doc = json.loads(capsys.readouterr().out)
    assert doc["E_p"]["mantissa"][0].startswith("1,")

    rep = tmp_path / "rep.json"
    assert main(["lvalue", "--balanced", "--D", "5", "--p", "7", "--N", "12",
                 "--B", "21", "--l", "8,8", "--s", "1", "--out", str(rep)]) == 0
    assert main(["report", "--in", str(rep)]) == 0
    out = capsys.readouterr().out
    assert "kind: lp-balanced" in out and "effective precision" in out


def test_report_byte_stability(tmp_path):
    args = ["lvalue", "--balanced", "--D", "5", "--p", "7", "--N", "12",
            "--B", "21", "--l", "8,8", "--s", "1"]
    a, b = tmp_path / "a.json", tmp_path / "b.json"
    assert main(args + ["--out", str(a)]) == 0
    assert main(args + ["--out", str(b)]) == 0
    assert a.read_bytes() == b.read_bytes()


def test_hpl_threads_validation(monkeypatch, capsys):
    monkeypatch.setenv("HPL_THREADS", "zero")
    assert main(["classify", "--l", "2,2", "--k", "2"]) == 3
    monkeypatch.setenv("HPL_THREADS", "2")
    assert main(["classify", "--l", "2,2", "--k", "2"]) == 0
