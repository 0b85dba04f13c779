import csv
import io
import json
import math
import subprocess
import sys

import pytest

from dunkl_lab.cli import EXIT_CONFIG, EXIT_FAIL, EXIT_OK, EXIT_REGIME, main, rational


def run(argv, capsys):
    code = main(argv)
    out = capsys.readouterr()
    return code, out.out, out.err


def rows(text):
    return list(csv.DictReader(io.StringIO(text)))


def test_rational_parsing():
    from fractions import Fraction

    assert rational("1/3") == Fraction(1, 3)
    assert rational("0.5") == Fraction(1, 2)
    with pytest.raises(Exception):
        rational("1e-3")


def test_verify_exit_codes(capsys):
    code, out, _ = run(["verify", "--suite", "cherednik", "--N", "3", "--g", "1"], capsys)
    assert code == EXIT_OK
    doc = json.loads(out)
    assert doc["seed"] == 0 and doc["summary"]["fail"] == 0
    assert all(c["verdict"] == "pass" for c in doc["cases"])
    code, out, _ = run(["verify", "--suite", "cherednik", "--N", "3", "--g", "1", "--inject-fault"], capsys)
    assert code == EXIT_FAIL
    assert any(c["verdict"] == "fail" and "residual" in c for c in json.loads(out)["cases"])


def test_verify_stark_example(capsys):
    code, _, _ = run(["verify", "--suite", "stark", "--N", "2", "--g", "2", "--f", "1/3"], capsys)
    assert code == EXIT_OK


@pytest.mark.parametrize(
    "argv",
    [
        ["verify", "--suite", "bogus", "--N", "2"],
        ["verify", "--N", "2"],
        ["verify", "--suite", "cherednik", "--g", "1e-3"],
        ["verify", "--suite", "cherednik", "--F", "0.1"],
        ["verify", "--suite", "cherednik", "--N", "x"],
        ["verify", "--dump-operator", "nope"],
        ["frobnicate"],
        ["spectrum", "--model", "nope"],
        ["transform", "--from", "nope"],
    ],
)
def test_config_errors(argv, capsys):
    code, _, _ = run(argv, capsys)
    assert code == EXIT_CONFIG


def test_config_file(tmp_path, capsys):
    cfg = tmp_path / "run.cfg"
    cfg.write_text("# sample\nsuite = cherednik\nN = 2\ng = 1/2\n")
    code, out, _ = run(["verify", "--config", str(cfg), "--g", "2"], capsys)
    assert code == EXIT_OK
    spec = json.loads(out)["cases"][0]["spec"]
    assert spec["N"] == 2 and spec["g"] == "2"
    bad = tmp_path / "bad.cfg"
    bad.write_text("suite = cherednik\ncolour = blue\n")
    code, _, err = run(["verify", "--config", str(bad)], capsys)
    assert code == EXIT_CONFIG and "colour" in err
    bad.write_text("suite = cherednik\ng = 1e-2\n")
    assert run(["verify", "--config", str(bad)], capsys)[0] == EXIT_CONFIG
    assert run(["verify", "--config", str(tmp_path / "missing.cfg")], capsys)[0] == EXIT_CONFIG


def test_outputs_byte_identical(tmp_path, capsys):
    a, b = tmp_path / "a.json", tmp_path / "b.json"
    argv = ["verify", "--suite", "cherednik", "--N", "2", "--random-g", "2", "--seed", "11"]
    assert main(argv + ["--out", str(a)]) == EXIT_OK
    assert main(argv + ["--out", str(b)]) == EXIT_OK
    assert a.read_bytes() == b.read_bytes()
    assert json.loads(a.read_text())["seed"] == 11
    c, d = tmp_path / "c.csv", tmp_path / "d.csv"
    argv = ["transform", "--random", "5", "--seed", "3", "--N", "4", "--to", "parabolic"]
    main(argv + ["--out", str(c)])
    main(argv + ["--out", str(d)])
    assert c.read_bytes() == d.read_bytes()


def test_verify_csv(capsys):
    code, out, _ = run(["verify", "--suite", "cherednik", "--N", "2", "--g", "1", "--format", "csv"], capsys)
    assert code == EXIT_OK
    table = rows(out)
    assert table and all(r["verdict"] == "pass" and r["seed"] == "0" for r in table)


def test_dump_operator_and_manifest(capsys):
    code, out, _ = run(["verify", "--dump-operator", "L[1,2]", "--N", "2", "--g", "1"], capsys)
    assert code == EXIT_OK
    doc = json.loads(out)
    assert doc["terms"] == len(doc["normal_form"]) == 3
    code, out, _ = run(["manifest"], capsys)
    doc = json.loads(out)
    assert code == EXIT_OK and "verified_forms" in doc and doc["seed"] == 0


def test_spectrum_coulomb(capsys):
    code, out, _ = run(["spectrum", "--model", "coulomb", "--N", "3", "--g", "1", "--gamma", "1", "--nmax", "6"], capsys)
    assert code == EXIT_OK
    table = rows(out)
    assert {float(r["n"]) for r in table} == {4.0, 5.0, 6.0}
    for r in table:
        n = float(r["n"])
        assert abs(float(r["E"]) + 1 / (2 * n * n)) < 1e-8
        assert r["seed"] == "0"


def test_spectrum_coulomb_parabolic_and_oracle(capsys):
    code, out, _ = run(["spectrum", "--model", "coulomb", "--nmax", "2", "--chart", "parabolic"], capsys)
    assert code == EXIT_OK and len(rows(out)) == 3
    code, out, _ = run(["spectrum", "--model", "coulomb", "--nmax", "1", "--method", "oracle", "--grid", "200"], capsys)
    assert code == EXIT_OK
    assert abs(float(rows(out)[0]["E"]) + 0.5) < 1e-5


def test_spectrum_stark_slope(capsys):
    argv = ["spectrum", "--model", "stark", "--N", "3", "--g", "1", "--gamma", "1", "--F", "1e-5", "--slope", "--nmax", "5"]
    code, out, _ = run(argv, capsys)
    assert code == EXIT_OK
    for r in rows(out):
        closed = float(r["slope_closed"])
        if closed:
            assert abs(float(r["slope"]) - closed) < 5e-3 * abs(closed)
        else:
            assert float(r["rel_error"]) < 1e-3


def test_spectrum_two_center(capsys):
    argv = ["spectrum", "--model", "two_center", "--N", "3", "--g", "0", "--gamma1", "0.5", "--gamma2", "0.5", "--a", "1e-3"]
    code, out, _ = run(argv, capsys)
    assert code == EXIT_OK
    assert abs(float(rows(out)[0]["E"]) + 0.5) < 1e-5


def test_spectrum_unsupported_regime(capsys):
    code, _, err = run(["spectrum", "--model", "stark", "--F", "0.5", "--nmax", "1"], capsys)
    assert code == EXIT_REGIME and "weak-field" in err
    code, _, _ = run(["spectrum", "--model", "two_center", "--a", "0"], capsys)
    assert code == EXIT_REGIME


def test_transform(tmp_path, capsys, monkeypatch):
    pts = tmp_path / "pts.txt"
    pts.write_text("1 1 1\n0,0,0\n1 2 3\n")
    code, out, _ = run(["transform", "--from", "cartesian", "--to", "jacobi", "--N", "3", "--in", str(pts)], capsys)
    assert code == EXIT_OK
    table = rows(out)
    assert float(table[0]["jacobi_0"]) == pytest.approx(math.sqrt(3))
    assert abs(float(table[0]["jacobi_1"])) < 1e-15
    code, out, _ = run(["transform", "--to", "spherical", "--N", "3", "--in", str(pts)], capsys)
    assert code == EXIT_OK
    assert rows(out)[1]["flag"] == "error:origin"
    monkeypatch.setattr("sys.stdin", io.StringIO("0 2 0\n"))
    code, out, _ = run(["transform", "--from", "jacobi", "--to", "parabolic", "--N", "3"], capsys)
    r = rows(out)[0]
    assert float(r["parabolic_0"]) == pytest.approx(2.0) and float(r["parabolic_1"]) == pytest.approx(2.0)
    pts.write_text("1 2\n")
    assert run(["transform", "--N", "3", "--in", str(pts)], capsys)[0] == EXIT_CONFIG
    assert run(["transform", "--to", "elliptic", "--N", "3", "--random", "2"], capsys)[0] == EXIT_CONFIG


def test_transform_round_trip_file(tmp_path, capsys):
    code, out, _ = run(["transform", "--random", "20", "--seed", "5", "--N", "5", "--to", "elliptic", "--a", "0.4"], capsys)
    assert code == EXIT_OK
    fwd = rows(out)
    coords = [[float(r[f"elliptic_{k}"]) for k in range(5)] for r in fwd]
    src = tmp_path / "ell.csv"
    src.write_text("\n".join(",".join(repr(v) for v in c) for c in coords) + "\n")
    code, out, _ = run(["transform", "--from", "elliptic", "--to", "cartesian", "--a", "0.4", "--N", "5", "--in", str(src)], capsys)
    back = [[float(r[f"cartesian_{k}"]) for k in range(5)] for r in rows(out)]
    import numpy as np

    orig = np.random.default_rng(5).normal(size=(20, 5))
    assert np.max(np.abs(np.array(back) - orig)) < 1e-11


def test_module_entry_point():
    proc = subprocess.run(
        [sys.executable, "-m", "dunkl_lab", "verify", "--suite", "cherednik", "--N", "2", "--g", "1"],
        capture_output=True,
        text=True,
    )
    assert proc.returncode == 0
    assert json.loads(proc.stdout)["suite"] == "cherednik"
