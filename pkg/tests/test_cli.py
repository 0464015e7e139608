import csv
import json
import math

import numpy as np
import pytest

from sinebody.cli import main


@pytest.fixture()
def ball_file(tmp_path):
    p = tmp_path / "ball.json"
    p.write_text(json.dumps({"dim": 3, "kind": "ball", "radius": 1.0}))
    return str(p)


@pytest.fixture()
def bicylinder_file(tmp_path):
    p = tmp_path / "bicyl.json"
    p.write_text(json.dumps({
        "dim": 3, "kind": "cylinders",
        "cylinders": [{"axis": [1, 0, 0], "radius": 1.0},
                      {"axis": [0, 1, 0], "radius": 1.0}]}))
    return str(p)


@pytest.fixture()
def spheroid_file(tmp_path):
    p = tmp_path / "spheroid.json"
    p.write_text(json.dumps({"dim": 3, "kind": "ellipsoid", "semiaxes": [1, 1, 2]}))
    return str(p)


def test_volume_ball(ball_file, capsys):
    assert main(["volume", "--body", ball_file, "--rule", "gauss:24"]) == 0
    out = capsys.readouterr().out
    assert "4.188790" in out
    assert "gauss:24x48" in out


def test_volume_bicylinder(bicylinder_file, capsys):
    assert main(["volume", "--body", bicylinder_file, "--rule", "gauss:64"]) == 0
    v = float(capsys.readouterr().out.split("=")[1].split()[0])
    assert abs(v - 16 / 3) < 0.006


def test_invalid_descriptor_exit_code(tmp_path, capsys):
    p = tmp_path / "bad.json"
    p.write_text(json.dumps({
        "dim": 3, "kind": "cylinders",
        "cylinders": [{"axis": [1, 0, 0], "radius": 1.0},
                      {"axis": [-1, 0, 0], "radius": 1.0}]}))
    assert main(["volume", "--body", str(p)]) == 2
    err = capsys.readouterr().err
    assert "cylinders.axis" in err


def test_sine_polar_ball(ball_file, tmp_path, capsys):
    out = tmp_path / "polar.csv"
    assert main(["sine-polar", "--body", ball_file, "--rule", "gauss:8",
                 "--out", str(out)]) == 0
    lines = out.read_text().strip().splitlines()
    assert lines[0] == "u1,u2,u3,rho_sine_polar"
    assert lines[-1].startswith("# volume,")
    rho = [float(l.split(",")[-1]) for l in lines[1:-1]]
    assert all(abs(r - 1.0) < 1e-9 for r in rho)


def test_sine_polar_spheroid_values(spheroid_file, tmp_path):
    out = tmp_path / "polar.csv"
    assert main(["sine-polar", "--body", spheroid_file, "--rule", "gauss:16",
                 "--out", str(out)]) == 0
    rows = [l.split(",") for l in out.read_text().strip().splitlines()[1:-1]]
    for row in rows:
        u = np.array([float(row[0]), float(row[1]), float(row[2])])
        expect = 1.0 / math.sqrt(4 * (u[0] ** 2 + u[1] ** 2) + u[2] ** 2)
        assert float(row[3]) == pytest.approx(expect, rel=1e-9)


def test_centroid_ball(ball_file, tmp_path, capsys):
    out = tmp_path / "cent.csv"
    assert main(["centroid", "--body", ball_file, "--p", "2", "--rule", "gauss:16",
                 "--out", str(out)]) == 0
    msg = capsys.readouterr().out
    product = float(msg.split("=")[1].split()[0])
    assert product == pytest.approx(1.0, abs=1e-9)


def test_sweep_spheroid(spheroid_file, tmp_path):
    out = tmp_path / "sweep.csv"
    assert main(["sweep", "--body", spheroid_file, "--p-grid", "1,2,4",
                 "--rule", "gauss:16", "--out", str(out)]) == 0
    with open(out) as fh:
        rows = list(csv.reader(fh))
    assert rows[0][0] == "p"
    assert len(rows) == 4
    products = [float(r[3]) for r in rows[1:]]
    assert all(p <= 1.0 + 1e-9 for p in products)
    gaps = [float(r[5]) for r in rows[1:]]
    assert gaps[2] < gaps[0]  # approaching the sine polar body


def test_sweep_rejects_bad_grid(spheroid_file, tmp_path, capsys):
    assert main(["sweep", "--body", spheroid_file, "--p-grid", "2,1",
                 "--out", str(tmp_path / "x.csv")]) == 2


def test_verify_default_suite(tmp_path, capsys):
    out = tmp_path / "verify.csv"
    cfg = tmp_path / "cfg.json"
    cfg.write_text(json.dumps({
        "dim": 3, "rule": "gauss:12", "seed": 42, "p_grid": [2.0],
        "bodies": ["ball", "spheroid"],
        "checks": ["lp_sine_bs", "sine_bs", "iterated"]}))
    assert main(["verify", "--config", str(cfg), "--out", str(out)]) == 0
    text = capsys.readouterr().out
    assert "PASS" in text and "FAIL" not in text
    with open(out) as fh:
        rows = list(csv.reader(fh))
    assert rows[0][:3] == ["name", "n", "p"]
    # deterministic output bytes on identical invocation
    out2 = tmp_path / "verify2.csv"
    main(["verify", "--config", str(cfg), "--out", str(out2)])
    assert out.read_bytes() == out2.read_bytes()


def test_verify_exit_code_on_failure(tmp_path):
    out = tmp_path / "verify.csv"
    cfg = tmp_path / "cfg.json"
    cfg.write_text(json.dumps({
        "dim": 3, "rule": "gauss:12", "seed": 42, "p_grid": [2.0],
        "bodies": ["ball"], "checks": ["nope"]}))
    assert main(["verify", "--config", str(cfg), "--out", str(out)]) == 1


def test_verify_custom_body_pair(ball_file, spheroid_file, tmp_path, capsys):
    out = tmp_path / "pair.csv"
    assert main(["verify", "--body", ball_file, "--body2", spheroid_file,
                 "--rule", "gauss:24", "--out", str(out)]) == 0
    text = capsys.readouterr().out
    assert "sup_bracket_lower_bound" in text
    assert "ellipsoid(1,1,2)" in text


def test_missing_file_is_error(tmp_path, capsys):
    assert main(["volume", "--body", str(tmp_path / "nope.json")]) == 2
