import csv
import math

import numpy as np
import pytest

from sinebody import bodies as bd
from sinebody import harness as hz
from sinebody import quadrature as q
from sinebody.geometry import unit_ball_volume as W


@pytest.fixture(scope="module")
def rule32():
    return q.build_rule(3, 32)


def test_lp_sine_bs_ball_equality(rule32, ball3):
    rep = hz.verify_lp_sine_bs(ball3, 2.0, rule32)
    assert rep.passed and rep.equality
    assert rep.ratio == pytest.approx(1.0, abs=1e-9)
    assert rep.rhs == pytest.approx(W(3) ** 2, rel=1e-14)


def test_lp_sine_bs_ball_p1_with_rotated_outer(rule32, ball3):
    rep = hz.verify_lp_sine_bs(ball3, 1.0, rule32)
    assert rep.passed
    assert rep.ratio == pytest.approx(1.0, abs=2e-6)
    assert "rot" in rep.rule or rep.rule == rule32.spec


def test_lp_sine_bs_spheroid_strict(rule32, spheroid):
    rep = hz.verify_lp_sine_bs(spheroid, 2.0, rule32)
    assert rep.passed and not rep.equality
    assert rep.ratio == pytest.approx(0.8, abs=2e-3)


def test_sine_bs_values(rule32, ball3, bicylinder):
    rep = hz.verify_sine_bs(ball3, rule32)
    assert rep.passed and rep.equality
    assert rep.ratio == pytest.approx(1.0, abs=1e-9)
    rep = hz.verify_sine_bs(bicylinder, rule32)
    assert rep.passed and not rep.equality
    assert rep.ratio == pytest.approx(0.5436, abs=2e-3)


def test_sine_bs_box2():
    rule = q.build_rule(2, 8192)
    rep = hz.verify_sine_bs(bd.Box([1.0, 1.0]), rule)
    assert rep.passed
    assert rep.ratio == pytest.approx(8 / math.pi ** 2, abs=1e-6)


def test_polar_dominates(rule32, bicylinder, tricylinder, ball3):
    for K in (bicylinder, tricylinder):
        rep = hz.verify_polar_dominates_diamond(K, rule32)
        assert rep.passed
        assert rep.ratio < 1.0
    rep = hz.verify_polar_dominates_diamond(ball3, rule32)
    assert rep.passed and rep.ratio == pytest.approx(1.0, abs=1e-9)
    with pytest.raises(ValueError):
        hz.verify_polar_dominates_diamond(bd.Box([1.0] * 3), rule32)


def test_double_integral_equality_and_strict(rule32, ball3, spheroid):
    rep = hz.verify_double_integral_ineq(ball3, ball3, 2.0, 20000, 42, rule32)
    assert rep.passed and rep.equality
    rep = hz.verify_double_integral_ineq(ball3, spheroid, 2.0, 20000, 42, rule32)
    assert rep.passed and not rep.equality
    assert rep.lhs > rep.rhs  # strict by a wide margin


def test_double_integral_guards(rule32, ball3):
    with pytest.raises(ValueError):
        hz.verify_double_integral_ineq(ball3, ball3, 2.0, 100, 42, rule32)


def test_sampler_statistics(ball3, rng):
    pts = hz._sample_body(ball3, 50000, rng, 1.01)
    assert np.max(np.linalg.norm(pts, axis=1)) <= 1.0 + 1e-12
    # uniformity: mean squared radius of uniform ball samples is n/(n+2)
    msr = float(np.mean(np.einsum("ij,ij->i", pts, pts)))
    assert msr == pytest.approx(3 / 5, abs=5e-3)


def test_spherical_function_equality_case(rule32):
    ones = np.ones(len(rule32))
    rep = hz.verify_spherical_function_ineq(ones, ones, 2.0, rule32)
    assert rep.passed
    assert rep.ratio == pytest.approx(1.0, abs=1e-8)


def test_spherical_function_strict_case(rule32, spheroid):
    f = spheroid.radial_batch(rule32.nodes) ** 5
    rep = hz.verify_spherical_function_ineq(f, f, 2.0, rule32)
    assert rep.passed and rep.lhs > rep.rhs * 1.01


def test_spherical_function_zero_case(rule32):
    z = np.zeros(len(rule32))
    rep = hz.verify_spherical_function_ineq(z, z, 2.0, rule32)
    assert rep.passed and rep.lhs == 0.0 and rep.rhs == 0.0


def test_sup_bracket_cases(rule32, ball3, spheroid):
    rep = hz.verify_sup_bracket_ineq(ball3, ball3, rule32)
    assert rep.passed and rep.equality
    assert rep.lhs == pytest.approx(1.0, abs=1e-9)
    big = bd.Ball(3, 2.0), bd.Ball(3, 3.0)
    rep = hz.verify_sup_bracket_ineq(big[0], big[1], rule32)
    assert rep.passed
    assert rep.lhs == pytest.approx(6.0, rel=1e-9)
    from sinebody.polarity import sine_polar
    rep = hz.verify_sup_bracket_ineq(spheroid, sine_polar(spheroid), rule32)
    assert rep.passed
    assert rep.lhs == pytest.approx(1.0, abs=1e-6)


def test_report_invariants(rule32, ball3):
    rep = hz.verify_lp_sine_bs(ball3, 2.0, rule32)
    assert math.isfinite(rep.ratio)
    assert rep.passed == (rep.ratio <= 1 + rep.tol)
    assert rep.wall_ms >= 0.0


def test_suite_runs_and_aggregates(tmp_path):
    config = {
        "dim": 3, "rule": "gauss:16", "seed": 42, "p_grid": [1.0, 2.0],
        "bodies": ["ball", "spheroid"],
        "checks": ["lp_sine_bs", "sine_bs", "fubini", "iterated",
                   "spherical_function", "bogus_check"],
    }
    reports = hz.run_suite(config)
    names = {r.name for r in reports}
    assert "lp_sine_blaschke_santalo" in names
    assert "bogus_check" in names  # aggregated as a failed row
    bogus = [r for r in reports if r.name == "bogus_check"][0]
    assert not bogus.passed and "unknown check" in bogus.note
    good = [r for r in reports if r.name != "bogus_check"]
    assert all(r.passed for r in good)


def test_suite_deterministic_and_csv(tmp_path):
    config = {
        "dim": 3, "rule": "gauss:12", "seed": 7, "p_grid": [2.0],
        "bodies": ["ball", "spheroid"],
        "checks": ["lp_sine_bs", "double_integral"],
        "mc_samples": 20000,
    }
    r1 = hz.run_suite(config)
    r2 = hz.run_suite(config)
    for a, b in zip(r1, r2):
        assert a.row()[:-1] == b.row()[:-1]  # identical apart from wall time
    p1, p2 = tmp_path / "a.csv", tmp_path / "b.csv"
    hz.write_csv(r1, p1, timing=False)
    hz.write_csv(r2, p2, timing=False)
    assert p1.read_bytes() == p2.read_bytes()
    with open(p1) as fh:
        rows = list(csv.reader(fh))
    assert rows[0] == hz.CSV_COLUMNS
    assert len(rows) == len(r1) + 1


def test_refinement_monotone():
    rep = hz._refinement_report(q.build_rule(3, 24), 3)
    assert rep.passed
    assert rep.lhs < rep.rhs  # finer rule, smaller error


def test_standard_zoo():
    zoo3 = hz.standard_zoo(3)
    assert set(zoo3) == {"ball", "spheroid", "box", "bicylinder", "tricylinder"}
    zoo2 = hz.standard_zoo(2)
    assert set(zoo2) == {"ball", "ellipse", "box"}
    with pytest.raises(ValueError):
        hz.standard_zoo(4)


def test_equality_flags_only_on_extremizers(rule32, spheroid, ball3):
    strict = hz.verify_lp_sine_bs(spheroid, 2.0, rule32)
    eq = hz.verify_lp_sine_bs(ball3, 2.0, rule32)
    assert eq.equality and not strict.equality
