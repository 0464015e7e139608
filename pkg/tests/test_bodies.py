import json
import math

import numpy as np
import pytest

from sinebody import bodies as bd
from sinebody import quadrature as q
from conftest import random_unit


def test_ball_radial_support(ball3):
    u = np.array([[0.6, 0.8, 0.0]])
    b = bd.Ball(3, 2.0)
    assert b.radial_batch(u)[0] == 2.0
    assert b.support_batch(u)[0] == 2.0


def test_ellipsoid_evaluators(spheroid):
    e3 = np.array([[0.0, 0.0, 1.0]])
    e1 = np.array([[1.0, 0.0, 0.0]])
    assert spheroid.radial_batch(e3)[0] == pytest.approx(2.0)
    assert spheroid.support_batch(e3)[0] == pytest.approx(2.0)
    assert spheroid.radial_batch(e1)[0] == pytest.approx(1.0)


def test_box_evaluators():
    b = bd.Box([1.0, 1.0])
    d = np.array([[1.0, 1.0]]) / math.sqrt(2)
    assert b.support_batch(d)[0] == pytest.approx(math.sqrt(2))
    assert b.radial_batch(d)[0] == pytest.approx(math.sqrt(2))
    assert b.radial(np.array([0.5, 0.0])) == pytest.approx(2.0)


def test_cylinder_set_radial(bicylinder):
    e3 = np.array([[0.0, 0.0, 1.0]])
    assert bicylinder.radial_batch(e3)[0] == pytest.approx(1.0)
    # direction along the first axis is capped by the second cylinder
    e1 = np.array([[1.0, 0.0, 0.0]])
    assert bicylinder.radial_batch(e1)[0] == pytest.approx(1.0)


def test_cylinder_set_membership(bicylinder):
    assert not bicylinder.contains([5.0, 0.0, 0.0])  # bracket against e2 is 5
    assert bicylinder.contains([0.9, 0.1, 0.1])
    assert bicylinder.contains([0.0, 0.0, 0.0])


def test_contains_ball():
    b = bd.Ball(3, 1.0)
    assert b.contains([0.5, 0, 0])
    assert not b.contains([1.5, 0, 0])


def test_radial_homogeneous_extension(bicylinder):
    u = random_unit(np.random.default_rng(3), 3)[0]
    assert bicylinder.radial(2.0 * u) == pytest.approx(
        bicylinder.radial(u) / 2.0, rel=1e-12)


def test_cylinder_set_validation():
    e = np.eye(3)
    with pytest.raises(bd.BodyValidationError, match="parallel"):
        bd.CylinderSet([e[0], -e[0]], [1.0, 1.0])
    with pytest.raises(bd.BodyValidationError, match="radius"):
        bd.CylinderSet([e[0], e[1]], [1.0, 0.0])
    with pytest.raises(bd.BodyValidationError):
        bd.CylinderSet([e[0]], [1.0])


def test_cylinder_set_support_values(bicylinder):
    # exact values from the square cross-section at z = 0
    e3 = np.array([[0.0, 0.0, 1.0]])
    d = np.array([[1.0, 1.0, 0.0]]) / math.sqrt(2)
    assert bicylinder.support_batch(e3)[0] == pytest.approx(1.0, abs=1e-8)
    assert bicylinder.support_batch(d)[0] == pytest.approx(math.sqrt(2), abs=1e-8)


def test_cylinder_set_support_dominates_samples(bicylinder, rng):
    # support must dominate inner products with boundary points
    U = random_unit(rng, 3, 64)
    h = bicylinder.support_batch(U)
    V = random_unit(rng, 3, 512)
    pts = bicylinder.radial_batch(V)[:, None] * V
    assert np.all(h >= (U @ pts.T).max(axis=1) - 1e-9)


def test_polar_ball():
    p = bd.polar(bd.Ball(3, 2.0))
    assert isinstance(p, bd.Ball)
    assert p.radius == pytest.approx(0.5)


def test_polar_ellipsoid(spheroid):
    p = bd.polar(spheroid)
    assert isinstance(p, bd.Ellipsoid)
    np.testing.assert_allclose(p.semiaxes, [1.0, 1.0, 0.5], atol=1e-14)


def test_polar_box_is_cross_polytope():
    p = bd.polar(bd.Box([1.0, 1.0]))
    d = np.array([[1.0, 1.0]]) / math.sqrt(2)
    assert p.radial_batch(d)[0] == pytest.approx(1 / math.sqrt(2), rel=1e-12)


def test_radial_support_duality(rng):
    zoo = [bd.Ball(3, 1.5), bd.Ellipsoid([1.0, 2.0, 0.5]), bd.Box([1.0, 0.5, 2.0])]
    U = random_unit(rng, 3, 32)
    for K in zoo:
        Kp = bd.polar(K)
        np.testing.assert_allclose(Kp.radial_batch(U) * K.support_batch(U), 1.0,
                                   atol=1e-12)


def test_double_polar_smooth(rng, spheroid):
    U = random_unit(rng, 3, 32)
    KK = bd.polar(bd.polar(spheroid))
    np.testing.assert_allclose(KK.radial_batch(U), spheroid.radial_batch(U),
                               atol=1e-10)


def test_double_polar_generic_box(rng):
    K = bd.Box([1.0, 1.0, 1.0])
    KK = bd._PolarBody(bd._PolarBody(K))
    U = random_unit(rng, 3, 16)
    np.testing.assert_allclose(KK.radial_batch(U), K.radial_batch(U), atol=1e-7)


def test_polar_scaling(rng):
    K = bd.Ellipsoid([1.0, 2.0])
    cK = bd.linear_image(K, bd.LinearMap(3.0 * np.eye(2)))
    U = random_unit(rng, 2, 16)
    np.testing.assert_allclose(bd.polar(cK).radial_batch(U),
                               bd.polar(K).radial_batch(U) / 3.0, atol=1e-13)


def test_polar_of_linear_image(rng):
    K = bd.Ellipsoid([1.0, 1.0, 2.0])
    phi = bd.LinearMap(np.array([[1.0, 0.3, 0.0], [0.0, 1.0, -0.2], [0.1, 0.0, 1.0]]))
    lhs = bd.polar(bd.linear_image(K, phi))
    rhs = bd.linear_image(bd.polar(K), bd.LinearMap(phi.inverse.T))
    U = random_unit(rng, 3, 32)
    np.testing.assert_allclose(lhs.radial_batch(U), rhs.radial_batch(U), rtol=1e-12)


def test_linear_image_examples(rng):
    b = bd.Ball(2, 1.0)
    stretched = bd.linear_image(b, bd.LinearMap(np.diag([1.0, 2.0])))
    e2 = np.array([[0.0, 1.0]])
    assert stretched.radial_batch(e2)[0] == pytest.approx(2.0, rel=1e-13)
    # rotation leaves an ellipse-with-equal-axes pointwise fixed
    O = np.array([[0.0, -1.0], [1.0, 0.0]])
    rot = bd.linear_image(bd.Ellipsoid([1.0, 1.0]), bd.LinearMap(O))
    U = random_unit(rng, 2, 8)
    np.testing.assert_allclose(rot.radial_batch(U), 1.0, atol=1e-13)
    doubled = bd.linear_image(b, bd.LinearMap(2 * np.eye(2)))
    np.testing.assert_allclose(doubled.radial_batch(U), 2.0, atol=1e-13)


def test_linear_map_validation():
    with pytest.raises(ValueError, match="singular"):
        bd.LinearMap(np.array([[1.0, 2.0], [2.0, 4.0]]))
    with pytest.raises(ValueError):
        bd.LinearMap(np.ones((2, 3)))


def test_radial_table_roundtrip_ellipse():
    theta = 2 * math.pi * np.arange(128) / 128
    nodes = np.column_stack([np.cos(theta), np.sin(theta)])
    ell = bd.Ellipsoid([1.0, 2.0])
    tab = bd.RadialTable(nodes, ell.radial_batch(nodes))
    probe = 2 * math.pi * (np.arange(64) + 0.31) / 64
    U = np.column_stack([np.cos(probe), np.sin(probe)])
    np.testing.assert_allclose(tab.radial_batch(U), ell.radial_batch(U), rtol=2e-3)


def test_radial_table_symmetrizes():
    # only half the circle given: antipodes are filled in automatically
    theta = math.pi * np.arange(8) / 8
    nodes = np.column_stack([np.cos(theta), np.sin(theta)])
    tab = bd.RadialTable(nodes, np.full(8, 1.5))
    assert tab.contains([-1.4, 0.0])
    assert tab.radial([0.0, -1.0]) == pytest.approx(1.5)


def test_radial_table_validation():
    nodes = np.eye(3)
    with pytest.raises(bd.BodyValidationError, match="values"):
        bd.RadialTable(np.vstack([nodes, -nodes]), [1, 1, 1, 1, 1, 0])
    with pytest.raises(bd.BodyValidationError, match="interpolation"):
        bd.RadialTable(np.vstack([nodes, -nodes]), np.ones(6), "linear")


def test_radial_table_nearest_3d():
    r = q.build_rule(3, 8)
    tab = bd.RadialTable(r.nodes, np.full(len(r), 2.0))
    assert tab.radial([0.3, 0.4, 0.5]) > 0
    with pytest.raises(NotImplementedError):
        tab.support([1.0, 0, 0])


def test_json_roundtrip(tmp_path, bicylinder, spheroid):
    for body in (bd.Ball(3, 1.5), spheroid, bd.Box([1.0, 2.0]), bicylinder):
        path = tmp_path / "b.json"
        path.write_text(json.dumps(bd.body_to_dict(body)))
        loaded = bd.load_body_file(path)
        U = random_unit(np.random.default_rng(0), body.dim, 16)
        np.testing.assert_allclose(loaded.radial_batch(U), body.radial_batch(U),
                                   rtol=1e-12)


def test_loader_diagnostics(tmp_path):
    bad = {"dim": 3, "kind": "cylinders",
           "cylinders": [{"axis": [0, 0], "radius": 1.0},
                         {"axis": [0, 1, 0], "radius": 1.0}]}
    path = tmp_path / "bad.json"
    path.write_text(json.dumps(bad))
    with pytest.raises(bd.BodyValidationError, match=r"cylinders\[0\].axis"):
        bd.load_body_file(path)
    path.write_text("{not json")
    with pytest.raises(bd.BodyValidationError, match="line"):
        bd.load_body_file(path)
    path.write_text(json.dumps({"dim": 3, "kind": "blob"}))
    with pytest.raises(bd.BodyValidationError, match="kind"):
        bd.load_body_file(path)
    path.write_text(json.dumps({"dim": 1, "kind": "ball", "radius": 1.0}))
    with pytest.raises(bd.BodyValidationError, match="dim"):
        bd.load_body_file(path)


def test_loader_normalizes_axes(tmp_path):
    data = {"dim": 3, "kind": "cylinders",
            "cylinders": [{"axis": [2.0, 0, 0], "radius": 1.0},
                          {"axis": [0, 3.0, 0], "radius": 1.0}]}
    path = tmp_path / "c.json"
    path.write_text(json.dumps(data))
    K = bd.load_body_file(path)
    np.testing.assert_allclose(np.linalg.norm(K.axes, axis=1), 1.0, atol=1e-15)
