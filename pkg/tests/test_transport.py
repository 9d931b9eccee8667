import json
import math
from types import SimpleNamespace

import numpy as np
import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

from cmclab.charts import CylinderChart, RigidMotion, SphereChart
from cmclab.cousin import integrate_cousin
from cmclab.delaunay import UnduloidConfig, neck_circle, symmetry_curves, unduloid_profile
from cmclab.errors import InvalidInput, InvalidPath
from cmclab.patch import GridSpec, build_patch, line_nodes, make_path, node_path, polyline_nodes, rectangle_loop
from cmclab.quatgeo import rotation_angle, rotation_matrices
from cmclab.transport import (classify, crosscheck_cousin_transport, holonomy, pole_solutions,
                              rotation_map_harmonicity, transport, transport_grid, write_holonomy_json,
                              write_polygon_csv)

PI = math.pi
E3 = np.array([0.0, 0.0, 1.0])


def config(n, periods=1):
    return UnduloidConfig(unduloid_profile(n, periods))


@pytest.fixture(scope="module")
def cyl():
    cfg = config(PI)
    return cfg, cfg.patch(8)


@pytest.fixture(scope="module")
def und():
    cfg = config(1.0)
    return cfg, cfg.patch(16)


def test_meridian_keeps_e3(cyl):
    cfg, p = cyl
    for g in symmetry_curves(cfg, p):
        r = transport(p, g, E3)
        assert np.allclose(r.eps, E3, atol=1e-14)


def test_full_neck_circle_returns(cyl):
    cfg, p = cyl
    r = transport(p, neck_circle(cfg, p), E3)
    assert np.allclose(r.end, E3, atol=1e-12)
    assert np.allclose(r.lift[-1], [-1, 0, 0, 0], atol=1e-12)


def test_quarter_neck_circle_rotates_by_right_angle(cyl):
    cfg, p = cyl
    i0, j0 = 0, p.grid.index_of(y=0.0)
    path = node_path(p, line_nodes((i0, j0), (i0, p.grid.index_of(y=PI / 2))))
    assert path.length == pytest.approx(PI / 4)
    r = transport(p, path, E3)
    # spin at speed 2 about the axis e1 over length pi/4
    assert np.allclose(r.end, [0.0, -1.0, 0.0], atol=1e-12)
    assert math.isclose(rotation_angle(rotation_matrices(r.lift[-1])), PI / 2, rel_tol=1e-12)


@settings(max_examples=15, deadline=None)
@given(st.tuples(*(st.floats(-2, 2, allow_nan=False),) * 3), st.integers(1, 16), st.integers(1, 16))
def test_norm_and_angles_conserved(v, i, j):
    cfg = config(1.0)
    p = cfg.patch(8)
    a = np.array(v)
    path = node_path(p, polyline_nodes([(0, 0), (i, 0), (i, j)]))
    ra, rb = transport(p, path, a), transport(p, path, [0.0, 1.0, 0.0])
    assert ra.norm_drift < 1e-12 * max(1.0, np.linalg.norm(a))
    # the solution operator is a rotation: inner products are preserved
    assert np.allclose(np.sum(ra.eps * rb.eps, axis=1), a[1], atol=1e-12)


def test_rigid_motion_equivariance(und):
    cfg, p = und
    c, s = math.cos(0.4), math.sin(0.4)
    Q = np.array([[1, 0, 0], [0, c, -s], [0, s, c]]) @ np.array([[c, 0, s], [0, 1, 0], [-s, 0, c]])
    q = build_patch(RigidMotion(p.chart, Q, [1.0, 2.0, 3.0]), p.grid)
    path = node_path(p, polyline_nodes([(2, 3), (20, 3), (20, 30)]))
    e0 = np.array([0.3, -0.2, 0.9])
    a = transport(p, path, e0).eps
    b = transport(q, path, Q @ e0).eps
    assert np.allclose(b, a @ Q.T, atol=1e-12)


def test_transport_input_checks(und):
    cfg, p = und
    path = node_path(p, line_nodes((0, 0), (4, 0)))
    with pytest.raises(InvalidInput):
        transport(p, path, [1.0, 0.0])
    with pytest.raises(InvalidPath):
        make_path(p, [(0.0, 0.0), (p.grid.x1 + 1.0, 0.0)])


def test_holonomy_needs_closed_loop(und):
    cfg, p = und
    with pytest.raises(InvalidPath):
        holonomy(p, node_path(p, line_nodes((0, 0), (4, 0))))


def test_unduloid_loops_are_flat(und):
    cfg, p = und
    for loop in (rectangle_loop(p, 2, 6, 3, 9), rectangle_loop(p, 4, 28, 4, 28)):
        h = holonomy(p, loop)
        assert h.angle < 1e-5


@pytest.mark.parametrize("n", [1.0, PI / 2])
def test_neck_circle_spins_by_twice_its_length(n):
    # not contractible: speed 2 along a circle of length n
    cfg = config(n)
    p = cfg.patch(16)
    assert holonomy(p, neck_circle(cfg, p, 1)).angle == pytest.approx(2 * n, abs=1e-8)


def test_sphere_radius_two_loops_are_not_flat():
    angles = []
    for n in (32, 64):
        p = build_patch(SphereChart(2.0), GridSpec.cells((-0.6, 0.6), (0.0, 2 * PI), n, period=(None, 2 * PI)))
        angles.append(holonomy(p, rectangle_loop(p, n // 4, 3 * n // 4, n // 4, 3 * n // 4)).angle)
    assert min(angles) > 0.05
    assert abs(angles[0] - angles[1]) < 1e-4


def test_holonomy_json(und, tmp_path):
    cfg, p = und
    h = holonomy(p, rectangle_loop(p, 2, 6, 3, 9, label="cell"))
    write_holonomy_json(h, tmp_path / "h.json", 1e-5)
    d = json.loads((tmp_path / "h.json").read_text())
    assert d["loop_id"] == "cell" and d["pass"] is True
    assert len(d["quaternion_lift"]) == 4


def test_transport_grid_is_path_independent_on_cmc(und):
    cfg, p = und
    e0 = np.array([0.0, 0.6, 0.8])
    a = transport_grid(p, e0, order="xy")
    b = transport_grid(p, e0, order="yx")
    assert np.max(np.linalg.norm(a - b, axis=-1)) < 1e-5


def test_crosscheck_cylinder_meridian():
    # the cousin side carries the O(h^4) error of its RK4 sweep; h = 1/64 here
    p = build_patch(CylinderChart(), GridSpec.cells((0.0, 2.0), (0.0, 1.0), 128, 64))
    c = integrate_cousin(p)
    path = node_path(p, line_nodes((0, 16), (128, 16)))
    assert crosscheck_cousin_transport(p, c, path, [0.2, 0.5, -0.4]) < 1e-8
    assert crosscheck_cousin_transport(p, c, path, [0.0, 0.0, 0.0]) == 0.0


def test_crosscheck_unduloid_mixed_path_converges():
    d = []
    for m in (8, 16):
        cfg = config(1.0)
        p = cfg.patch(m)
        c = integrate_cousin(p)
        nt = p.grid.nx - 1
        path = node_path(p, polyline_nodes([(0, m // 2), (nt // 2, m // 2), (nt // 2, 3 * m // 2)]))
        d.append(crosscheck_cousin_transport(p, c, path, [0.3, -0.1, 0.5]))
    assert d[0] / d[1] >= 3.5


def test_crosscheck_needs_node_paths(und):
    cfg, p = und
    c = integrate_cousin(p)
    path = make_path(p, [(0.01, 0.0), (0.5, 0.0)])
    with pytest.raises(InvalidPath):
        crosscheck_cousin_transport(p, c, path, E3)


def test_cylinder_poles_antipodal_and_tangential():
    poles = pole_solutions(config(PI), m=16)
    assert np.linalg.norm(poles.poles[0] + poles.poles[1]) < 1e-8
    for F in poles.fields:
        normal = np.abs(np.sum(F * config(PI).patch(16).nu, axis=-1))[poles.half]
        assert normal.max() < 1e-6


@pytest.mark.parametrize("n", [1.0, PI / 2])
def test_pole_distance_is_necksize(n):
    poles = pole_solutions(config(n), m=16)
    assert abs(poles.distances[0, 1] - n) < 1e-5


def test_pole_relation_independent_of_truncation():
    cfg = config(1.0, 2)
    p = cfg.patch(16)
    a = pole_solutions(cfg, p, (0, 1)).distances[0, 1]
    b = pole_solutions(cfg, p, (1, 2)).distances[0, 1]
    c = pole_solutions(cfg, p, (0, 2)).distances[0, 1]
    assert np.allclose([a, b, c], 1.0, atol=1e-5)


def test_pole_along_full_period_turns_once(und):
    cfg, p = und
    g1, _ = symmetry_curves(cfg, p)
    r = transport(p, g1, E3)
    assert np.allclose(r.eps, E3, atol=1e-12)
    # total rotation 2 pi: trivial in SO(3), lift -1
    assert np.allclose(r.lift[-1], [-1, 0, 0, 0], atol=1e-6)


def test_pole_solutions_need_a_configuration(und):
    with pytest.raises(InvalidInput):
        pole_solutions(und[1])


def test_classify(tmp_path):
    poly = classify(config(PI), m=16)
    assert np.allclose(poly.edge_lengths, [PI, PI], atol=1e-8)
    assert np.allclose(poly.vertices[0], E3)
    poly = classify(config(1.0), m=16)
    assert np.allclose(poly.edge_lengths, 1.0, atol=1e-5)
    assert poly.vertices[1][1] == pytest.approx(0.0, abs=1e-12) and poly.vertices[1][0] >= 0
    write_polygon_csv(poly, tmp_path / "poly.csv")
    rows = np.loadtxt(tmp_path / "poly.csv", delimiter=",", skiprows=1)
    assert rows.shape == (2, 5)


def test_classify_rejects_degenerate_necksize():
    with pytest.raises(InvalidInput):
        classify(config(1e-4))


@pytest.mark.parametrize("chart,xr", [(CylinderChart(), (0.0, 1.0)), (SphereChart(), (-0.5, 0.5))])
def test_rotation_map_harmonicity_second_order(chart, xr):
    r = []
    for n in (8, 16, 32):
        p = build_patch(chart, GridSpec.cells(xr, (0.0, 1.0), n))
        r.append(float(np.nanmax(rotation_map_harmonicity(p, integrate_cousin(p)))))
    for a, b in zip(r[:-1], r[1:]):
        assert 3.5 <= a / b <= 4.5


def test_rotation_map_harmonicity_constant_map():
    p = build_patch(CylinderChart(), GridSpec.cells((0.0, 1.0), (0.0, 1.0), 8))
    c = SimpleNamespace(ftilde=np.tile([0.5, 0.5, 0.5, 0.5], p.shape + (1,)))
    res = rotation_map_harmonicity(p, c)
    assert np.nanmax(res) == 0.0
