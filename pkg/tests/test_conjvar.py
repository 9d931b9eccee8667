import json
import math
import warnings

import numpy as np
import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

from cmclab.charts import CatenoidChart, CylinderChart, SphereChart, rotated
from cmclab.conjvar import (JACOBI_TOL, alternating_sums, conjugate_field, conjugate_variation,
                            conjugate_variation_grid, conjugate_variation_minimal, cylindrical_strings, heights,
                            heights_json, parity_split, pole_relation_residual, symmetry_evolution_residual,
                            t_map, write_heights_json)
from cmclab.delaunay import UnduloidConfig, symmetry_curves, unduloid_profile
from cmclab.errors import InvalidCurve, InvalidInput
from cmclab.patch import GridSpec, build_patch, jacobi_residual, line_nodes, node_path, polyline_nodes
from cmclab.transport import pole_solutions, transport

PI = math.pi
E1, E2, E3 = np.eye(3)
EPS0 = np.array([0.1, 0.2, -0.3])


def config(n, periods=1):
    return UnduloidConfig(unduloid_profile(n, periods))


@pytest.fixture(scope="module")
def und():
    cfg = config(1.0)
    return cfg, cfg.patch(16)


@pytest.fixture(scope="module")
def cyl():
    cfg = config(PI)
    return cfg, cfg.patch(16)


def central(a):
    nx, ny = a.shape[:2]
    return float(np.nanmax(np.abs(a[nx // 4: 3 * nx // 4 + 1, ny // 4: 3 * ny // 4 + 1])))


def l_path(p):
    nx, ny = p.shape
    return node_path(p, polyline_nodes([(nx // 4, ny // 4), (3 * nx // 4, ny // 4), (3 * nx // 4, 3 * ny // 4)]))


def catenoid(n):
    return build_patch(CatenoidChart(), GridSpec.cells((-1.0, 1.0), (-0.5 * PI, 1.5 * PI), n // 2, n))


# -- the variation field ---------------------------------------------------------

def test_zero_field_reduces_to_transport(und):
    _, p = und
    path = l_path(p)
    a = conjugate_variation(p, 0, path, EPS0).eps
    b = transport(p, path, EPS0).eps
    assert np.max(np.abs(a - b)) < 1e-12


def test_cylinder_axis_translation_is_homogeneous(cyl):
    _, p = cyl
    u = p.normal_component(E1)
    assert np.max(np.abs(u)) < 1e-15
    path = l_path(p)
    assert np.allclose(conjugate_variation(p, u, path, EPS0).eps, transport(p, path, EPS0).eps, atol=1e-12)


def test_two_path_discrepancy_shrinks(und):
    cfg = und[0]
    d = []
    for m in (16, 32):
        p = cfg.patch(m)
        nx, ny = p.shape
        a0, a1, b0, b1 = nx // 4, 3 * nx // 4, ny // 4, 3 * ny // 4
        u = p.normal_component(E3)
        A = node_path(p, polyline_nodes([(a0, b0), (a1, b0), (a1, b1)]))
        B = node_path(p, polyline_nodes([(a0, b0), (a0, b1), (a1, b1)]))
        d.append(np.linalg.norm(conjugate_variation(p, u, A, EPS0).end - conjugate_variation(p, u, B, EPS0).end))
    assert 3.5 <= d[0] / d[1] <= 4.5


def test_grid_field_matches_path_field(und):
    _, p = und
    u = p.normal_component(E3)
    v = conjugate_variation_grid(p, u, EPS0, base=(4, 8))
    path = node_path(p, polyline_nodes([(4, 8), (20, 8), (20, 24)]))
    w = conjugate_variation(p, u, path, EPS0)
    assert np.allclose(v.eps[20, 24], w.end, atol=1e-12)
    assert v.on_grid and not w.on_grid
    with pytest.raises(InvalidInput):
        v.end


def test_pole_multiple_is_tangential_on_cylinder(cyl):
    cfg, p = cyl
    poles = pole_solutions(cfg, p, m=16)
    iq, j0 = poles.q_index
    v = conjugate_variation_grid(p, 0, 2.5 * E3, base=(iq, j0))
    ut = conjugate_field(v)
    assert np.max(np.abs(ut[poles.half])) < 1e-6


def test_conjugate_field_is_a_jacobi_field(und):
    cfg = und[0]
    r = []
    for m in (16, 32):
        p = cfg.patch(m)
        v = conjugate_variation_grid(p, p.normal_component(E3), EPS0, base=(p.grid.nx // 2, p.grid.ny // 2))
        r.append(central(jacobi_residual(p, conjugate_field(v))))
    assert 3.5 <= r[0] / r[1] <= 4.5


def test_conjugate_field_along_path(und):
    _, p = und
    v = conjugate_variation(p, 0, l_path(p), E3)
    nu = p.nu[[p.shape[0] // 4], [p.shape[1] // 4]][0]
    assert conjugate_field(v)[0] == pytest.approx(float(nu @ E3), abs=1e-12)


def test_zero_data_gives_zero_field(und):
    _, p = und
    v = conjugate_variation_grid(p, 0, (0.0, 0.0, 0.0))
    assert np.all(conjugate_field(v) == 0.0)


def test_refuses_non_jacobi_fields(und):
    _, p = und
    X, Y = p.grid.mesh()
    with pytest.raises(InvalidInput, match="Jacobi"):
        conjugate_variation(p, np.cos(3 * X) * np.sin(Y), l_path(p))
    # the gate can be switched off
    conjugate_variation(p, np.cos(3 * X) * np.sin(Y), l_path(p), check_jacobi=False)
    assert JACOBI_TOL < 1


def test_needs_curvature_coordinates_and_unit_mean_curvature():
    p = build_patch(SphereChart(2.0), GridSpec.cells((-0.5, 0.5), (0.0, 1.0), 8))
    path = node_path(p, line_nodes((0, 0), (8, 0)))
    with pytest.raises(InvalidInput):
        conjugate_variation(p, 0, path)
    # H = 1 but not in curvature coordinates
    q = build_patch(rotated(CylinderChart(), PI / 4), GridSpec.cells((0, 1), (0, 1), 8))
    assert q.is_conformal and not q.is_curvature_coords
    with pytest.raises(InvalidInput, match="curvature coordinates"):
        conjugate_variation(q, 0, node_path(q, line_nodes((0, 0), (8, 0))))


def test_field_shape_checked(und):
    _, p = und
    with pytest.raises(InvalidInput):
        conjugate_variation(p, np.zeros((4, 4)), l_path(p))


# -- minimal variant -------------------------------------------------------------

def test_catenoid_zero_field_keeps_eps_constant():
    p = catenoid(16)
    v = conjugate_variation_grid(p, 0, EPS0, minimal=True)
    assert np.allclose(v.eps, EPS0, atol=1e-15)


def test_catenoid_conjugate_field_converges():
    r, s = [], []
    for n in (32, 64):
        p = catenoid(n)
        u = p.normal_component(E3)
        j0, jpi = p.grid.index_of(y=0.0), p.grid.index_of(y=PI)
        ut = conjugate_field(conjugate_variation_grid(p, u, base=(p.grid.nx // 2, j0), minimal=True))
        r.append(central(jacobi_residual(p, ut)))
        s.append(float(np.max(np.abs(ut[:, jpi]))))
        # the even field vanishes on the base symmetry line
        assert np.max(np.abs(ut[:, j0])) < 1e-12
    assert 3.5 <= r[0] / r[1] <= 4.5
    assert s[0] / s[1] > 3.5


def test_minimal_variant_rejects_cmc_patch(und):
    _, p = und
    with pytest.raises(InvalidInput):
        conjugate_variation_minimal(p, 0, l_path(p))
    c = catenoid(16)
    with pytest.raises(InvalidInput):
        conjugate_variation(c, 0, l_path(c))


# -- heights ---------------------------------------------------------------------

def test_cylinder_heights_vanish(cyl):
    cfg, p = cyl
    for g in symmetry_curves(cfg, p):
        for e in (E1, E2, E3):
            assert abs(heights(p, p.normal_component(e), g)) < 1e-10


def test_zero_field_heights(und):
    cfg, p = und
    assert heights(p, 0, symmetry_curves(cfg, p)[0]) == 0.0
    assert heights(p, 0, symmetry_curves(cfg, p)[0], with_tol=True) == (0.0, 0.0)


def test_height_closed_form_and_variation_agree():
    # for u = <nu, e1>, u kappa_1 ds integrates to the change of cos(theta)
    cfg = config(1.0)
    p = cfg.patch(32)
    j0 = p.grid.index_of(y=0.0)
    iq = (p.grid.nx - 1) // 4
    path = node_path(p, line_nodes((iq, j0), (0, j0)), label="gamma1-part")
    u = p.normal_component(E1)
    _, _, _, th = cfg.profile.state(np.array([p.grid.xs[iq], 0.0]))
    expected = -(math.cos(th[1]) - math.cos(th[0]))
    h = heights(p, u, path)
    v = conjugate_variation(p, u, path, (0.0, 0.0, 0.0))
    assert abs(h - expected) < 1e-6
    assert abs(h - (v.end[2] - v.eps[0, 2])) < 1e-6


def test_heights_reject_non_symmetry_curves(und):
    _, p = und
    with pytest.raises(InvalidCurve):
        heights(p, p.normal_component(E1), l_path(p))
    j = p.grid.index_of(y=PI / 2)
    with pytest.raises(InvalidCurve):
        heights(p, p.normal_component(E1), node_path(p, line_nodes((0, j), (8, j))))


def test_symmetry_evolution_residual(und, cyl):
    cfg, p = und
    g1 = symmetry_curves(cfg, p)[0]
    assert symmetry_evolution_residual(p, p.normal_component(E1), g1) < 1e-12
    assert symmetry_evolution_residual(p, 0, g1) < 1e-9
    ccfg, cp = cyl
    for g in symmetry_curves(ccfg, cp):
        assert symmetry_evolution_residual(cp, cp.normal_component(E2), g) < 1e-8


def test_symmetry_evolution_warns_on_odd_field(und):
    cfg, p = und
    g1 = symmetry_curves(cfg, p)[0]
    with pytest.warns(RuntimeWarning, match="odd part"):
        symmetry_evolution_residual(p, p.normal_component(E3), g1)
    with warnings.catch_warnings():
        warnings.simplefilter("error")
        symmetry_evolution_residual(p, p.normal_component(E1), g1)


def test_parity_split(und):
    _, p = und
    j0 = p.grid.index_of(y=0.0)
    even, odd = parity_split(p, p.normal_component(E3), j0)
    assert np.nanmax(np.abs(even)) < 1e-12
    even, odd = parity_split(p, p.normal_component(E2), j0)
    assert np.nanmax(np.abs(odd)) < 1e-12
    assert np.isnan(even[:, -1]).all()


# -- T and T-hat -----------------------------------------------------------------

def test_t_map_zero(und):
    cfg, p = und
    T = t_map(cfg, 0, p)
    assert np.all(T.h == 0.0)
    assert np.all(pole_relation_residual(cfg, 0, p) == 0.0)


@settings(max_examples=8, deadline=None)
@given(st.floats(-3, 3), st.floats(-3, 3))
def test_t_map_is_linear(a, b):
    cfg = config(1.0)
    p = cfg.patch(8)
    u, w = p.normal_component(E1), p.normal_component(E2)
    Ta, Tb = t_map(cfg, u, p).h, t_map(cfg, w, p).h
    T = t_map(cfg, a * u + b * w, p).h
    assert np.allclose(T, a * Ta + b * Tb, atol=1e-12 * (1 + abs(a) + abs(b)))


def test_pole_relation_truncation_invariance():
    cfg = config(1.0, 2)
    p = cfg.patch(16)
    u = p.normal_component(E1)
    coarse = [np.linalg.norm(pole_relation_residual(cfg, u, p, t)) for t in ((0, 1), (1, 2), (0, 2))]
    q = cfg.patch(32)
    fine = [np.linalg.norm(pole_relation_residual(cfg, q.normal_component(E1), q, t)) for t in ((0, 1), (1, 2), (0, 2))]
    # the same (vanishing) value whichever necks truncate the curves
    assert max(coarse) < 1e-4
    assert max(fine) < max(coarse) / 3.5


def test_cylindrical_strings_and_alternating_sums():
    assert cylindrical_strings([False, False]) == [[1], [2]]
    assert cylindrical_strings([True, True]) == [[1, 2]]
    assert cylindrical_strings([False, True, False]) == [[1], [2, 3]]
    # hhat = h1 - h2 on a string of two curves through a cylindrical end
    assert np.allclose(alternating_sums([5.0, 2.0], [[1, 2]]), [-3.0])
    assert np.allclose(alternating_sums([5.0, 2.0, 1.0], [[1, 2, 3]]), [5.0 - 2.0 + 1.0])


def test_cylinder_t_hat_uses_one_string(cyl):
    cfg, p = cyl
    T = t_map(cfg, p.normal_component(E2), p)
    assert T.d == 1 and T.strings == [[1, 2]]
    assert np.allclose(T.hhat, 0.0, atol=1e-10)


def test_heights_json(tmp_path, und):
    cfg, p = und
    T = t_map(cfg, p.normal_component(E1), p)
    write_heights_json(T, tmp_path / "h.json")
    d = json.loads((tmp_path / "h.json").read_text())
    assert [h["curve_id"] for h in d["heights"]] == ["gamma1", "gamma2"]
    assert set(heights_json("c", 1.0, 0.0)) == {"curve_id", "h", "quadrature_tol"}
