import math

import numpy as np
import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

from cmclab.delaunay import (NECKSIZE_MESSAGE, UnduloidConfig, boundary_curvature_check, check_necksize,
                             neck_circle, neck_geodesic_curvature, symmetry_curves, unduloid_profile,
                             write_config_json, write_profile_csv)
from cmclab.errors import InvalidInput, InvalidPath

PI = math.pi


def test_cylinder_profile():
    prof = unduloid_profile(PI)
    assert prof.is_cylinder
    t = np.linspace(0, prof.t_end, 17)
    _, _, r, th = prof.state(t)
    assert np.all(r == 0.5) and np.all(th == 0.0)
    assert np.allclose(np.diff(prof.neck_s), PI)


def test_half_pi_profile_extremes():
    prof = unduloid_profile(PI / 2)
    # r cos(theta) - r^2 at the neck r = 1/4 and the bulge r = 3/4
    assert prof.r_min == pytest.approx(0.25, abs=1e-12)
    assert prof.r_max == pytest.approx(0.75, abs=1e-8)
    assert prof.F == pytest.approx(3 / 16, abs=1e-12)


@pytest.mark.parametrize("n", [0.4, 1.0, 2.0, 3.0])
def test_period_is_pi(n):
    prof = unduloid_profile(n, 2)
    assert np.allclose(np.diff(prof.neck_s), PI, atol=1e-6)
    assert abs(prof.r_min + prof.r_max - 1.0) < 1e-8


@settings(max_examples=10, deadline=None)
@given(st.floats(0.05, 3.1))
def test_first_integral_conserved(n):
    prof = unduloid_profile(n, 1)
    F = prof.first_integral(np.linspace(0, prof.t_end, 101))
    assert np.max(np.abs(F - prof.F)) < 1e-9
    assert prof.r_min == pytest.approx(n / (2 * PI))


@pytest.mark.parametrize("n", [0.0, -1.0, 4.0, float("nan"), 5e-4])
def test_necksize_domain(n):
    with pytest.raises(InvalidInput):
        unduloid_profile(n)


def test_necksize_message():
    with pytest.raises(InvalidInput, match=r"necksize must lie in \(0, π\]"):
        check_necksize(4.0)
    assert NECKSIZE_MESSAGE == "necksize must lie in (0, π]"


def test_periods_must_be_positive():
    with pytest.raises(InvalidInput):
        unduloid_profile(1.0, 0)


def test_state_outside_range():
    prof = unduloid_profile(1.0)
    with pytest.raises(InvalidInput):
        prof.state(prof.t_end + 1.0)


def test_cylinder_config_patch():
    p = UnduloidConfig(unduloid_profile(PI)).patch(8)
    assert np.allclose(p.rho, 0.5)
    assert np.allclose(p.kappa * p.rho ** 2, 0.5)
    assert np.allclose(p.k1, 0.0) and np.allclose(p.k2, 2.0)


def test_half_pi_kappa_rho2_is_twice_F():
    p = UnduloidConfig(unduloid_profile(PI / 2)).patch(16)
    q = p.kappa * p.rho ** 2
    assert np.max(np.abs(q - 0.375)) / 0.375 < 1e-6


def test_config_patch_is_cmc_curvature_patch():
    p = UnduloidConfig(unduloid_profile(1.0)).patch(8)
    assert p.is_conformal and p.is_curvature_coords
    assert np.allclose(p.H, 1.0, atol=1e-9)
    # phi = 0 and phi = pi lie on grid lines
    assert np.isclose(p.grid.ys, 0.0).any() and np.isclose(p.grid.ys, PI).any()


def test_symmetry_curves_cylinder():
    cfg = UnduloidConfig(unduloid_profile(PI))
    p = cfg.patch(8)
    g1, g2 = symmetry_curves(cfg, p)
    assert g1.length == pytest.approx(PI)
    assert g2.length == pytest.approx(PI)
    # both on the plane z = 0
    for g in (g1, g2):
        f = p.sample(g.points[:, 0], g.points[:, 1]).f
        assert np.max(np.abs(f[:, 2])) < 1e-15


def test_symmetry_curves_three_periods():
    cfg = UnduloidConfig(unduloid_profile(1.0, 3))
    p = cfg.patch(16)
    for g in symmetry_curves(cfg, p, (0, 3)):
        assert g.length == pytest.approx(3 * PI, abs=1e-6)


def test_symmetry_curves_bad_truncation():
    cfg = UnduloidConfig(unduloid_profile(1.0, 1))
    p = cfg.patch(8)
    with pytest.raises(InvalidPath):
        symmetry_curves(cfg, p, (0, 2))
    with pytest.raises(InvalidPath):
        symmetry_curves(cfg, p, (1, 1))


def test_neck_circles():
    cfg = UnduloidConfig(unduloid_profile(PI))
    p = cfg.patch(8)
    c = neck_circle(cfg, p)
    assert c.closed and c.length == pytest.approx(PI)
    cfg = UnduloidConfig(unduloid_profile(PI / 2))
    p = cfg.patch(8)
    assert neck_circle(cfg, p, half=True).length == pytest.approx(PI / 4)
    assert neck_geodesic_curvature(cfg) < 1e-8
    assert neck_geodesic_curvature(cfg, 1) < 1e-8


@pytest.mark.parametrize("n", [0.4, 1.0, PI / 2, 2.0, 3.0, PI])
def test_boundary_curvature(n):
    rep = boundary_curvature_check(UnduloidConfig(unduloid_profile(n, 2)))
    assert rep.passed
    assert rep.k1_max < 1 < rep.k2_min
    assert rep.margin_k1 > 0 and rep.margin_k2 > 0


def test_boundary_curvature_values_half_pi():
    rep = boundary_curvature_check(UnduloidConfig(unduloid_profile(PI / 2)))
    assert np.allclose(rep.k2_necks, 4.0, atol=1e-6)
    assert np.allclose(rep.k1_necks, -2.0, atol=1e-6)
    assert np.allclose(rep.k2_bulges, 4 / 3, atol=1e-6)
    assert np.allclose(rep.k1_bulges, 2 / 3, atol=1e-6)


def test_cylinder_boundary_curvature():
    rep = boundary_curvature_check(UnduloidConfig(unduloid_profile(PI)))
    assert rep.k1_max == 0.0 and rep.k2_min == 2.0


def test_writers(tmp_path):
    cfg = UnduloidConfig(unduloid_profile(1.0))
    write_profile_csv(cfg.profile, tmp_path / "profile.csv")
    data = np.loadtxt(tmp_path / "profile.csv", delimiter=",", skiprows=1)
    assert data.shape[1] == 5
    assert np.max(np.abs(data[:, 4] - cfg.profile.F)) < 1e-9
    write_config_json(cfg, tmp_path / "cfg.json", (0, 1))
    assert (tmp_path / "cfg.json").read_text().count("necksize") == 1
