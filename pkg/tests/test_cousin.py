import json
import math

import numpy as np
import pytest

from cmclab.charts import CylinderChart, SphereChart
from cmclab.cousin import (cousin_identities, integrate_cousin, integrate_cousin_inverse, loop_defect,
                           write_cousin)
from cmclab.delaunay import UnduloidConfig, unduloid_profile
from cmclab.errors import IntegrabilityError, InvalidInput
from cmclab.patch import GridSpec, build_patch
from cmclab.quatgeo import Quaternion, qmul

SQUARE = ((0.0, 1.0), (0.0, 1.0))


def cylinder(n):
    return build_patch(CylinderChart(), GridSpec.cells(*SQUARE, n))


def sphere(n, radius=1.0):
    return build_patch(SphereChart(radius), GridSpec.cells((-0.5, 0.5), (0.0, 1.0), n))


def unduloid(m):
    return UnduloidConfig(unduloid_profile(1.0)).patch(m)


def roundtrip_error(p):
    q = integrate_cousin_inverse(integrate_cousin(p))
    d = q.f - p.f
    return float(np.max(np.abs(d - d[0, 0])))


def test_cylinder_cousin_curvatures():
    c = integrate_cousin(cylinder(32))
    k = c.kappa[1:-1, 1:-1]
    assert np.allclose(k[..., 0], -1.0, atol=1e-3)
    assert np.allclose(k[..., 1], 1.0, atol=1e-3)
    assert np.max(np.abs(np.linalg.norm(c.ftilde, axis=-1) - 1.0)) < 1e-12


def test_unit_sphere_cousin_is_totally_geodesic():
    c = integrate_cousin(sphere(32))
    assert np.nanmax(np.abs(c.kappa)) < 1e-6


def test_identities_converge_on_unduloid():
    ids = [cousin_identities(integrate_cousin(p), p) for p in (unduloid(16), unduloid(32))]
    assert ids[1]["unit"] < 1e-8
    for key in ("metric", "curvature", "A2"):
        assert 3.5 <= ids[0][key] / ids[1][key] <= 4.5, key


def test_loop_defect_vanishes_on_cmc_and_not_on_radius_two_sphere():
    assert integrate_cousin(unduloid(32)).loop_defect < 1e-4
    d = [integrate_cousin(sphere(n, 2.0)).loop_defect for n in (16, 32, 64)]
    assert min(d) > 0.05
    assert abs(d[-1] - d[-2]) < 0.1 * d[-1]


def test_loop_defect_of_sub_rectangle():
    d = [loop_defect(unduloid(8 * k), 2 * k, 6 * k, 2 * k, 10 * k) for k in (1, 2, 4)]
    assert d[0] / d[1] >= 3.5 and d[1] / d[2] >= 3.5


def test_strict_mode_raises_with_defect():
    with pytest.raises(IntegrabilityError) as info:
        integrate_cousin(sphere(16, 2.0), strict=True)
    assert info.value.defect > 0.05
    integrate_cousin(unduloid(16), strict=True)


def test_base_must_be_unit():
    with pytest.raises(InvalidInput):
        integrate_cousin(cylinder(8), base=Quaternion(2.0, 0, 0, 0))


def test_needs_conformal_patch():
    p = build_patch(lambda x, y: np.stack([x, 2 * y, 0 * x], -1), GridSpec.cells(*SQUARE, 8))
    with pytest.raises(InvalidInput):
        integrate_cousin(p)


def test_base_value_acts_by_left_multiplication():
    p = unduloid(8)
    q = Quaternion.axis_angle([1, 2, 2], 0.8)
    a = integrate_cousin(p).ftilde
    b = integrate_cousin(p, base=q).ftilde
    assert np.allclose(b, qmul(q.as_array(), a), atol=1e-12)


def test_base_index_moves_the_anchor():
    p = unduloid(8)
    c = integrate_cousin(p, base_index=(3, 5))
    assert np.allclose(c.ftilde[3, 5], [1, 0, 0, 0])
    assert c.base_index == (3, 5)


def test_roundtrip_cylinder():
    assert roundtrip_error(cylinder(64)) < 1e-7


def test_roundtrip_unduloid_converges():
    e = [roundtrip_error(unduloid(m)) for m in (8, 16, 32)]
    assert e[0] / e[1] >= 3.5 and e[1] / e[2] >= 3.5


def test_roundtrip_base_shift():
    c = integrate_cousin(unduloid(8))
    b = np.array([0.5, -2.0, 3.25])
    a = integrate_cousin_inverse(c).f
    s = integrate_cousin_inverse(c, base=b).f
    assert np.allclose(s - a, b, rtol=0, atol=1e-14)


def test_write_cousin(tmp_path):
    c = integrate_cousin(cylinder(8))
    write_cousin(c, tmp_path / "c.csv", tmp_path / "c.json")
    rows = np.loadtxt(tmp_path / "c.csv", delimiter=",", skiprows=1)
    assert rows.shape == (81, 6)
    assert np.allclose(np.linalg.norm(rows[:, 2:], axis=1), 1.0)
    meta = json.loads((tmp_path / "c.json").read_text())
    assert meta["base_index"] == [0, 0]
    assert math.isfinite(meta["loop_defect"])
