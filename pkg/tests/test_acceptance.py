"""Acceptance gate: the thirteen criteria at their stated tolerances.

Each test runs one check from :mod:`cmclab.checks`, prints a single
PASS/FAIL line and asserts the record.  Bounds come from the packaged
tolerance file and are compared here against the literal values so that a
loosened config cannot slip through.
"""
import time

from cmclab import checks

TOL = checks.load_tolerances()

STATED = {
    "ode_tol": 1e-10,
    "period": 1e-6,
    "first_integral_drift": 1e-9,
    "radius_sum": 1e-8,
    "kappa_rho2_relative": 1e-6,
    "kappa_rho2_value": 1e-6,
    "ratio_low": 3.5,
    "ratio_high": 4.5,
    "unit_quaternion": 1e-8,
    "negative_control_agreement": 0.1,
    "holonomy_flat": 1e-5,
    "holonomy_curved_floor": 0.05,
    "holonomy_curved_stability": 1e-4,
    "double_cover": 1e-6,
    "pole_distance": 1e-5,
    "antipodal": 1e-8,
    "tangential": 1e-6,
    "homogeneous_reduction": 1e-12,
    "heights_match": 1e-6,
    "heights_zero": 1e-10,
    "curvature_values": 1e-6,
}


def test_packaged_tolerances_are_the_stated_ones():
    for key, value in STATED.items():
        assert TOL[key] == value, key


def _run(k, capsys, grid=64):
    rec = checks.run_all(TOL, grid, only=[k])[0]
    with capsys.disabled():
        print(f"\n[criterion {k:2d}] {rec.line()}")
    return rec


def test_criterion_01_unduloid_period(capsys):
    t0 = time.perf_counter()
    rec = _run(1, capsys)
    elapsed = time.perf_counter() - t0
    with capsys.disabled():
        print(f"[criterion  1] period checks took {elapsed:.3f} s")
    assert rec.passed
    assert rec.measured["max_period_error"] < 1e-6
    assert elapsed < 1.0


def test_criterion_02_first_integral(capsys):
    rec = _run(2, capsys)
    assert rec.passed
    assert rec.measured["F_drift"] < 1e-9
    assert rec.measured["radius_sum_error"] < 1e-8


def test_criterion_03_kappa_rho2(capsys):
    rec = _run(3, capsys)
    assert rec.passed
    assert rec.measured["max_relative_deviation"] < 1e-6
    assert abs(rec.measured["value_pi_over_2"] - 0.375) < 1e-6


def _ratios_in_band(rec):
    rs = [v for k, v in rec.measured.items() if "ratio" in k]
    assert rs
    for r in rs:
        assert 3.5 <= r <= 4.5, rec.measured


def test_criterion_04_cmc_equation(capsys):
    rec = _run(4, capsys)
    assert rec.passed
    _ratios_in_band(rec)


def test_criterion_05_cousin(capsys):
    rec = _run(5, capsys)
    m = rec.measured
    assert rec.passed, m
    assert m["unit_defect"] < 1e-8
    for key in ("metric_ratio", "curvature_ratio", "A2_ratio"):
        assert 3.5 <= m[key] <= 4.5, key
    coarse, fine = m["sphere2_loop_defect"]
    assert fine > 0.05
    assert abs(coarse - fine) <= 0.1 * fine


def test_criterion_06_flatness(capsys):
    rec = _run(6, capsys)
    m = rec.measured
    assert rec.passed, m
    assert m["unduloid_max_angle"] < 1e-5
    assert m["sphere2_min_angle"] > 0.05
    assert m["sphere2_stability"] < 1e-4


def test_criterion_07_double_cover(capsys):
    rec = _run(7, capsys)
    m = rec.measured
    assert rec.passed, m
    assert m["angle"] < 1e-6
    assert m["lift_minus_one"] < 1e-6


def test_criterion_08_polygon(capsys):
    rec = _run(8, capsys)
    m = rec.measured
    assert rec.passed, m
    assert m["max_distance_error"] < 1e-5
    assert m["cylinder_P1_plus_P2"] < 1e-8
    assert m["cylinder_normal_part"] < 1e-6


def test_criterion_09_conjugate_variation(capsys):
    rec = _run(9, capsys)
    m = rec.measured
    assert rec.passed, m
    assert 3.5 <= m["two_path_ratio"] <= 4.5
    assert 3.5 <= m["jacobi_ratio"] <= 4.5
    assert m["homogeneous_reduction"] < 1e-12


def test_criterion_10_heights(capsys):
    rec = _run(10, capsys)
    m = rec.measured
    assert rec.passed, m
    assert m["max_mismatch"] < 1e-6
    assert m["cylinder_max_height"] < 1e-10
    # independent closed form for u = <nu, e1>: the height is the change of cos(theta)
    assert m["closed_form_error"] < 1e-6


def test_criterion_11_boundary_curvature(capsys):
    rec = _run(11, capsys)
    m = rec.measured
    assert rec.passed, m
    assert m["min_margin"] > 0
    assert m["neck_k2_error"] < 1e-6
    assert m["bulge_k2_error"] < 1e-6


def test_criterion_12_cousin_crosscheck(capsys):
    rec = _run(12, capsys)
    m = rec.measured
    assert rec.passed, m
    # at least second order; the cross-check actually converges faster
    assert m["crosscheck_ratio"] >= 3.5
    assert 3.5 <= m["harmonicity_ratio"] <= 4.5


def test_criterion_13_minimal_variant(capsys):
    rec = _run(13, capsys)
    assert rec.passed, rec.measured
    _ratios_in_band(rec)
