"""The acceptance suite as data.

Each check builds its model surfaces, measures one property and returns a
:class:`CheckRecord`.  Refinement checks compare a base grid with its
halving; the base grid (cells per unit of the coarse direction) is a
parameter so that the CLI can trade accuracy for speed.

Records carry only measured numbers, never timings, so that two runs with
the same parameters produce identical reports.
"""
from __future__ import annotations

import json
import math
from dataclasses import asdict, dataclass, field
from importlib import resources
from typing import Callable, Dict, List, Optional

import numpy as np

from .charts import CatenoidChart, SphereChart
from .conjvar import (conjugate_field, conjugate_variation, conjugate_variation_grid,
                      conjugate_variation_minimal, heights)
from .cousin import cousin_identities, integrate_cousin, loop_defect
from .delaunay import (UnduloidConfig, boundary_curvature_check, neck_circle, symmetry_curves,
                       unduloid_profile)
from .patch import (GridSpec, build_patch, jacobi_residual, line_nodes, mean_curvature_residual,
                    node_path, polyline_nodes, rectangle_loop)
from .transport import (E3, classify, crosscheck_cousin_transport, holonomy, pole_solutions,
                        rotation_map_harmonicity, transport)

NECKSIZES = (0.4, 1.0, 2.0, 3.0)


def load_tolerances(path=None) -> Dict[str, float]:
    """Default tolerances, optionally overridden by a JSON file."""
    with resources.files("cmclab").joinpath("data/tolerances.json").open() as fh:
        tol = json.load(fh)
    if path is not None:
        with open(path) as fh:
            tol.update(json.load(fh))
    return tol


@dataclass
class CheckRecord:
    name: str
    anchor: str
    measured: dict
    expected: str
    bounds: dict
    passed: bool
    details: dict = field(default_factory=dict)

    def line(self) -> str:
        flag = "PASS" if self.passed else "FAIL"
        shown = ", ".join(f"{k}={_fmt(v)}" for k, v in self.measured.items())
        return f"{flag} {self.name}: {shown}"

    def to_json(self) -> dict:
        return _plain(asdict(self))


def _fmt(v):
    if isinstance(v, float):
        return f"{v:.3e}"
    if isinstance(v, (list, tuple)):
        return "[" + ", ".join(_fmt(x) for x in v) + "]"
    return str(v)


def _plain(obj):
    if isinstance(obj, dict):
        return {str(k): _plain(v) for k, v in obj.items()}
    if isinstance(obj, (list, tuple)):
        return [_plain(v) for v in obj]
    if isinstance(obj, (np.floating, float)):
        return float(obj)
    if isinstance(obj, (np.integer,)):
        return int(obj)
    if isinstance(obj, (np.bool_,)):
        return bool(obj)
    if isinstance(obj, np.ndarray):
        return _plain(obj.tolist())
    return obj


def ratio(coarse: float, fine: float) -> float:
    return float(coarse / fine) if fine > 0 else math.inf


def in_band(r: float, tol) -> bool:
    return tol["ratio_low"] <= r <= tol["ratio_high"]


def central_max(a: np.ndarray) -> float:
    """Max of ``|a|`` over the central half of the grid in each direction."""
    nx, ny = a.shape[:2]
    return float(np.nanmax(np.abs(a[nx // 4: 3 * nx // 4 + 1, ny // 4: 3 * ny // 4 + 1])))


def _config(n, periods=1, tol=1e-10):
    return UnduloidConfig(unduloid_profile(n, periods, tol))


# ---------------------------------------------------------------------------
# the thirteen criteria

def check_period(tol, grid=64) -> CheckRecord:
    dev = {}
    for n in NECKSIZES:
        prof = unduloid_profile(n, 1, tol["ode_tol"])
        dev[str(n)] = float(abs(np.diff(prof.neck_s)[0] - math.pi))
    worst = max(dev.values())
    return CheckRecord("unduloid_period", "neck-to-neck profile length is pi",
                       {"max_period_error": worst}, "|s(neck_1) - s(neck_0) - pi| small",
                       {"abs": tol["period"]}, worst < tol["period"], {"per_necksize": dev})


def check_first_integral(tol, grid=64) -> CheckRecord:
    drift, rsum = {}, {}
    for n in NECKSIZES:
        prof = unduloid_profile(n, 5, tol["ode_tol"])
        drift[str(n)] = prof.F_drift
        rsum[str(n)] = float(abs(prof.r_min + prof.r_max - 1.0))
    d, s = max(drift.values()), max(rsum.values())
    ok = d < tol["first_integral_drift"] and s < tol["radius_sum"]
    return CheckRecord("first_integral", "F = r cos(theta) - r^2 is conserved; r_min + r_max = 1",
                       {"F_drift": d, "radius_sum_error": s}, "drift and radius-sum defect small",
                       {"F_drift": tol["first_integral_drift"], "radius_sum": tol["radius_sum"]}, ok,
                       {"F_drift": drift, "radius_sum": rsum})


def check_kappa_rho2(tol, grid=64) -> CheckRecord:
    rel = {}
    value = None
    for n in NECKSIZES + (math.pi / 2,):
        p = _config(n, 1, tol["ode_tol"]).patch(grid // 2)
        q = p.kappa * p.rho ** 2
        rel[f"{n:.6g}"] = float(np.max(np.abs(q - q.mean())) / abs(q.mean()))
        if n == math.pi / 2:
            value = float(q.mean())
    worst = max(rel.values())
    err = abs(value - 0.375)
    ok = worst < tol["kappa_rho2_relative"] and err < tol["kappa_rho2_value"]
    return CheckRecord("kappa_rho2_constant", "kappa rho^2 is constant (= 2F) on unduloids",
                       {"max_relative_deviation": worst, "value_pi_over_2": value},
                       "constant, 3/8 for n = pi/2",
                       {"relative": tol["kappa_rho2_relative"], "value": tol["kappa_rho2_value"]}, ok,
                       {"relative_per_necksize": rel})


def check_cmc_equation(tol, grid=64) -> CheckRecord:
    cfg = _config(1.0, 1, tol["ode_tol"])
    r = [float(np.nanmax(mean_curvature_residual(cfg.patch(g // 2)))) for g in (grid, 2 * grid)]
    q = ratio(*r)
    return CheckRecord("cmc_equation", "Lap f = 2 rho^2 nu",
                       {"residual_coarse": r[0], "residual_fine": r[1], "ratio": q},
                       "second-order convergence", {"ratio": [tol["ratio_low"], tol["ratio_high"]]},
                       in_band(q, tol), {"grids": [grid, 2 * grid]})


def check_cousin(tol, grid=64) -> CheckRecord:
    cfg = _config(1.0, 1, tol["ode_tol"])
    reps = []
    for g in (grid, 2 * grid):
        p = cfg.patch(g // 2)
        reps.append(cousin_identities(integrate_cousin(p), p))
    r_metric = ratio(reps[0]["metric"], reps[1]["metric"])
    r_curv = ratio(reps[0]["curvature"], reps[1]["curvature"])
    r_a2 = ratio(reps[0]["A2"], reps[1]["A2"])
    unit = max(r["unit"] for r in reps)
    neg = []
    for g in (grid, 2 * grid):
        ps = build_patch(SphereChart(2.0), GridSpec.cells((-0.5, 0.5), (0.0, 1.0), g))
        neg.append(loop_defect(ps))
    agree = abs(neg[0] - neg[1]) / abs(neg[1])
    ok = (unit < tol["unit_quaternion"] and in_band(r_metric, tol) and in_band(r_curv, tol)
          and in_band(r_a2, tol) and agree < tol["negative_control_agreement"]
          and neg[1] > tol["negative_control_floor"])
    return CheckRecord(
        "cousin_identities", "isometric minimal cousin with curvatures shifted by one",
        {"unit_defect": unit, "metric_ratio": r_metric, "curvature_ratio": r_curv, "A2_ratio": r_a2,
         "sphere2_loop_defect": neg},
        "unit cousin, O(h^2) defects; nonzero converged defect for H = 1/2",
        {"unit": tol["unit_quaternion"], "ratio": [tol["ratio_low"], tol["ratio_high"]],
         "negative_agreement": tol["negative_control_agreement"]},
        ok, {"coarse": reps[0], "fine": reps[1], "grids": [grid, 2 * grid]})


def _unduloid_loops(p):
    nx, ny = p.shape
    return [rectangle_loop(p, a * (nx - 1) // 8, b * (nx - 1) // 8, c * (ny - 1) // 8, d * (ny - 1) // 8,
                           label=f"rect{a}{b}{c}{d}")
            for a, b, c, d in [(1, 4, 1, 4), (2, 6, 3, 7), (0, 8, 2, 6), (3, 5, 0, 8)]]


def _sphere_loops(p):
    nx, ny = p.shape
    return [rectangle_loop(p, (nx - 1) // 4, 3 * (nx - 1) // 4, (ny - 1) // 4, 3 * (ny - 1) // 4, "square"),
            rectangle_loop(p, 0, (nx - 1) // 2, 0, ny - 1, "half")]


def _sphere2_patch(g):
    return build_patch(SphereChart(2.0), GridSpec.cells((-1.0, 1.0), (0.0, 2.0), g))


def check_flatness(tol, grid=64) -> CheckRecord:
    p = _config(1.0, 1, tol["ode_tol"]).patch(grid)
    flat = max(holonomy(p, L).angle for L in _unduloid_loops(p))
    curved = [[holonomy(q, L).angle for L in _sphere_loops(q)] for q in (_sphere2_patch(grid), _sphere2_patch(2 * grid))]
    low = min(min(c) for c in curved)
    stab = max(abs(a - b) for a, b in zip(*curved))
    ok = flat < tol["holonomy_flat"] and low > tol["holonomy_curved_floor"] and stab < tol["holonomy_curved_stability"]
    return CheckRecord("flatness_dichotomy", "compass connection is flat iff H = 1",
                       {"unduloid_max_angle": flat, "sphere2_min_angle": low, "sphere2_stability": stab},
                       "flat on unduloids, curved on the H = 1/2 sphere",
                       {"flat": tol["holonomy_flat"], "floor": tol["holonomy_curved_floor"],
                        "stability": tol["holonomy_curved_stability"]}, ok,
                       {"sphere2_angles": curved, "unduloid_grid": 2 * grid})


def check_double_cover(tol, grid=64) -> CheckRecord:
    cfg = _config(math.pi)
    p = cfg.patch(grid // 2)
    loop = neck_circle(cfg, p, 0)
    h = holonomy(p, loop)
    lift_err = float(np.linalg.norm(h.lift.as_array() - np.array([-1.0, 0.0, 0.0, 0.0])))
    ret = float(np.linalg.norm(transport(p, loop, E3).end - E3))
    ok = h.angle < tol["double_cover"] and lift_err < tol["double_cover"] and ret < tol["double_cover"]
    return CheckRecord("double_cover", "a full spin is trivial in SO(3) but lifts to -1",
                       {"angle": h.angle, "lift_minus_one": lift_err, "return_error": ret},
                       "angle 0 and lift -1", {"abs": tol["double_cover"]}, ok)


def check_polygon(tol, grid=64) -> CheckRecord:
    dist = {}
    for n in (1.0, math.pi / 2):
        poly = classify(_config(n, 1, tol["ode_tol"]), m=grid // 2)
        dist[f"{n:.6g}"] = float(abs(poly.edge_lengths[0] - n))
    cfg = _config(math.pi)
    p = cfg.patch(grid // 2)
    ps = pole_solutions(cfg, p)
    anti = float(np.linalg.norm(ps.poles[0] + ps.poles[1]))
    tang = float(max(np.max(np.abs(np.sum(F * p.nu, -1))[ps.half]) for F in ps.fields))
    worst = max(dist.values())
    ok = worst < tol["pole_distance"] and anti < tol["antipodal"] and tang < tol["tangential"]
    return CheckRecord("classifying_polygon", "edge lengths of the pole polygon are the necksizes",
                       {"max_distance_error": worst, "cylinder_P1_plus_P2": anti, "cylinder_normal_part": tang},
                       "d(P1, P2) = n; cylinder poles antipodal and tangential",
                       {"distance": tol["pole_distance"], "antipodal": tol["antipodal"],
                        "tangential": tol["tangential"]}, ok, {"per_necksize": dist})


def _two_paths(p):
    nx, ny = p.shape
    a0, a1, b0, b1 = nx // 4, 3 * nx // 4, ny // 4, 3 * ny // 4
    A = node_path(p, polyline_nodes([(a0, b0), (a1, b0), (a1, b1)]), label="row-first")
    B = node_path(p, polyline_nodes([(a0, b0), (a0, b1), (a1, b1)]), label="column-first")
    return A, B


EPS0 = np.array([0.1, 0.2, -0.3])


def check_conjugate_variation(tol, grid=64) -> CheckRecord:
    cfg = _config(1.0, 1, tol["ode_tol"])
    disc, jac = [], []
    hom = 0.0
    for g in (grid, 2 * grid):
        p = cfg.patch(g // 2)
        u = p.normal_component(E3)
        A, B = _two_paths(p)
        disc.append(float(np.linalg.norm(conjugate_variation(p, u, A, EPS0).end
                                         - conjugate_variation(p, u, B, EPS0).end)))
        v = conjugate_variation_grid(p, u, EPS0, base=(p.grid.nx // 2, p.grid.ny // 2))
        jac.append(central_max(jacobi_residual(p, conjugate_field(v))))
        hom = max(hom, float(np.max(np.abs(conjugate_variation(p, 0, A, EPS0).eps - transport(p, A, EPS0).eps))))
    rd, rj = ratio(*disc), ratio(*jac)
    ok = in_band(rd, tol) and in_band(rj, tol) and hom < tol["homogeneous_reduction"]
    return CheckRecord("conjugate_variation", "path independence of the conjugate variation field",
                       {"two_path_ratio": rd, "jacobi_ratio": rj, "homogeneous_reduction": hom},
                       "O(h^2) discrepancies; u = 0 equals transport",
                       {"ratio": [tol["ratio_low"], tol["ratio_high"]], "reduction": tol["homogeneous_reduction"]},
                       ok, {"discrepancy": disc, "jacobi_residual": jac, "grids": [grid, 2 * grid]})


def check_heights(tol, grid=64) -> CheckRecord:
    cfg = _config(1.0, 1, tol["ode_tol"])
    p = cfg.patch(grid // 2)
    u = p.normal_component([1.0, 0.0, 0.0])
    gaps = {}
    for g in symmetry_curves(cfg, p):
        h = heights(p, u, g)
        z = conjugate_variation(p, u, g, EPS0).eps[:, 2]
        gaps[g.label] = float(abs(h - (z[-1] - z[0])))
    # a quarter period carries a nonzero height; for u = nu_1 it equals
    # -(cos theta(end) - cos theta(start)) along gamma_1
    nx, j0 = p.grid.nx, p.grid.index_of(y=0.0)
    i_end = nx - 1 - (nx - 1) // 4
    quarter = node_path(p, line_nodes((nx - 1, j0), (i_end, j0)), label="gamma1/4")
    hq = heights(p, u, quarter)
    zq = conjugate_variation(p, u, quarter, EPS0).eps[:, 2]
    gaps["gamma1/4"] = float(abs(hq - (zq[-1] - zq[0])))
    th = cfg.profile.state(np.array([p.grid.xs[nx - 1], p.grid.xs[i_end]]))[3]
    closed_form = float(abs(hq + (math.cos(th[1]) - math.cos(th[0]))))
    cc = _config(math.pi)
    pc = cc.patch(grid // 2)
    zero = max(abs(heights(pc, pc.normal_component(e), g)) for g in symmetry_curves(cc, pc)
               for e in ([1.0, 0.0, 0.0], [0.0, 1.0, 0.0], [0.0, 0.0, 1.0]))
    worst = max(gaps.values())
    ok = worst < tol["heights_match"] and zero < tol["heights_zero"]
    return CheckRecord("heights", "vertical change of eps along a symmetry curve is int u kappa_1 ds",
                       {"max_mismatch": worst, "quarter_period_height": hq, "closed_form_error": closed_form,
                        "cylinder_max_height": zero},
                       "heights match the vertical change; zero on the cylinder",
                       {"match": tol["heights_match"], "zero": tol["heights_zero"]}, ok, {"per_curve": gaps})


def check_boundary_curvature(tol, grid=64) -> CheckRecord:
    margins = {}
    ok = True
    for n in NECKSIZES + (math.pi / 2,):
        rep = boundary_curvature_check(_config(n, 1, tol["ode_tol"]))
        margins[f"{n:.6g}"] = [rep.margin_k1, rep.margin_k2]
        ok &= rep.passed
        if n == math.pi / 2:
            neck_err = float(np.max(np.abs(rep.k2_necks - 4.0)))
            bulge_err = float(np.max(np.abs(rep.k2_bulges - 4.0 / 3.0)))
    ok &= neck_err < tol["curvature_values"] and bulge_err < tol["curvature_values"]
    low = min(min(m) for m in margins.values())
    return CheckRecord("boundary_curvature", "k1 < 1 < k2 along the symmetry curves",
                       {"min_margin": low, "neck_k2_error": neck_err, "bulge_k2_error": bulge_err},
                       "positive margins; k2 = 4 at necks, 4/3 at bulges for n = pi/2",
                       {"values": tol["curvature_values"]}, bool(ok), {"margins": margins})


def check_cousin_crosscheck(tol, grid=64) -> CheckRecord:
    cfg = _config(1.0, 1, tol["ode_tol"])
    cross, harm = [], []
    for g in (grid // 2, grid):
        p = cfg.patch(g // 2)
        c = integrate_cousin(p)
        nx, ny = p.shape
        path = node_path(p, polyline_nodes([(0, ny // 4), (nx // 2, ny // 4), (nx // 2, 3 * ny // 4)]))
        cross.append(crosscheck_cousin_transport(p, c, path, EPS0))
        harm.append(float(np.nanmax(rotation_map_harmonicity(p, c))))
    rc, rh = ratio(*cross), ratio(*harm)
    ok = rc >= tol["ratio_low"] and in_band(rh, tol)
    return CheckRecord("cousin_crosscheck", "eps = ftilde^-1 alpha ftilde; the rotation map is harmonic",
                       {"crosscheck_ratio": rc, "harmonicity_ratio": rh},
                       "at least second-order convergence of both defects",
                       {"crosscheck_ratio_min": tol["ratio_low"], "ratio": [tol["ratio_low"], tol["ratio_high"]]},
                       ok, {"crosscheck": cross, "harmonicity": harm, "grids": [grid // 2, grid]})


def _catenoid_patch(g):
    return build_patch(CatenoidChart(), GridSpec.cells((-1.0, 1.0), (-0.5 * math.pi, 1.5 * math.pi), g // 2, g))


def check_minimal_variant(tol, grid=64) -> CheckRecord:
    disc, jac, sym = [], [], []
    for g in (grid, 2 * grid):
        p = _catenoid_patch(g)
        u = p.normal_component(E3)
        A, B = _two_paths(p)
        disc.append(float(np.linalg.norm(conjugate_variation_minimal(p, u, A).end
                                         - conjugate_variation_minimal(p, u, B).end)))
        j0, jpi = p.grid.index_of(y=0.0), p.grid.index_of(y=math.pi)
        v = conjugate_variation_grid(p, u, base=(p.grid.nx // 2, j0), minimal=True)
        ut = conjugate_field(v)
        jac.append(central_max(jacobi_residual(p, ut)))
        sym.append(float(np.max(np.abs(ut[:, jpi]))))
    rd, rj = ratio(*disc), ratio(*jac)
    ok = in_band(rd, tol) and in_band(rj, tol)
    return CheckRecord("minimal_variant", "catenoid conjugate variation without the spin term",
                       {"two_path_ratio": rd, "jacobi_ratio": rj, "symmetry_curve_ratio": ratio(*sym)},
                       "O(h^2) path independence and Jacobi residual",
                       {"ratio": [tol["ratio_low"], tol["ratio_high"]]}, ok,
                       {"discrepancy": disc, "jacobi_residual": jac, "symmetry_curve_u": sym,
                        "grids": [grid, 2 * grid]})


CRITERIA: List[Callable] = [
    check_period, check_first_integral, check_kappa_rho2, check_cmc_equation, check_cousin,
    check_flatness, check_double_cover, check_polygon, check_conjugate_variation, check_heights,
    check_boundary_curvature, check_cousin_crosscheck, check_minimal_variant,
]


def sphere2_flatness_control(tol, grid=64) -> CheckRecord:
    """Negative control: the flatness test must fail on the H = 1/2 sphere."""
    angles = [[holonomy(q, L).angle for L in _sphere_loops(q)] for q in (_sphere2_patch(grid), _sphere2_patch(2 * grid))]
    low = min(min(a) for a in angles)
    flat = low < tol["holonomy_flat"]
    return CheckRecord("flatness_negative_control", "the compass connection is curved when H != 1",
                       {"min_angle": low, "flatness": "PASS" if flat else "FAIL (expected)"},
                       "flatness fails", {"floor": tol["holonomy_curved_floor"]},
                       (not flat) and low > tol["holonomy_curved_floor"], {"angles": angles})


def run_all(tol=None, grid: int = 64, only: Optional[List[int]] = None) -> List[CheckRecord]:
    tol = load_tolerances() if tol is None else tol
    out = []
    for k, fn in enumerate(CRITERIA, start=1):
        if only is None or k in only:
            rec = fn(tol, grid)
            rec.details = dict(rec.details, criterion=k)
            out.append(rec)
    return out
