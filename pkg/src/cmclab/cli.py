"""Command-line front end.

Every subcommand prints one line per check and exits with 0 when all checks
pass, 1 when one fails and 2 on usage or domain errors.  ``--output`` writes
the JSON report (``--format json``) or the command's CSV export
(``--format csv``).
"""
from __future__ import annotations

import argparse
import csv
import io
import json
import math
import os
import sys
from datetime import datetime, timezone

import numpy as np

from . import __version__, checks, kernels
from .charts import CatenoidChart, SphereChart
from .conjvar import (conjugate_field, conjugate_variation, conjugate_variation_grid, t_map)
from .cousin import cousin_identities, integrate_cousin
from .delaunay import UnduloidConfig, neck_circle, unduloid_profile
from .errors import CMCLabError, InvalidInput
from .patch import GridSpec, build_patch, jacobi_residual, line_nodes, node_path, polyline_nodes, rectangle_loop
from .transport import E3, classify, holonomy, transport

SURFACES = ("unduloid", "cylinder", "sphere", "sphere2", "catenoid")
FIELDS = ("zero", "nu1", "nu2", "nu3")


class UsageError(Exception):
    pass


# ---------------------------------------------------------------------------
# helpers

def _tol_value(text):
    if text in (None, "default"):
        return None
    try:
        v = float(text)
    except ValueError:
        raise argparse.ArgumentTypeError("--tol takes a float or 'default'")
    if not v > 0:
        raise argparse.ArgumentTypeError("--tol must be positive")
    return v


#: necksizes typed to seven decimals round pi up; values this close are pi
PI_SNAP = 1e-6


def _necksize(text):
    try:
        v = float(text)
    except ValueError:
        raise argparse.ArgumentTypeError("--necksize takes a float")
    return math.pi if abs(v - math.pi) < PI_SNAP else v


def _tolerances(args):
    tol = checks.load_tolerances(args.tolerances)
    if args.tol is not None:
        tol["ode_tol"] = args.tol
    return tol


def manifest(args) -> dict:
    epoch = int(os.environ.get("SOURCE_DATE_EPOCH", "0"))
    params = {k: v for k, v in sorted(vars(args).items()) if k not in ("func", "output", "command")}
    return {
        "command": args.command,
        "parameters": params,
        "version": __version__,
        "backend": kernels.BACKEND,
        "timestamp": datetime.fromtimestamp(epoch, tz=timezone.utc).strftime("%Y-%m-%dT%H:%M:%SZ"),
    }


def _surface_patch(name, grid, necksize, tol, periods=1):
    if name in ("unduloid", "cylinder"):
        n = math.pi if name == "cylinder" else necksize
        cfg = UnduloidConfig(unduloid_profile(n, periods, tol["ode_tol"]))
        return cfg.patch(max(2, grid // 2)), cfg
    if name in ("sphere", "sphere2"):
        R = 1.0 if name == "sphere" else 2.0
        return build_patch(SphereChart(R), GridSpec.cells((-1.0, 1.0), (0.0, 2.0), grid)), None
    if name == "catenoid":
        return build_patch(CatenoidChart(), GridSpec.cells((-1.0, 1.0), (-0.5 * math.pi, 1.5 * math.pi),
                                                           max(2, grid // 2), grid)), None
    raise UsageError(f"unknown surface {name!r}")


def _field(p, name):
    if name == "zero":
        return np.zeros(p.shape)
    k = {"nu1": 0, "nu2": 1, "nu3": 2}[name]
    e = np.zeros(3)
    e[k] = 1.0
    return p.normal_component(e)


def _record(name, anchor, measured, expected, bounds, passed, **details):
    return checks.CheckRecord(name, anchor, measured, expected, bounds, bool(passed), details)


def _records_csv(records) -> str:
    buf = io.StringIO()
    w = csv.writer(buf)
    w.writerow(["name", "measured", "passed"])
    for r in records:
        w.writerow([r.name, json.dumps(checks._plain(r.measured), sort_keys=True), int(r.passed)])
    return buf.getvalue()


def _emit(args, records, payload=None, csv_text=None) -> int:
    for r in records:
        print(r.line())
    if args.output:
        if args.format == "json":
            doc = {"manifest": manifest(args), "records": [r.to_json() for r in records]}
            if payload is not None:
                doc["data"] = checks._plain(payload)
            with open(args.output, "w") as fh:
                json.dump(doc, fh, indent=2, sort_keys=True)
                fh.write("\n")
        else:
            with open(args.output, "w", newline="") as fh:
                fh.write(csv_text if csv_text is not None else _records_csv(records))
    return 0 if all(r.passed for r in records) else 1


# ---------------------------------------------------------------------------
# subcommands

def cmd_delaunay(args) -> int:
    tol = _tolerances(args)
    prof = unduloid_profile(args.necksize, args.periods, tol["ode_tol"])
    gaps = np.abs(np.diff(prof.neck_s) - math.pi)
    recs = [
        _record("period", "neck-to-neck length pi", {"max_period_error": float(gaps.max())},
                "pi per period", {"abs": tol["period"]}, gaps.max() < tol["period"],
                per_period=gaps.tolist()),
        _record("first_integral", "F conserved", {"F_drift": prof.F_drift,
                                                  "radius_sum_error": abs(prof.r_min + prof.r_max - 1.0)},
                "small drift", {"F_drift": tol["first_integral_drift"], "radius_sum": tol["radius_sum"]},
                prof.F_drift < tol["first_integral_drift"] and abs(prof.r_min + prof.r_max - 1) < tol["radius_sum"]),
        _record("necksize", "n = 2 pi r_min", {"necksize": prof.necksize, "r_min": prof.r_min,
                                               "cylinder": prof.is_cylinder},
                "r_min = n / 2 pi", {"abs": 1e-12},
                abs(2 * math.pi * prof.r_min - prof.necksize) < 1e-12),
    ]
    if prof.is_cylinder:
        recs.append(_record("cylinder", "r = 1/2 throughout", {"max_radius_error": float(np.max(np.abs(prof.r - 0.5)))},
                            "r = 0.5", {"abs": 1e-12}, np.max(np.abs(prof.r - 0.5)) < 1e-12))
    buf = io.StringIO()
    w = csv.writer(buf)
    w.writerow(["s", "x", "r", "theta", "F"])
    Fs = prof.r * np.cos(prof.theta) - prof.r ** 2
    for row in zip(prof.s, prof.x, prof.r, prof.theta, Fs):
        w.writerow([repr(float(v)) for v in row])
    return _emit(args, recs, prof.describe(), buf.getvalue())


def cmd_verify(args) -> int:
    tol = _tolerances(args)
    if args.surface == "sphere2":
        recs = [checks.sphere2_flatness_control(tol, args.grid)]
    elif args.surface in (None, "all"):
        recs = checks.run_all(tol, args.grid)
    else:
        raise UsageError("verify --surface takes 'all' or 'sphere2'")
    return _emit(args, recs)


def _loop(p, cfg, kind):
    nx, ny = p.shape
    if kind == "cell":
        i, j = nx // 2, ny // 2
        return rectangle_loop(p, i, i + 1, j, j + 1, label="cell")
    if kind == "rect":
        return rectangle_loop(p, nx // 4, 3 * nx // 4, ny // 4, 3 * ny // 4, label="rect")
    if kind == "neck":
        if cfg is None:
            raise UsageError("--loop neck needs an unduloid or cylinder surface")
        return neck_circle(cfg, p, 0)
    raise UsageError(f"unknown loop {kind!r}")


def cmd_holonomy(args) -> int:
    tol = _tolerances(args)
    p, cfg = _surface_patch(args.surface, args.grid, args.necksize, tol, args.periods)
    L = _loop(p, cfg, args.loop)
    h = holonomy(p, L)
    bound = tol["holonomy_flat"]
    rec = _record("holonomy", "compass holonomy around a loop", {"angle": h.angle,
                  "lift": h.lift.as_array().tolist()}, "trivial rotation on H = 1 surfaces",
                  {"abs": bound}, h.angle < bound, surface=args.surface, loop=L.label)
    payload = h.to_json(bound)
    csv_text = "loop_id,angle,w,x,y,z\n" + ",".join([L.label, repr(h.angle)] + [repr(float(v)) for v in h.lift.as_array()]) + "\n"
    return _emit(args, [rec], payload, csv_text)


def cmd_cousin(args) -> int:
    tol = _tolerances(args)
    p, _ = _surface_patch(args.surface, args.grid, args.necksize, tol, args.periods)
    c = integrate_cousin(p)
    rep = cousin_identities(c, p)
    k = c.kappa[1:-1, 1:-1]
    shift = rep["curvature"]
    bound = 10.0 * max(p.grid.hx, p.grid.hy) ** 2
    recs = [
        _record("cousin_unit", "|ftilde| = 1", {"unit_defect": rep["unit"]}, "unit quaternions",
                {"abs": tol["unit_quaternion"]}, rep["unit"] < tol["unit_quaternion"]),
        _record("cousin_curvatures", "kappa tilde = kappa - 1",
                {"kappa_tilde_mean": [float(np.mean(k[..., 0])), float(np.mean(k[..., 1]))],
                 "shift_defect": shift, "A2_defect": rep["A2"]},
                "curvatures shifted by one", {"abs": bound}, shift < bound),
        _record("cousin_integrability", "loop defect around the perimeter",
                {"loop_defect": c.loop_defect, "order_discrepancy": c.order_discrepancy},
                "small on H = 1 patches", {"abs": bound}, c.loop_defect < bound),
    ]
    buf = io.StringIO()
    w = csv.writer(buf)
    w.writerow(["i", "j", "w", "x", "y", "z"])
    nx, ny = p.shape
    for i in range(nx):
        for j in range(ny):
            w.writerow([i, j] + [repr(float(v)) for v in c.ftilde[i, j]])
    return _emit(args, recs, c.describe(), buf.getvalue())


def _transport_path(p, cfg, kind):
    nx, ny = p.shape
    if kind in ("neck", "quarter"):
        if cfg is None:
            raise UsageError("neck paths need an unduloid or cylinder surface")
        if kind == "neck":
            return neck_circle(cfg, p, 0)
        j0 = p.grid.index_of(y=0.0)
        return node_path(p, line_nodes((0, j0), (0, j0 + (ny - 1) // 8)), label="quarter")
    if kind == "meridian":
        j = ny // 2
        return node_path(p, line_nodes((0, j), (nx - 1, j)), label="meridian")
    if kind == "mixed":
        return node_path(p, polyline_nodes([(0, ny // 4), (nx // 2, ny // 4), (nx // 2, 3 * ny // 4)]), label="mixed")
    raise UsageError(f"unknown path {kind!r}")


def cmd_transport(args) -> int:
    tol = _tolerances(args)
    p, cfg = _surface_patch(args.surface, args.grid, args.necksize, tol, args.periods)
    path = _transport_path(p, cfg, args.path)
    eps0 = E3 if args.seed is None else np.random.default_rng(args.seed).normal(size=3)
    tr = transport(p, path, eps0)
    bound = 1e-9 * np.linalg.norm(eps0) * max(1.0, path.length)
    rec = _record("transport_norm", "|eps| is conserved", {"norm_drift": tr.norm_drift,
                  "eps_end": tr.end.tolist()}, "constant length", {"abs": bound}, tr.norm_drift < bound,
                  path=path.label, length=path.length)
    buf = io.StringIO()
    w = csv.writer(buf)
    w.writerow(["k", "x", "y", "arclength", "ex", "ey", "ez"])
    for k, (pt, s, e) in enumerate(zip(path.points, path.arclength, tr.eps)):
        w.writerow([k] + [repr(float(v)) for v in (pt[0], pt[1], s, e[0], e[1], e[2])])
    return _emit(args, [rec], {"eps": tr.eps, "path": path.label}, buf.getvalue())


def cmd_conjvar(args) -> int:
    tol = _tolerances(args)
    if args.surface == "catenoid" and not args.minimal:
        raise UsageError("the catenoid is minimal: use --minimal")
    if args.surface != "catenoid" and args.minimal:
        raise UsageError("--minimal applies to the catenoid")
    rng = np.random.default_rng(args.seed)
    eps0 = 0.3 * rng.normal(size=3) if not args.minimal else np.zeros(3)
    disc, jac = [], []
    for g in (args.grid, 2 * args.grid):
        p, cfg = _surface_patch(args.surface, g, args.necksize, tol, args.periods)
        u = _field(p, args.field)
        A, B = checks._two_paths(p)
        a = conjugate_variation(p, u, A, eps0, minimal=args.minimal).end
        b = conjugate_variation(p, u, B, eps0, minimal=args.minimal).end
        disc.append(float(np.linalg.norm(a - b)))
        base = (p.grid.nx // 2, p.grid.index_of(y=0.0) if args.minimal else p.grid.ny // 2)
        v = conjugate_variation_grid(p, u, eps0, base, minimal=args.minimal)
        jac.append(checks.central_max(jacobi_residual(p, conjugate_field(v))))
    recs = []
    if args.field == "zero" and not np.any(eps0):
        recs.append(_record("trivial_field", "u = 0 and eps0 = 0 give eps = 0", {"discrepancy": max(disc)},
                            "zero", {"abs": 0.0}, max(disc) == 0.0))
    else:
        rd, rj = checks.ratio(*disc), checks.ratio(*jac)
        band = [tol["ratio_low"], tol["ratio_high"]]
        recs.append(_record("two_path", "path independence", {"ratio": rd, "discrepancy": disc},
                            "O(h^2)", {"ratio": band}, checks.in_band(rd, tol) or max(disc) < 1e-12))
        recs.append(_record("conjugate_jacobi", "<eps, nu> is a Jacobi field", {"ratio": rj, "residual": jac},
                            "O(h^2)", {"ratio": band}, checks.in_band(rj, tol) or max(jac) < 1e-12))
    payload = {"eps0": eps0}
    if cfg is not None:
        T = t_map(cfg, u, p)
        payload["heights"] = T.to_json()
    return _emit(args, recs, payload)


def cmd_classify(args) -> int:
    tol = _tolerances(args)
    cfg = UnduloidConfig(unduloid_profile(args.necksize, args.periods, tol["ode_tol"]))
    poly = classify(cfg, m=max(2, args.grid // 2))
    err = float(abs(poly.edge_lengths[0] - cfg.necksize))
    rec = _record("polygon", "edge lengths equal the necksize", {"edge_lengths": poly.edge_lengths.tolist(),
                  "error": err}, "d(P1, P2) = n", {"abs": tol["pole_distance"]}, err < tol["pole_distance"])
    buf = io.StringIO()
    w = csv.writer(buf)
    w.writerow(["j", "Px", "Py", "Pz", "edge_length"])
    for j, (v, e) in enumerate(zip(poly.vertices, poly.edge_lengths), start=1):
        w.writerow([j] + [repr(float(x)) for x in v] + [repr(float(e))])
    return _emit(args, [rec], {"vertices": poly.vertices, "edge_lengths": poly.edge_lengths}, buf.getvalue())


def cmd_report(args) -> int:
    if not args.input:
        raise UsageError("report needs --input REPORT.json")
    try:
        with open(args.input) as fh:
            doc = json.load(fh)
        records = doc["records"]
    except (OSError, ValueError, KeyError) as exc:
        raise UsageError(f"cannot read report {args.input!r}: {exc}")
    ok = True
    for r in records:
        flag = "PASS" if r["passed"] else "FAIL"
        ok &= bool(r["passed"])
        print(f"{flag} {r['name']}: {r['anchor']}")
    m = doc.get("manifest", {})
    print(f"{sum(r['passed'] for r in records)}/{len(records)} passed ({m.get('command', '?')}, version {m.get('version', '?')})")
    return 0 if ok else 1


# ---------------------------------------------------------------------------

def build_parser() -> argparse.ArgumentParser:
    common = argparse.ArgumentParser(add_help=False)
    common.add_argument("--necksize", type=_necksize, default=1.0)
    common.add_argument("--periods", type=int, default=1)
    common.add_argument("--grid", type=int, default=64, help="cells along the finer grid direction")
    common.add_argument("--tol", type=_tol_value, default=None, help="ODE tolerance for profiles, or 'default'")
    common.add_argument("--tolerances", default=None, help="JSON file overriding check tolerances")
    common.add_argument("--seed", type=int, default=None)
    common.add_argument("--output", default=None)
    common.add_argument("--format", choices=("json", "csv"), default="json")

    ap = argparse.ArgumentParser(prog="cmclab", description=__doc__.splitlines()[0])
    ap.add_argument("--version", action="version", version=f"cmclab {__version__}")
    sub = ap.add_subparsers(dest="command", required=True)

    s = sub.add_parser("delaunay", parents=[common], help="integrate an unduloid profile")
    s.set_defaults(func=cmd_delaunay)

    s = sub.add_parser("verify", parents=[common], help="run the acceptance suite")
    s.add_argument("--surface", default="all")
    s.set_defaults(func=cmd_verify)

    s = sub.add_parser("holonomy", parents=[common], help="compass holonomy around a loop")
    s.add_argument("--surface", choices=SURFACES, default="unduloid")
    s.add_argument("--loop", choices=("cell", "rect", "neck"), default="rect")
    s.set_defaults(func=cmd_holonomy)

    s = sub.add_parser("cousin", parents=[common], help="integrate the cousin in S^3")
    s.add_argument("--surface", choices=SURFACES, default="unduloid")
    s.set_defaults(func=cmd_cousin)

    s = sub.add_parser("transport", parents=[common], help="transport eps along a path")
    s.add_argument("--surface", choices=SURFACES, default="unduloid")
    s.add_argument("--path", choices=("meridian", "neck", "quarter", "mixed"), default="neck")
    s.set_defaults(func=cmd_transport)

    s = sub.add_parser("conjvar", parents=[common], help="conjugate variation field checks")
    s.add_argument("--surface", choices=("unduloid", "cylinder", "catenoid"), default="unduloid")
    s.add_argument("--field", choices=FIELDS, default="nu3")
    s.add_argument("--minimal", action="store_true")
    s.set_defaults(func=cmd_conjvar)

    s = sub.add_parser("classify", parents=[common], help="classifying polygon of an unduloid")
    s.set_defaults(func=cmd_classify)

    s = sub.add_parser("report", parents=[common], help="summarize a JSON report")
    s.add_argument("--input", default=None)
    s.set_defaults(func=cmd_report)
    return ap


def main(argv=None) -> int:
    ap = build_parser()
    args = ap.parse_args(argv)
    if args.grid < 8:
        ap.error("--grid must be at least 8")
    if args.periods < 1:
        ap.error("--periods must be positive")
    try:
        return args.func(args)
    except UsageError as exc:
        print(f"cmclab {args.command}: {exc}", file=sys.stderr)
        return 2
    except InvalidInput as exc:
        print(f"cmclab {args.command}: {exc}", file=sys.stderr)
        return 2
    except CMCLabError as exc:
        print(f"cmclab {args.command}: {exc}", file=sys.stderr)
        return 1


if __name__ == "__main__":  # pragma: no cover
    sys.exit(main())
