"""The conjugate cousin in S^3.

A conformal CMC patch ``f`` with ``H = 1`` has an isometric minimal cousin
``ftilde`` in the unit quaternions, found by integrating
``dftilde = ftilde (df o J0)``.  The system is integrable exactly when
``H = 1``; on other surfaces the loop defect measures the failure.

The cousin's principal curvatures are those of ``f`` shifted down by one,
which is checked here with finite differences of the integrated map.
"""
from __future__ import annotations

import csv
import json
from dataclasses import dataclass, field

import numpy as np
from scipy.integrate import cumulative_simpson

from . import fd, kernels
from .charts import GridChart
from .errors import IntegrabilityError, InvalidInput
from .patch import Patch, build_patch, polyline_nodes
from .quatgeo import ONE, Quaternion, as_unit, imag, qconj, qmul, rotation_angle, rotation_matrices
from .stepping import RK4_NODES, line_steps, stage_data, sweep_grid

#: default loop-defect bound for ``strict`` integration
LOOP_TOL = 1e-4


@dataclass(frozen=True)
class CousinPatch:
    """Cousin samples on the grid of the source patch.

    Finite-difference quantities (metric, curvatures) are NaN on the
    boundary ring.
    """

    grid: object
    ftilde: np.ndarray       # (nx, ny, 4) unit quaternions
    nutilde: np.ndarray      # (nx, ny, 4) normal ftilde nu, tangent to S^3
    metric: np.ndarray       # (nx, ny, 3): E, F, G of the pullback metric
    kappa: np.ndarray        # (nx, ny, 2) sorted principal curvatures in S^3
    base_index: tuple
    base_value: Quaternion
    order_discrepancy: float
    loop_defect: float
    report: dict = field(default_factory=dict, compare=False)

    @property
    def A2(self) -> np.ndarray:
        return self.kappa[..., 0] ** 2 + self.kappa[..., 1] ** 2

    def describe(self) -> dict:
        return {
            "grid": self.grid.as_dict(),
            "base_index": list(self.base_index),
            "base_value": list(map(float, self.base_value.as_array())),
            "order_discrepancy": self.order_discrepancy,
            "loop_defect": self.loop_defect,
            "unit_defect": float(np.max(np.abs(np.linalg.norm(self.ftilde, axis=-1) - 1.0))),
        }


def _rk4_advance(p: Patch, renormalize: bool):
    def advance(init, start, d):
        sd = stage_data(p, start, d, nodes=RK4_NODES)
        return kernels.quat_rk4(np.ascontiguousarray(init, dtype=float), np.ascontiguousarray(sd.omega),
                                1.0, renormalize)

    return advance


def loop_defect(p: Patch, i0=0, i1=None, j0=0, j1=None, renormalize: bool = True) -> float:
    """Rotation angle of the cousin holonomy around a node rectangle (default: the perimeter)."""
    i1 = p.grid.nx - 1 if i1 is None else i1
    j1 = p.grid.ny - 1 if j1 is None else j1
    nodes = polyline_nodes([(i0, j0), (i1, j0), (i1, j1), (i0, j1), (i0, j0)])
    pts = np.array([p.grid.node(i, j) for i, j in nodes])
    start, d = line_steps(pts[None], 1)
    g = _rk4_advance(p, renormalize)(np.array([[1.0, 0.0, 0.0, 0.0]]), start, d)[0, -1]
    g = g / np.linalg.norm(g)
    return rotation_angle(rotation_matrices(g))


def _metric(ft, hx, hy):
    fx = np.gradient(ft, hx, axis=0)
    fy = np.gradient(ft, hy, axis=1)
    E = np.sum(fx * fx, -1)
    F = np.sum(fx * fy, -1)
    G = np.sum(fy * fy, -1)
    out = np.stack([E, F, G], -1)
    out[0, :] = out[-1, :] = np.nan
    out[:, 0] = out[:, -1] = np.nan
    return out


def _curvatures(ft, nut, metric, hx, hy):
    """Principal curvatures from ``h_ab = <nutilde, ftilde_ab>`` and the metric."""
    fxx = fd.d2(ft, hx, 0)
    fyy = fd.d2(ft, hy, 1)
    fxy = fd.dxy(ft, hx, hy)
    h11 = np.sum(nut * fxx, -1)
    h12 = np.sum(nut * fxy, -1)
    h22 = np.sum(nut * fyy, -1)
    E, F, G = metric[..., 0], metric[..., 1], metric[..., 2]
    # det(h - k g) = 0
    a = E * G - F * F
    b = -(E * h22 + G * h11 - 2 * F * h12)
    c = h11 * h22 - h12 * h12
    disc = np.sqrt(np.maximum(b * b - 4 * a * c, 0.0))
    k1 = (-b - disc) / (2 * a)
    k2 = (-b + disc) / (2 * a)
    return np.stack([k1, k2], -1)


def integrate_cousin(p: Patch, base=ONE, base_index=(0, 0), renormalize: bool = True,
                     strict: bool = False, tol: float = LOOP_TOL) -> CousinPatch:
    """Integrate ``dftilde = ftilde (df o J0)`` over the grid of ``p``.

    Classical RK4 runs along the base row and then every column, with
    renormalization to the unit sphere after each step.  The order
    discrepancy compares with columns-then-rows; the loop defect is the
    holonomy angle around the grid perimeter.  With ``strict=True`` a loop
    defect above ``tol`` raises :class:`~cmclab.errors.IntegrabilityError`.
    """
    if not p.is_conformal:
        raise InvalidInput("the cousin system needs a conformal patch")
    q0 = as_unit(base).as_array()
    adv = _rk4_advance(p, renormalize)
    ft = sweep_grid(p, adv, q0, base_index, 1, "xy")
    ft_yx = sweep_grid(p, adv, q0, base_index, 1, "yx")
    disc = float(np.max(np.linalg.norm(ft - ft_yx, axis=-1)))
    defect = loop_defect(p, renormalize=renormalize)
    if strict and defect > tol:
        raise IntegrabilityError(f"cousin loop defect {defect:.3e} exceeds {tol:.1e}; "
                                 "the patch does not have H = 1", defect)
    g = p.grid
    nut = qmul(ft, imag(p.nu))
    metric = _metric(ft, g.hx, g.hy)
    kappa = _curvatures(ft, nut, metric, g.hx, g.hy)
    return CousinPatch(g, ft, nut, metric, kappa, tuple(base_index), Quaternion.from_array(q0),
                       disc, defect)


def cousin_identities(c: CousinPatch, p: Patch, margin: int = 1) -> dict:
    """Defects of the cousin identities on interior nodes.

    * ``unit``: ``max | |ftilde| - 1 |``;
    * ``metric``: pullback metric minus ``rho^2 I``;
    * ``curvature``: ``kappatilde_i - (kappa_i - 1)``;
    * ``A2``: ``|A_ftilde|^2 - (|A_f|^2 - 2)``.
    """
    s = (slice(margin, -margin), slice(margin, -margin))
    r2 = p.rho[s] ** 2
    m = c.metric[s]
    metric = np.max(np.abs(np.stack([m[..., 0] - r2, m[..., 1], m[..., 2] - r2], -1)))
    kap = np.stack([p.k1, p.k2], -1)[s] - 1.0
    curv = np.max(np.abs(c.kappa[s] - kap))
    a2 = np.max(np.abs(c.A2[s] - (p.A2[s] - 2.0)))
    return {
        "unit": float(np.max(np.abs(np.linalg.norm(c.ftilde, axis=-1) - 1.0))),
        "metric": float(metric),
        "curvature": float(curv),
        "A2": float(a2),
        "order_discrepancy": c.order_discrepancy,
        "loop_defect": c.loop_defect,
    }


def integrate_cousin_inverse(c: CousinPatch, base=(0.0, 0.0, 0.0)) -> Patch:
    """Recover ``f`` from the cousin by ``df = -ftilde^-1 dftilde o J0``.

    Fourth-order differences of ``ftilde`` give ``f_x = -ftilde^-1 ftilde_y``
    and ``f_y = ftilde^-1 ftilde_x``, integrated with Simpson sums along the
    first row and then the columns; ``f`` at node (0, 0) is ``base``.
    """
    g = c.grid
    ft = c.ftilde
    dx = fd.d1(ft, g.hx, 0, order=4)
    dy = fd.d1(ft, g.hy, 1, order=4)
    inv = qconj(ft)
    fx = -qmul(inv, dy)[..., 1:]
    fy = qmul(inv, dx)[..., 1:]
    row = cumulative_simpson(fx[:, 0], dx=g.hx, axis=0, initial=0.0)
    f = row[:, None, :] + cumulative_simpson(fy, dx=g.hy, axis=1, initial=0.0)
    f = f + np.asarray(base, dtype=float)
    return build_patch(GridChart(g.xs, g.ys, f), g)


def write_cousin(c: CousinPatch, csv_path, json_path=None) -> None:
    """CSV ``i,j,w,x,y,z`` per node plus a JSON sidecar with the defect report."""
    nx, ny = c.ftilde.shape[:2]
    with open(csv_path, "w", newline="") as fh:
        w = csv.writer(fh)
        w.writerow(["i", "j", "w", "x", "y", "z"])
        for i in range(nx):
            for j in range(ny):
                w.writerow([i, j] + [repr(float(v)) for v in c.ftilde[i, j]])
    if json_path is not None:
        with open(json_path, "w") as fh:
            json.dump(c.describe(), fh, indent=2, sort_keys=True)
