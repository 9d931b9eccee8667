"""Stage sampling for path integrators.

Every path or grid line is cut into straight parameter steps.  A step from
``a`` to ``a + d`` is parameterized by ``tau in [0, 1]``; the integrators see
the one-forms evaluated on ``d`` at the stage points of each step, so the step
size in ``tau`` is always 1.

* ``omega = df o J0 (d) = -d_y f_x + d_x f_y`` is the connection form of the
  cousin / compass equations;
* ``beta = df o J1 (d) + d(u nu) o J0 (d)`` is the forcing of the conjugate
  variation equation.
"""
from __future__ import annotations

import math
from dataclasses import dataclass

import numpy as np
from scipy.interpolate import RectBivariateSpline

from .charts import ChartSample
from .errors import InvalidInput
from .patch import Patch, PathOnPatch

GAUSS2 = np.array([0.5 - math.sqrt(3.0) / 6.0, 0.5 + math.sqrt(3.0) / 6.0])
RK4_NODES = np.array([0.0, 0.5, 1.0])
#: default bound on the rotation angle ``2 |omega|`` per step
MAX_ANGLE = 0.1


def omega(sample: ChartSample, d: np.ndarray) -> np.ndarray:
    """``df o J0 (d)`` for displacements ``d`` broadcast against the sample."""
    return -d[..., 1:2] * sample.fx + d[..., 0:1] * sample.fy


def stage_points(a: np.ndarray, d: np.ndarray, nodes=GAUSS2) -> np.ndarray:
    """Points ``a + tau d`` for each stage ``tau``: shape ``a.shape[:-1] + (len(nodes), 2)``."""
    return a[..., None, :] + nodes[:, None] * d[..., None, :]


@dataclass(frozen=True)
class PathSteps:
    """Substeps of a polygonal path."""

    start: np.ndarray       # (S, 2) start of each substep
    d: np.ndarray           # (S, 2) displacement of each substep
    vertex_step: np.ndarray  # (N,) index into the trajectory for each vertex


def substeps_for(patch: Patch, a: np.ndarray, b: np.ndarray, max_angle=MAX_ANGLE) -> np.ndarray:
    """Number of equal substeps per segment so that ``2 |omega| <= max_angle``."""
    mid = 0.5 * (a + b)
    pts = np.stack([a, mid, b], axis=1)
    rho = np.linalg.norm(patch.sample(pts[..., 0], pts[..., 1]).fx, axis=-1).max(axis=1)
    ang = 2.0 * 1.1 * rho * np.linalg.norm(b - a, axis=-1)
    return np.maximum(1, np.ceil(ang / max_angle)).astype(int)


def path_steps(patch: Patch, path: PathOnPatch, max_angle=MAX_ANGLE) -> PathSteps:
    pts = path.points
    a, b = pts[:-1], pts[1:]
    m = substeps_for(patch, a, b, max_angle)
    seg = np.repeat(np.arange(len(a)), m)
    k = np.concatenate([np.arange(mm) for mm in m])
    frac = (k / m[seg])[:, None]
    d = (b - a)[seg] / m[seg][:, None]
    start = a[seg] + frac * (b - a)[seg]
    vertex_step = np.concatenate([[0], np.cumsum(m)])
    return PathSteps(start, d, vertex_step)


def line_steps(nodes: np.ndarray, sub: int):
    """Substeps along node lines: ``nodes`` is ``(m, L+1, 2)``; returns ``(start, d)`` of shape ``(m, L*sub, 2)``."""
    a, b = nodes[:, :-1], nodes[:, 1:]
    d = (b - a) / sub
    k = np.arange(sub)[None, None, :, None] / sub
    start = a[:, :, None, :] + k * (b - a)[:, :, None, :]
    m, L = a.shape[0], a.shape[1]
    return start.reshape(m, L * sub, 2), np.repeat(d, sub, axis=1).reshape(m, L * sub, 2)


def grid_substeps(patch: Patch, max_angle=MAX_ANGLE) -> int:
    """Uniform substep count per grid cell edge satisfying the angle bound."""
    h = max(patch.grid.hx, patch.grid.hy)
    return max(1, int(math.ceil(2.0 * 1.1 * float(np.max(patch.rho)) * h / max_angle)))


class ScalarInterpolant:
    """Bicubic spline of a grid scalar field and of its second-order grid gradient.

    The gradient is taken with ``numpy.gradient`` (second order, one-sided
    second-order edges) and then splined.
    """

    def __init__(self, patch: Patch, u: np.ndarray):
        u = np.asarray(u, dtype=float)
        if u.shape != patch.shape:
            raise InvalidInput(f"scalar field shape {u.shape} does not match grid {patch.shape}")
        g = patch.grid
        ux = np.gradient(u, g.hx, axis=0, edge_order=2)
        uy = np.gradient(u, g.hy, axis=1, edge_order=2)
        xs, ys = g.xs, g.ys
        self.u = u
        self.is_zero = not np.any(u)
        self._s = [RectBivariateSpline(xs, ys, a, s=0) for a in (u, ux, uy)]

    def __call__(self, pts: np.ndarray):
        x, y = pts[..., 0], pts[..., 1]
        return tuple(s.ev(x, y) for s in self._s)


def forcing(sample: ChartSample, uvals, d: np.ndarray) -> np.ndarray:
    """``df o J1 (d) + d(u nu) o J0 (d)`` at sampled points."""
    u, ux, uy = (np.asarray(a)[..., None] for a in uvals)
    nu = sample.normal
    nux, nuy = sample.normal_derivatives()
    rho2 = np.sum(sample.fx * sample.fx, axis=-1, keepdims=True)
    kappa = (np.sum(nu * sample.fyy, axis=-1, keepdims=True)
             - np.sum(nu * sample.fxx, axis=-1, keepdims=True)) / rho2
    dx, dy = d[..., 0:1], d[..., 1:2]
    j1 = u * kappa * (dy * sample.fx + dx * sample.fy)
    dunu_x = ux * nu + u * nux
    dunu_y = uy * nu + u * nuy
    return j1 - dy * dunu_x + dx * dunu_y


@dataclass(frozen=True)
class StageData:
    """Stage samples of the connection and forcing on a batch of step sequences."""

    omega: np.ndarray           # (m, n, stages, 3)
    beta: np.ndarray            # (m, n, stages, 3) or None
    points: np.ndarray          # (m, n, stages, 2)


def stage_data(patch: Patch, start: np.ndarray, d: np.ndarray, uint: ScalarInterpolant = None,
               nodes=GAUSS2) -> StageData:
    """Evaluate ``omega`` (and ``beta`` when a field is given) at the stage points."""
    pts = stage_points(start, d, nodes)
    s = patch.sample(pts[..., 0], pts[..., 1])
    dd = np.broadcast_to(d[..., None, :], pts.shape)
    om = omega(s, dd)
    beta = None
    if uint is not None:
        if uint.is_zero:
            beta = np.zeros_like(om)
        else:
            beta = forcing(s, uint(pts), dd)
    return StageData(om, beta, pts)


def _line_values(advance, init: np.ndarray, nodes: np.ndarray, sub: int) -> np.ndarray:
    """Advance ``init`` (m, k) along node lines ``(m, L+1, 2)``; returns node values ``(m, L+1, k)``."""
    if nodes.shape[1] == 1:
        return init[:, None, :].copy()
    start, d = line_steps(nodes, sub)
    traj = advance(init, start, d)
    return traj[:, ::sub]


def sweep_grid(patch: Patch, advance, value0, base=(0, 0), sub: int = 1, order: str = "xy") -> np.ndarray:
    """Integrate a path ODE from one node to the whole grid.

    ``advance(init, start, d)`` integrates a batch of initial values ``(m, k)``
    along substeps ``(m, n, 2)`` and returns the trajectory ``(m, n + 1, k)``.
    With ``order="xy"`` the base row is integrated first (both directions
    from the base node), then every column; ``"yx"`` swaps the roles.
    """
    g = patch.grid
    X, Y = g.mesh()
    P = np.stack([X, Y], axis=-1)
    if order == "yx":
        P = P.transpose(1, 0, 2)
        base = (base[1], base[0])
    elif order != "xy":
        raise InvalidInput("order must be 'xy' or 'yx'")
    n0, n1 = P.shape[0], P.shape[1]
    i0, j0 = base
    v0 = np.asarray(value0, dtype=float)
    k = v0.shape[-1]
    out = np.empty((n0, n1, k))
    row = P[:, j0]
    out[i0:, j0] = _line_values(advance, v0[None], row[None, i0:], sub)[0]
    out[:i0 + 1, j0] = _line_values(advance, v0[None], row[None, i0::-1], sub)[0][::-1]
    init = out[:, j0]
    out[:, j0:] = _line_values(advance, init, P[:, j0:], sub)
    out[:, :j0 + 1] = _line_values(advance, init, P[:, j0::-1], sub)[:, ::-1]
    if order == "yx":
        out = out.transpose(1, 0, 2)
    return out
