"""The compass equation ``d eps = 2 eps x (df o J0)``.

Along a path the field ``eps`` spins with angular speed 2 about the conormal
``df o J0 (gamma')``.  Solutions are written ``eps = g^-1 eps0 g`` with the
quaternion lift ``g' = g omega``, ``g(0) = 1``; both are advanced with a
fourth-order Magnus stepper on Gauss-point samples.  The connection is flat
exactly on surfaces with ``H = 1``, which is what :func:`holonomy` measures.
"""
from __future__ import annotations

import csv
import json
import math
from dataclasses import dataclass, field
from typing import List, Optional

import numpy as np

from . import fd, kernels
from .delaunay import UnduloidConfig, symmetry_curves, _neck_index
from .errors import InvalidInput, InvalidPath
from .patch import Patch, PathOnPatch, line_nodes, node_path, polyline_nodes
from .quatgeo import Quaternion, rotation_angle, rotation_matrices, conjugate_vectors, qconj, qmul, imag
from .stepping import MAX_ANGLE, grid_substeps, path_steps, stage_data, sweep_grid

E3 = np.array([0.0, 0.0, 1.0])


# ---------------------------------------------------------------------------
# stepping helpers shared with the conjugate variation module

def affine_advance(patch: Patch, uint=None, spin: bool = True):
    """Batch stepper for ``eps' = -2 omega x eps + beta``.

    ``uint`` is a :class:`~cmclab.stepping.ScalarInterpolant` for the forcing
    (``None`` means the homogeneous equation); ``spin=False`` drops the
    rotation term, which gives the minimal-surface variant.
    """

    def advance(init, start, d):
        sd = stage_data(patch, start, d, uint)
        w = -2.0 * sd.omega if spin else np.zeros_like(sd.omega)
        b = sd.beta if sd.beta is not None else np.zeros_like(sd.omega)
        return kernels.affine_magnus4(np.ascontiguousarray(init, dtype=float),
                                      np.ascontiguousarray(w), np.ascontiguousarray(b))

    return advance


def lift_advance(patch: Patch):
    """Batch stepper for the quaternion lift ``g' = g omega``."""

    def advance(init, start, d):
        sd = stage_data(patch, start, d)
        return kernels.quat_magnus4(np.ascontiguousarray(init, dtype=float),
                                    np.ascontiguousarray(sd.omega))

    return advance


def integrate_path(patch: Patch, path: PathOnPatch, advance, init, max_angle=MAX_ANGLE):
    """Run ``advance`` along ``path``; returns the values at the path vertices."""
    steps = path_steps(patch, path, max_angle)
    traj = advance(np.asarray(init, dtype=float)[None], steps.start[None], steps.d[None])[0]
    return traj[steps.vertex_step]


def _check_on_patch(patch: Patch, path: PathOnPatch):
    g = patch.grid
    pts = path.points
    eps = 1e-9 * max(g.x1 - g.x0, g.y1 - g.y0)
    if (pts[:, 0].min() < g.x0 - eps or pts[:, 0].max() > g.x1 + eps
            or pts[:, 1].min() < g.y0 - eps or pts[:, 1].max() > g.y1 + eps):
        raise InvalidPath("path leaves the grid domain")


# ---------------------------------------------------------------------------
# transport and holonomy

@dataclass(frozen=True)
class TransportResult:
    """Compass-equation solution sampled at the vertices of a path."""

    path: PathOnPatch
    eps: np.ndarray          # (N, 3)
    lift: np.ndarray         # (N, 4) quaternion lift, starting at 1
    norm_drift: float        # max | |eps| - |eps0| |

    @property
    def start(self) -> np.ndarray:
        return self.eps[0]

    @property
    def end(self) -> np.ndarray:
        return self.eps[-1]


def transport(p: Patch, path: PathOnPatch, eps0, max_angle: float = MAX_ANGLE) -> TransportResult:
    """Transport ``eps0`` along ``path`` by the compass equation."""
    _check_on_patch(p, path)
    eps0 = np.asarray(eps0, dtype=float)
    if eps0.shape != (3,):
        raise InvalidInput("eps0 must be a 3-vector")
    eps = integrate_path(p, path, affine_advance(p), eps0, max_angle)
    lift = integrate_path(p, path, lift_advance(p), [1.0, 0.0, 0.0, 0.0], max_angle)
    drift = float(np.max(np.abs(np.linalg.norm(eps, axis=1) - np.linalg.norm(eps0))))
    return TransportResult(path, eps, lift, drift)


@dataclass(frozen=True)
class Holonomy:
    """Net rotation of the compass connection around a loop."""

    lift: Quaternion
    rotation: np.ndarray
    angle: float
    loop_id: str = ""

    def to_json(self, tolerance: float) -> dict:
        return {
            "loop_id": self.loop_id,
            "angle": self.angle,
            "quaternion_lift": list(map(float, self.lift.as_array())),
            "tolerance": float(tolerance),
            "pass": bool(self.angle < tolerance),
        }


def holonomy(p: Patch, loop: PathOnPatch, max_angle: float = MAX_ANGLE) -> Holonomy:
    """Holonomy of the compass equation around a closed loop.

    The lift is continued from 1, so a loop that spins by a full turn
    reports the lift -1 with a trivial rotation.
    """
    if not loop.closed:
        raise InvalidPath("holonomy needs a closed loop")
    _check_on_patch(p, loop)
    g = integrate_path(p, loop, lift_advance(p), [1.0, 0.0, 0.0, 0.0], max_angle)[-1]
    g = g / np.linalg.norm(g)
    R = rotation_matrices(g)
    return Holonomy(Quaternion.from_array(g), R, rotation_angle(R), loop.label)


def write_holonomy_json(h: Holonomy, path, tolerance: float) -> None:
    with open(path, "w") as fh:
        json.dump(h.to_json(tolerance), fh, indent=2, sort_keys=True)


def transport_grid(p: Patch, eps0, base=(0, 0), order: str = "xy", max_angle: float = MAX_ANGLE) -> np.ndarray:
    """Compass solution on every grid node, reached along a row and then columns."""
    return sweep_grid(p, affine_advance(p), eps0, base, grid_substeps(p, max_angle), order)


# ---------------------------------------------------------------------------
# cousin cross-check

def crosscheck_cousin_transport(p: Patch, c, path: PathOnPatch, eps0) -> float:
    """Max over the path vertices of ``|eps - ftilde^-1 alpha ftilde|``.

    ``alpha = ftilde(start) eps0 ftilde(start)^-1`` is the constant field in
    the cousin frame.  The path must run through grid nodes.
    """
    eps0 = np.asarray(eps0, dtype=float)
    if not np.any(eps0):
        return 0.0
    g = p.grid
    ii = np.rint((path.points[:, 0] - g.x0) / g.hx).astype(int)
    jj = np.rint((path.points[:, 1] - g.y0) / g.hy).astype(int)
    if (np.max(np.abs(g.x0 + ii * g.hx - path.points[:, 0])) > 1e-9
            or np.max(np.abs(g.y0 + jj * g.hy - path.points[:, 1])) > 1e-9):
        raise InvalidPath("cross-check paths must run through grid nodes")
    ft = c.ftilde[ii, jj]
    alpha = qmul(qmul(ft[0], imag(eps0)), qconj(ft[0]))[1:]
    expected = conjugate_vectors(ft, np.broadcast_to(alpha, (len(ft), 3)))
    eps = transport(p, path, eps0).eps
    return float(np.max(np.linalg.norm(eps - expected, axis=1)))


# ---------------------------------------------------------------------------
# pole solutions and the classifying polygon

@dataclass(frozen=True)
class PoleSet:
    """Pole solutions of a symmetric configuration.

    ``poles[j]`` is ``P_j(q)``; ``fields[j]`` samples ``P_j`` on the grid and
    ``half`` masks the nodes of ``Sigma+``.
    """

    poles: np.ndarray        # (k, 3)
    q: np.ndarray            # parameter point
    q_index: tuple
    fields: np.ndarray       # (k, nx, ny, 3)
    half: np.ndarray         # (nx, ny) bool
    labels: List[str]
    truncation: tuple

    @property
    def distances(self) -> np.ndarray:
        """Spherical distance matrix of the poles at ``q``."""
        c = np.clip(self.poles @ self.poles.T, -1.0, 1.0)
        return np.arccos(c)

    def distance_fields(self) -> np.ndarray:
        """``d(P_1, P_2)`` at every grid node (k = 2)."""
        c = np.clip(np.sum(self.fields[0] * self.fields[1], axis=-1), -1.0, 1.0)
        return np.arccos(c)


def _spherical_distance(a, b) -> float:
    # atan2 form keeps accuracy near 0 and pi
    return float(math.atan2(np.linalg.norm(np.cross(a, b)), float(np.dot(a, b))))


def pole_solutions(cfg: UnduloidConfig, p: Optional[Patch] = None, truncation=(0, 1),
                   m: int = 32, max_angle: float = MAX_ANGLE) -> PoleSet:
    """Pole solutions ``P_1`` and ``P_2`` of a symmetric unduloid.

    ``P_j = e3`` along ``gamma_j``.  ``P_1(q)`` and ``P_2(q)`` are evaluated at
    the midpoint ``q`` of ``gamma_1``; ``P_2(q)`` is transported from
    ``gamma_2`` through the half neck at the first truncation neck and then
    along ``gamma_1``.  Grid fields are obtained by sweeping from a node of
    each curve.
    """
    if not isinstance(cfg, UnduloidConfig):
        raise InvalidInput("pole solutions need a symmetric unduloid configuration")
    p = cfg.patch(m) if p is None else p
    g1, g2 = symmetry_curves(cfg, p, truncation)
    i0, i1 = _neck_index(p, cfg, truncation[0]), _neck_index(p, cfg, truncation[1])
    j0, jpi = p.grid.index_of(y=0.0), p.grid.index_of(y=math.pi)
    iq = (i0 + i1) // 2
    q = p.grid.node(iq, j0)

    P1q = integrate_path(p, node_path(p, line_nodes((i1, j0), (iq, j0))), affine_advance(p), E3, max_angle)[-1]
    route = node_path(p, polyline_nodes([(i0, jpi), (i0, j0), (iq, j0)]), label="gamma2->q")
    P2q = integrate_path(p, route, affine_advance(p), E3, max_angle)[-1]

    sub = grid_substeps(p, max_angle)
    adv = affine_advance(p)
    F1 = sweep_grid(p, adv, E3, (iq, j0), sub)
    F2 = sweep_grid(p, adv, E3, (iq, jpi), sub)
    jj = np.arange(p.grid.ny)
    half = np.zeros(p.shape, dtype=bool)
    half[:, (jj >= j0) & (jj <= jpi)] = True
    half[: min(i0, i1)] = False
    half[max(i0, i1) + 1:] = False
    return PoleSet(np.array([P1q, P2q]), q, (iq, j0), np.array([F1, F2]), half,
                   [g1.label, g2.label], tuple(truncation))


@dataclass(frozen=True)
class Polygon:
    """Classifying polygon: vertices ``P_j(q)`` normalized so that ``P_1 = e3``."""

    vertices: np.ndarray
    edge_lengths: np.ndarray
    normalization: np.ndarray = field(repr=False)


def normalizing_rotation(P1, P2) -> np.ndarray:
    """Rotation taking ``P1`` to ``e3`` and ``P2`` into the half plane ``y = 0, x >= 0``."""
    e3 = np.asarray(P1, float) / np.linalg.norm(P1)
    t = np.asarray(P2, float) - np.dot(P2, e3) * e3
    if np.linalg.norm(t) < 1e-12:
        # P2 = +-P1: any perpendicular direction will do
        t = np.cross(e3, [1.0, 0.0, 0.0])
        if np.linalg.norm(t) < 1e-6:
            t = np.cross(e3, [0.0, 1.0, 0.0])
    e1 = t / np.linalg.norm(t)
    e2 = np.cross(e3, e1)
    return np.array([e1, e2, e3])


def classify(cfg: UnduloidConfig, poles: Optional[PoleSet] = None, **kwargs) -> Polygon:
    """Classifying polygon of ``cfg`` at the base point of its pole set."""
    poles = pole_solutions(cfg, **kwargs) if poles is None else poles
    P = poles.poles / np.linalg.norm(poles.poles, axis=1, keepdims=True)
    R = normalizing_rotation(P[0], P[1])
    V = P @ R.T
    k = len(V)
    edges = np.array([_spherical_distance(V[j], V[(j + 1) % k]) for j in range(k)])
    return Polygon(V, edges, R)


def write_polygon_csv(poly: Polygon, path) -> None:
    with open(path, "w", newline="") as fh:
        w = csv.writer(fh)
        w.writerow(["j", "Px", "Py", "Pz", "edge_length"])
        for j, (v, e) in enumerate(zip(poly.vertices, poly.edge_lengths), start=1):
            w.writerow([j, repr(float(v[0])), repr(float(v[1])), repr(float(v[2])), repr(float(e))])


# ---------------------------------------------------------------------------
# harmonicity of the rotation map

def rotation_map_harmonicity(p: Patch, c) -> np.ndarray:
    """Per-node norm of ``R^-1 Lap R - (R^-1 R_x)^2 - (R^-1 R_y)^2``.

    ``R = rotation_of(ftilde)``; derivatives are second-order central
    differences, so the boundary ring is NaN.
    """
    g = p.grid
    R = rotation_matrices(c.ftilde)
    Rt = np.swapaxes(R, -1, -2)
    lap = fd.laplacian5(R, g.hx, g.hy)
    Rx = np.gradient(R, g.hx, axis=0)
    Ry = np.gradient(R, g.hy, axis=1)
    Ax, Ay = Rt @ Rx, Rt @ Ry
    res = Rt @ lap - Ax @ Ax - Ay @ Ay
    out = np.linalg.norm(res, axis=(-2, -1))
    out[0, :] = out[-1, :] = np.nan
    out[:, 0] = out[:, -1] = np.nan
    return out
