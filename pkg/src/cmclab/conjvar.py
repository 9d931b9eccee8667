"""Conjugate variation fields.

A Jacobi field ``u`` on an ``H = 1`` patch in curvature coordinates moves
the cousin to first order.  The motion is encoded by a vector field ``eps``
solving the inhomogeneous compass equation

    d eps = 2 eps x (df o J0) + df o J1 + d(u nu) o J0,

whose normal part ``<eps, nu>`` is again a Jacobi field.  Along a planar
symmetry curve the vertical part of ``eps`` changes by ``int u kappa_1 ds``;
these heights define the map ``T``.

For minimal patches the rotation term disappears and the same machinery
integrates ``d eps = df o J1 + d(u nu) o J0``.
"""
from __future__ import annotations

import json
import math
import warnings
from dataclasses import dataclass, field
from typing import List, Optional, Sequence

import numpy as np

from .delaunay import UnduloidConfig, symmetry_curves
from .errors import InvalidCurve, InvalidInput
from .patch import Patch, PathOnPatch, jacobi_relative_residual
from .stepping import (GAUSS2, MAX_ANGLE, ScalarInterpolant, forcing, grid_substeps, omega,
                       path_steps, stage_points, sweep_grid)
from .transport import E3, affine_advance, integrate_path, pole_solutions

#: ``max |L u| / max |rho^2 |A|^2 u|`` accepted as a Jacobi field
JACOBI_TOL = 0.1
#: relative size of the wrong-parity part of ``u`` tolerated on a symmetry curve
PARITY_TOL = 1e-8
#: bound on ``|H|`` (minimal variant) or ``|H - 1|``
MINIMAL_TOL = 1e-6
#: deviation of a symmetry curve from ``z = 0`` / conormal ``-e3``
CURVE_TOL = 1e-6


@dataclass(frozen=True)
class VariationField:
    """Conjugate variation samples, either along a path or on the grid.

    ``eps`` has shape ``(N, 3)`` for a path (one row per vertex) or
    ``(nx, ny, 3)`` on the grid.
    """

    patch: Patch = field(repr=False)
    u: np.ndarray = field(repr=False)
    eps: np.ndarray
    eps0: np.ndarray
    base: tuple
    path: Optional[PathOnPatch] = None
    minimal: bool = False

    @property
    def on_grid(self) -> bool:
        return self.path is None

    @property
    def end(self) -> np.ndarray:
        if self.on_grid:
            raise InvalidInput("grid fields have no end point")
        return self.eps[-1]


def _as_field(p: Patch, u) -> np.ndarray:
    if np.isscalar(u) and u == 0:
        return np.zeros(p.shape)
    u = np.asarray(u, dtype=float)
    if u.shape != p.shape:
        raise InvalidInput(f"scalar field shape {u.shape} does not match grid {p.shape}")
    return u


def _check_preconditions(p: Patch, u: np.ndarray, check_jacobi: bool, minimal: bool):
    if not p.is_curvature_coords:
        raise InvalidInput("conjugate variations need conformal curvature coordinates")
    if minimal:
        H = float(np.max(np.abs(p.H)))
        if H > MINIMAL_TOL:
            raise InvalidInput(f"the minimal variant needs H = 0 (max |H| = {H:.2e})")
    else:
        H = float(np.max(np.abs(p.H - 1.0)))
        if H > MINIMAL_TOL:
            raise InvalidInput(f"conjugate variations need H = 1 (max |H - 1| = {H:.2e})")
    if check_jacobi and np.any(u):
        r = jacobi_relative_residual(p, u)
        if not r < JACOBI_TOL:
            raise InvalidInput(f"u is not a Jacobi field on this patch (relative residual {r:.2e})")


def conjugate_variation(p: Patch, u, path: PathOnPatch, eps0=(0.0, 0.0, 0.0), *,
                        check_jacobi: bool = True, minimal: bool = False,
                        max_angle: float = MAX_ANGLE) -> VariationField:
    """Integrate the conjugate variation equation along ``path`` from ``eps0``."""
    u = _as_field(p, u)
    _check_preconditions(p, u, check_jacobi, minimal)
    adv = affine_advance(p, ScalarInterpolant(p, u), spin=not minimal)
    eps0 = np.asarray(eps0, dtype=float)
    eps = integrate_path(p, path, adv, eps0, max_angle)
    return VariationField(p, u, eps, eps0, tuple(path.points[0]), path, minimal)


def conjugate_variation_minimal(p: Patch, u, path: PathOnPatch, eps0=(0.0, 0.0, 0.0),
                                **kwargs) -> VariationField:
    """Minimal-surface variant: no rotation term."""
    return conjugate_variation(p, u, path, eps0, minimal=True, **kwargs)


def conjugate_variation_grid(p: Patch, u, eps0=(0.0, 0.0, 0.0), base=(0, 0), *, order: str = "xy",
                             check_jacobi: bool = True, minimal: bool = False,
                             max_angle: float = MAX_ANGLE) -> VariationField:
    """Conjugate variation on every node, reached along the base row and then the columns."""
    u = _as_field(p, u)
    _check_preconditions(p, u, check_jacobi, minimal)
    adv = affine_advance(p, ScalarInterpolant(p, u), spin=not minimal)
    eps0 = np.asarray(eps0, dtype=float)
    eps = sweep_grid(p, adv, eps0, base, grid_substeps(p, max_angle), order)
    return VariationField(p, u, eps, eps0, tuple(base), None, minimal)


def conjugate_field(v: VariationField) -> np.ndarray:
    """``u~ = <eps, nu>`` on the grid (or at the path vertices)."""
    p = v.patch
    if v.on_grid:
        return np.sum(v.eps * p.nu, axis=-1)
    pts = v.path.points
    return np.sum(v.eps * p.sample(pts[:, 0], pts[:, 1]).normal, axis=-1)


# ---------------------------------------------------------------------------
# symmetry curves and heights

def _validate_symmetry_curve(p: Patch, gamma: PathOnPatch, tol: float = CURVE_TOL):
    pts = gamma.points
    s = p.sample(pts[:, 0], pts[:, 1])
    scale = max(1.0, float(np.max(np.abs(s.f))))
    z = float(np.max(np.abs(s.f[:, 2])))
    if z > tol * scale:
        raise InvalidCurve(f"curve '{gamma.label}' leaves the plane z = 0 (|z| up to {z:.2e})")
    d = np.gradient(pts, axis=0)
    eta = omega(s, d)
    eta = eta / np.linalg.norm(eta, axis=1, keepdims=True)
    dev = float(np.max(np.linalg.norm(eta + E3, axis=1)))
    if dev > tol:
        raise InvalidCurve(f"curve '{gamma.label}' does not have conormal -e3 (deviation {dev:.2e})")


def _height_quadrature(p: Patch, uint: ScalarInterpolant, gamma: PathOnPatch, max_angle: float) -> float:
    steps = path_steps(p, gamma, max_angle)
    pts = stage_points(steps.start, steps.d, GAUSS2)
    s = p.sample(pts[..., 0], pts[..., 1])
    nu = s.normal
    rho2 = np.sum(s.fx * s.fx, -1)
    kx = np.sum(nu * s.fxx, -1) / rho2
    ky = np.sum(nu * s.fyy, -1) / rho2
    k1 = np.minimum(kx, ky)
    speed = np.sqrt(rho2) * np.linalg.norm(steps.d, axis=-1)[:, None]
    u = uint(pts)[0]
    return float(np.sum(0.5 * u * k1 * speed))


def heights(p: Patch, u, gamma: PathOnPatch, max_angle: float = MAX_ANGLE, with_tol: bool = False):
    """``h(u) = int_gamma u kappa_1 ds`` along a symmetry curve.

    The quadrature uses two Gauss points per substep, the same points as the
    path stepper.  With ``with_tol`` the difference to a quadrature on twice
    as many substeps is returned as well.
    """
    u = _as_field(p, u)
    _validate_symmetry_curve(p, gamma)
    if not np.any(u):
        return (0.0, 0.0) if with_tol else 0.0
    uint = ScalarInterpolant(p, u)
    h = _height_quadrature(p, uint, gamma, max_angle)
    if not with_tol:
        return h
    h2 = _height_quadrature(p, uint, gamma, 0.5 * max_angle)
    return h, abs(h2 - h)


def heights_json(curve_id: str, h: float, quadrature_tol: float) -> dict:
    return {"curve_id": curve_id, "h": float(h), "quadrature_tol": float(quadrature_tol)}


def parity_split(p: Patch, u, j_axis: int):
    """Even and odd parts of ``u`` under the reflection ``j -> 2 j_axis - j``.

    Only the columns whose mirror lies on the grid are filled; the rest are NaN.
    """
    u = _as_field(p, u)
    ny = p.grid.ny
    even = np.full(u.shape, np.nan)
    odd = np.full(u.shape, np.nan)
    for j in range(ny):
        jm = 2 * j_axis - j
        if 0 <= jm < ny:
            even[:, j] = 0.5 * (u[:, j] + u[:, jm])
            odd[:, j] = 0.5 * (u[:, j] - u[:, jm])
    return even, odd


def symmetry_evolution_residual(p: Patch, u, gamma: PathOnPatch, eps=None,
                                eps0=(0.3, -0.2, 0.5), max_angle: float = MAX_ANGLE) -> float:
    """Max along ``gamma`` of ``|d eps(gamma') - (-2 eps x e3 + u kappa_1 e3)|``.

    ``d eps(gamma')`` is the full right-hand side evaluated at the vertices
    with ``eps`` from :func:`conjugate_variation` (or the given samples).
    A warning is issued when ``u`` is not even across the curve.
    """
    u = _as_field(p, u)
    _validate_symmetry_curve(p, gamma)
    pts = gamma.points
    g = p.grid
    j_axis = int(round((pts[0, 1] - g.y0) / g.hy))
    _, odd = parity_split(p, u, j_axis)
    norm = float(np.max(np.abs(u))) if np.any(u) else 1.0
    if np.nanmax(np.abs(odd)) > PARITY_TOL * norm:
        warnings.warn("u has an odd part across the symmetry curve; the reduced evolution assumes even u",
                      RuntimeWarning, stacklevel=2)
    if eps is None:
        eps = conjugate_variation(p, u, gamma, eps0, check_jacobi=False, max_angle=max_angle).eps
    eps = np.asarray(eps, dtype=float)
    s = p.sample(pts[:, 0], pts[:, 1])
    d = np.gradient(pts, axis=0)
    d = d / (np.linalg.norm(s.fx, axis=1) * np.linalg.norm(d, axis=1))[:, None]  # unit speed
    om = omega(s, d)
    uvals = ScalarInterpolant(p, u)(pts)
    full = 2.0 * np.cross(eps, om) + forcing(s, uvals, d)
    nu = s.normal
    rho2 = np.sum(s.fx * s.fx, -1)
    k1 = np.minimum(np.sum(nu * s.fxx, -1), np.sum(nu * s.fyy, -1)) / rho2
    reduced = -2.0 * np.cross(eps, E3) + (uvals[0] * k1)[:, None] * E3
    return float(np.max(np.linalg.norm(full - reduced, axis=1)))


# ---------------------------------------------------------------------------
# the maps T and T-hat

@dataclass(frozen=True)
class Heights:
    """Heights per symmetry curve and the alternating sums over cylindrical strings."""

    curve_ids: List[str]
    h: np.ndarray
    strings: List[List[int]]      # 1-based curve indices per string
    hhat: np.ndarray
    quadrature_tol: np.ndarray

    @property
    def d(self) -> int:
        return len(self.strings)

    def to_json(self) -> dict:
        return {
            "T": list(map(float, self.h)),
            "T_hat": list(map(float, self.hhat)),
            "strings": [list(s) for s in self.strings],
            "heights": [heights_json(c, h, t) for c, h, t in zip(self.curve_ids, self.h, self.quadrature_tol)],
        }


def cylindrical_strings(cylindrical: Sequence[bool]) -> List[List[int]]:
    """Partition curves ``1..k`` into strings joined by cylindrical ends.

    Curve ``j`` runs from end ``E_{j-1}`` to ``E_j`` (indices mod ``k``).  A
    string starts at a curve whose incoming end is not cylindrical; when every
    end is cylindrical the whole cycle is one string starting at curve 1.
    """
    k = len(cylindrical)
    cyl = [bool(c) for c in cylindrical]
    starts = [j for j in range(1, k + 1) if not cyl[(j - 2) % k]]
    if not starts:
        return [list(range(1, k + 1))]
    out = []
    for s in starts:
        run = [s]
        j = s
        while cyl[(j - 1) % k] and len(run) < k:
            j = j % k + 1
            run.append(j)
        out.append(run)
    return out


def alternating_sums(h: Sequence[float], strings: List[List[int]]) -> np.ndarray:
    """``hhat_m = sum_j (-1)^(e_m - j) h_j`` over each string (``e_m`` its last curve)."""
    out = []
    for run in strings:
        n = len(run)
        out.append(sum((-1) ** (n - 1 - pos) * h[j - 1] for pos, j in enumerate(run)))
    return np.array(out, dtype=float)


def _end_is_cylindrical(cfg: UnduloidConfig) -> bool:
    return abs(cfg.necksize - math.pi) <= 1e-9


def t_map(cfg: UnduloidConfig, u, p: Optional[Patch] = None, truncation=(0, 1), m: int = 32,
          max_angle: float = MAX_ANGLE) -> Heights:
    """``T(u) = (h_1(u), h_2(u))`` on the symmetry curves of an unduloid, with ``T-hat``."""
    p = cfg.patch(m) if p is None else p
    curves = symmetry_curves(cfg, p, truncation)
    vals = [heights(p, u, c, max_angle, with_tol=True) for c in curves]
    h = np.array([v[0] for v in vals])
    tol = np.array([v[1] for v in vals])
    cyl = [_end_is_cylindrical(cfg)] * len(curves)
    strings = cylindrical_strings(cyl)
    return Heights([c.label for c in curves], h, strings, alternating_sums(h, strings), tol)


def pole_relation_residual(cfg: UnduloidConfig, u, p: Optional[Patch] = None, truncation=(0, 1),
                           m: int = 32, max_angle: float = MAX_ANGLE) -> np.ndarray:
    """``sum_j h_j(u) P_j(q)`` at the pole base point (reported, not asserted)."""
    p = cfg.patch(m) if p is None else p
    T = t_map(cfg, u, p, truncation, max_angle=max_angle)
    P = pole_solutions(cfg, p, truncation, max_angle=max_angle).poles
    return T.h @ P


def write_heights_json(T: Heights, path) -> None:
    with open(path, "w") as fh:
        json.dump(T.to_json(), fh, indent=2, sort_keys=True)
