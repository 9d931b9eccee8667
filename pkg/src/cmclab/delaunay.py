"""Delaunay unduloids with mean curvature 1.

The meridian ``(x(s), r(s))`` of an unduloid, with ``theta`` the angle of its
tangent against the axis, solves::

    r' = sin(theta),  x' = cos(theta),  theta' = cos(theta)/r - 2

in arclength ``s``.  ``F = r cos(theta) - r^2`` is a first integral and the
necks and bulges (``theta = 0``) satisfy ``r_min + r_max = 1``.  The necksize
is the neck circumference ``n = 2 pi r_min``; ``n = pi`` is the cylinder of
radius 1/2.

Integration runs in the conformal variable ``t`` with ``dt = ds / r``, where
the rotational chart ``(t, phi)`` is a conformal curvature chart with
``rho = r``, ``kx = 2 - cos(theta)/r`` (meridians), ``ky = cos(theta)/r``
(parallels) and ``kappa rho^2 = 2F``.
"""
from __future__ import annotations

import csv
import json
import math
from dataclasses import dataclass, field
from typing import Optional, Sequence, Tuple

import numpy as np
from scipy.integrate import solve_ivp

from .charts import Chart, ChartSample
from .errors import IntegrationFailure, InvalidInput, InvalidPath
from .patch import GridSpec, Patch, PathOnPatch, build_patch, line_nodes, node_path

#: smallest accepted necksize; the sphere-chain limit n -> 0 is degenerate
MIN_NECKSIZE = 1e-3
NECKSIZE_MESSAGE = "necksize must lie in (0, π]"


def _rhs(t, y):
    s, x, r, th = y
    c = math.cos(th)
    return [r, r * c, r * math.sin(th), c - 2.0 * r]


@dataclass(frozen=True)
class DelaunayProfile:
    """Solution of the profile ODE in the conformal variable ``t``, starting at a neck."""

    necksize: float
    periods: int
    t: np.ndarray
    s: np.ndarray
    x: np.ndarray
    r: np.ndarray
    theta: np.ndarray
    F: float
    r_min: float
    r_max: float
    period_t: float
    neck_t: np.ndarray
    bulge_t: np.ndarray
    F_drift: float
    _sol: object = field(default=None, repr=False, compare=False)

    @property
    def is_cylinder(self) -> bool:
        return self._sol is None

    @property
    def t_end(self) -> float:
        return float(self.t[-1])

    @property
    def neck_s(self) -> np.ndarray:
        return self.state(self.neck_t)[0]

    @property
    def bulge_s(self) -> np.ndarray:
        return self.state(self.bulge_t)[0]

    def state(self, t):
        """``(s, x, r, theta)`` at conformal parameter(s) ``t``."""
        t = np.asarray(t, dtype=float)
        if self._sol is None:
            half = np.full_like(t, 0.5)
            return 0.5 * t, 0.5 * t, half, np.zeros_like(t)
        if np.any(t < -1e-9) or np.any(t > self.t_end + 1e-9):
            raise InvalidInput("profile evaluated outside its integrated range")
        y = self._sol(t.ravel())
        return tuple(y[k].reshape(t.shape) for k in range(4))

    def first_integral(self, t) -> np.ndarray:
        _, _, r, th = self.state(t)
        return r * np.cos(th) - r ** 2

    def curvatures(self, t):
        """``(kx, ky)``: meridian and parallel curvatures at ``t``."""
        _, _, r, th = self.state(t)
        ky = np.cos(th) / r
        return 2.0 - ky, ky

    def describe(self) -> dict:
        return {"necksize": self.necksize, "periods": self.periods, "F": self.F,
                "r_min": self.r_min, "r_max": self.r_max, "period_t": self.period_t,
                "F_drift": self.F_drift, "neck_s": self.neck_s.tolist(),
                "bulge_s": self.bulge_s.tolist()}


def check_necksize(n: float) -> float:
    n = float(n)
    if not (math.isfinite(n) and 0.0 < n <= math.pi + 1e-12):
        raise InvalidInput(NECKSIZE_MESSAGE)
    if n < MIN_NECKSIZE:
        raise InvalidInput(f"necksize below {MIN_NECKSIZE} is numerically degenerate")
    return min(n, math.pi)


def _is_cylinder(n: float) -> bool:
    return abs(n - math.pi) <= 1e-9


def unduloid_profile(n: float, periods: int = 1, tol: float = 1e-10) -> DelaunayProfile:
    """Integrate the profile of necksize ``n`` over ``periods`` neck-to-neck periods.

    The ODE is solved with DOP853 (dense output) at relative tolerance
    ``tol / 100``; the drift of ``F`` must stay below ``tol``.
    """
    n = check_necksize(n)
    periods = int(periods)
    if periods < 1:
        raise InvalidInput("periods must be a positive integer")
    r0 = n / (2 * math.pi)
    F = r0 - r0 ** 2
    if _is_cylinder(n):
        # exact cylinder: necks are placed a profile length pi apart
        Tp = 2 * math.pi
        t = np.linspace(0.0, periods * Tp, 64 * periods + 1)
        return DelaunayProfile(math.pi, periods, t, 0.5 * t, 0.5 * t, np.full_like(t, 0.5),
                               np.zeros_like(t), 0.25, 0.5, 0.5, Tp,
                               Tp * np.arange(periods + 1), Tp * (np.arange(periods) + 0.5), 0.0)

    rtol = tol * 1e-2
    atol = tol * 1e-4

    def neck(t, y):
        return y[3]
    neck.direction = 1.0

    def bulge(t, y):
        return y[3]
    bulge.direction = -1.0

    def next_neck(t, y):
        return y[3]
    next_neck.direction = 1.0
    # the start point counts as the first occurrence
    next_neck.terminal = 2

    y0 = [0.0, 0.0, r0, 0.0]
    # one period first, to size the full integration
    probe = solve_ivp(_rhs, (0.0, 1e3), y0, method="DOP853", rtol=rtol, atol=atol,
                      events=[next_neck])
    if probe.status != 1:
        raise IntegrationFailure("could not locate the second neck of the profile")
    t_period = float(probe.t_events[0][-1])
    t_end = (periods + 0.25) * t_period
    sol = solve_ivp(_rhs, (0.0, t_end), y0, method="DOP853", rtol=rtol, atol=atol,
                    events=[neck, bulge], dense_output=True)
    if not sol.success:
        raise IntegrationFailure(f"profile integration failed: {sol.message}")
    necks = np.concatenate([[0.0], sol.t_events[0][sol.t_events[0] > 1e-9]])[: periods + 1]
    bulges = sol.t_events[1][: periods]
    if len(necks) < periods + 1 or len(bulges) < periods:
        raise IntegrationFailure("profile did not reach the requested number of periods")
    t = np.linspace(0.0, t_end, 256 * periods + 65)
    y = sol.sol(t)
    Fs = y[2] * np.cos(y[3]) - y[2] ** 2
    drift = float(np.max(np.abs(Fs - F)))
    if drift > tol:
        raise IntegrationFailure(f"first-integral drift {drift:.3e} exceeds tolerance {tol:.1e}")
    r_max = float(sol.sol(bulges[0])[2])
    return DelaunayProfile(n, periods, t, y[0], y[1], y[2], y[3], F, r0, r_max,
                           float(necks[1] - necks[0]), necks, bulges, drift, sol.sol)


def write_profile_csv(prof: DelaunayProfile, path) -> None:
    """Profile samples with columns ``s,x,r,theta,F``."""
    with open(path, "w", newline="") as fh:
        w = csv.writer(fh)
        w.writerow(["s", "x", "r", "theta", "F"])
        for s, x, r, th in zip(prof.s, prof.x, prof.r, prof.theta):
            w.writerow([repr(float(s)), repr(float(x)), repr(float(r)), repr(float(th)),
                        repr(float(r * math.cos(th) - r * r))])


# ---------------------------------------------------------------------------
# placement and chart

class UnduloidChart(Chart):
    """``origin + x(t) a + r(t) (cos(phi) b + sin(phi) e3)`` with ``b = e3 x a``."""

    def __init__(self, prof: DelaunayProfile, axis=(1.0, 0.0, 0.0), origin=(0.0, 0.0, 0.0)):
        a = np.asarray(axis, dtype=float)
        if abs(a[2]) > 1e-12 or abs(np.linalg.norm(a) - 1.0) > 1e-12:
            raise InvalidInput("unduloid axis must be a unit vector in the plane z = 0")
        self.prof = prof
        self.a = a
        self.b = np.cross([0.0, 0.0, 1.0], a)
        self.origin = np.asarray(origin, dtype=float)
        self.chart_id = f"unduloid(n={prof.necksize:.12g})"
        self.period = (None, 2 * math.pi)

    def evaluate(self, t, phi):
        t, phi = np.broadcast_arrays(np.asarray(t, float), np.asarray(phi, float))
        _, x, r, th = self.prof.state(t)
        st, ct = np.sin(th), np.cos(th)
        c, s = np.cos(phi), np.sin(phi)
        xt, rt = r * ct, r * st
        xtt, rtt = 2 * r ** 2 * st, r - 2 * r ** 2 * ct
        z = np.zeros_like(t)
        e3 = np.array([0.0, 0.0, 1.0])

        def place(ax, rad):
            # ax along a, rad[..., 0:2] in the (b, e3) plane
            return (ax[..., None] * self.a + rad[..., 0:1] * self.b + rad[..., 1:2] * e3)

        def radial(m, cc, ss):
            return np.stack([m * cc, m * ss], axis=-1)

        f = self.origin + place(x, radial(r, c, s))
        ft = place(xt, radial(rt, c, s))
        fp = place(z, radial(r, -s, c))
        ftt = place(xtt, radial(rtt, c, s))
        ftp = place(z, radial(rt, -s, c))
        fpp = place(z, radial(r, -c, -s))
        return ChartSample(f, ft, fp, ftt, ftp, fpp)


@dataclass(frozen=True)
class UnduloidConfig:
    """An unduloid placed with axis ``a`` in the symmetry plane ``z = 0``.

    ``Sigma+`` is ``phi in (0, pi)`` (the half with ``z > 0``); its boundary
    consists of the meridians ``phi = 0`` and ``phi = pi``.
    """

    profile: DelaunayProfile
    axis: Tuple[float, float, float] = (1.0, 0.0, 0.0)
    origin: Tuple[float, float, float] = (0.0, 0.0, 0.0)
    phase: float = 0.0
    end_labels: Tuple[str, str] = ("E1", "E2")

    @property
    def necksize(self) -> float:
        return self.profile.necksize

    @property
    def is_cylinder(self) -> bool:
        return self.profile.is_cylinder

    @property
    def a(self) -> np.ndarray:
        return np.asarray(self.axis, dtype=float)

    @property
    def b(self) -> np.ndarray:
        return np.cross([0.0, 0.0, 1.0], self.a)

    def chart(self) -> UnduloidChart:
        origin = np.asarray(self.origin, dtype=float) + self.phase * self.a
        return UnduloidChart(self.profile, self.axis, origin)

    def patch(self, m: int = 32, nt: Optional[int] = None) -> Patch:
        """Grid patch over all sampled periods and ``phi in [-pi/2, 3 pi/2]``.

        ``m`` cells span each half turn in ``phi`` (so ``phi = 0`` and
        ``phi = pi`` are grid lines) and, unless ``nt`` is given, ``2 m``
        cells span each period in ``t`` (so the necks are grid lines).
        """
        P = self.profile.periods
        nt = 2 * m * P if nt is None else int(nt)
        if nt % P:
            raise InvalidInput("t cells must be a multiple of the number of periods")
        grid = GridSpec.cells((0.0, P * self.profile.period_t), (-0.5 * math.pi, 1.5 * math.pi),
                              nt, 2 * m, period=(None, 2 * math.pi))
        return build_patch(self.chart(), grid)

    def to_json(self, truncation: Optional[Sequence[int]] = None) -> dict:
        return {
            "necksize": self.necksize,
            "axis": list(map(float, self.axis)),
            "origin": list(map(float, self.origin)),
            "phase": float(self.phase),
            "periods": self.profile.periods,
            "truncation": list(truncation) if truncation is not None else [0, self.profile.periods],
            "end_labels": list(self.end_labels),
        }


def unduloid_patch(prof: DelaunayProfile, phi_range=(-0.5 * math.pi, 1.5 * math.pi),
                   n: Tuple[int, int] = (64, 64), t_range=None) -> Patch:
    """Rotational curvature-coordinate patch of ``prof`` on a ``(t, phi)`` grid with ``n`` cells."""
    t_range = (0.0, prof.periods * prof.period_t) if t_range is None else t_range
    grid = GridSpec.cells(t_range, phi_range, n[0], n[1], period=(None, 2 * math.pi))
    return build_patch(UnduloidChart(prof), grid)


# ---------------------------------------------------------------------------
# curves on the configuration patch

def _neck_index(p: Patch, cfg: UnduloidConfig, k: int) -> int:
    if not 0 <= k <= cfg.profile.periods:
        raise InvalidPath(f"neck index {k} outside the sampled periods 0..{cfg.profile.periods}")
    t = cfg.profile.neck_t[k]
    i = p.grid.index_of(x=t)
    if abs(p.grid.xs[i] - t) > 1e-9 * max(1.0, t):
        raise InvalidPath("necks are not grid lines of this patch")
    return i


def symmetry_curves(cfg: UnduloidConfig, p: Patch, truncation=(0, 1)):
    """``[gamma_1, gamma_2]`` between the necks ``truncation = (k0, k1)``.

    ``gamma_1`` is the meridian ``phi = 0`` run towards decreasing ``t``;
    ``gamma_2`` is ``phi = pi`` run towards increasing ``t``.  Along both the
    conormal is ``-e3``.
    """
    k0, k1 = truncation
    if k1 <= k0:
        raise InvalidPath("truncation must list two increasing neck indices")
    i0, i1 = _neck_index(p, cfg, k0), _neck_index(p, cfg, k1)
    j0, jpi = p.grid.index_of(y=0.0), p.grid.index_of(y=math.pi)
    g1 = node_path(p, line_nodes((i1, j0), (i0, j0)), label="gamma1")
    g2 = node_path(p, line_nodes((i0, jpi), (i1, jpi)), label="gamma2")
    return [g1, g2]


def neck_circle(cfg: UnduloidConfig, p: Patch, index: int = 0, half: bool = False) -> PathOnPatch:
    """Parallel circle at neck ``index``.

    The half circle runs from ``gamma_1`` (``phi = 0``) through ``Sigma+`` to
    ``gamma_2``; the full circle covers one turn of ``phi`` and is closed.
    """
    i = _neck_index(p, cfg, index)
    j0, jpi = p.grid.index_of(y=0.0), p.grid.index_of(y=math.pi)
    if half:
        return node_path(p, line_nodes((i, j0), (i, jpi)), label=f"c{index}/2")
    return node_path(p, line_nodes((i, 0), (i, p.grid.ny - 1)), closed=True, label=f"c{index}")


def neck_geodesic_curvature(cfg: UnduloidConfig, index: int = 0) -> float:
    """Geodesic curvature ``|sin(theta)| / r`` of the parallel through a neck."""
    _, _, r, th = cfg.profile.state(np.array([cfg.profile.neck_t[index]]))
    return float(abs(math.sin(th[0])) / r[0])


@dataclass(frozen=True)
class BoundaryCurvatureReport:
    k1_max: float
    k2_min: float
    margin_k1: float
    margin_k2: float
    k1_necks: np.ndarray
    k2_necks: np.ndarray
    k1_bulges: np.ndarray
    k2_bulges: np.ndarray
    passed: bool


def boundary_curvature_check(cfg: UnduloidConfig, samples_per_period: int = 512) -> BoundaryCurvatureReport:
    """Sample ``k1 < 1 < k2`` along the symmetry curves (meridians).

    Both symmetry curves are meridians of the same profile, so the profile is
    sampled once, densely, plus exactly at the located necks and bulges.
    """
    prof = cfg.profile
    t = np.linspace(0.0, prof.periods * prof.period_t, samples_per_period * prof.periods + 1)
    t = np.concatenate([t, prof.neck_t, prof.bulge_t])
    kx, ky = prof.curvatures(t)
    k1, k2 = np.minimum(kx, ky), np.maximum(kx, ky)
    nk1, nk2 = prof.curvatures(prof.neck_t)
    bk1, bk2 = prof.curvatures(prof.bulge_t)
    m1, m2 = float(1.0 - np.max(k1)), float(np.min(k2) - 1.0)
    return BoundaryCurvatureReport(float(np.max(k1)), float(np.min(k2)), m1, m2,
                                   nk1, nk2, bk1, bk2, bool(m1 > 0 and m2 > 0))


def write_config_json(cfg: UnduloidConfig, path, truncation=None) -> None:
    with open(path, "w") as fh:
        json.dump(cfg.to_json(truncation), fh, indent=2, sort_keys=True)
