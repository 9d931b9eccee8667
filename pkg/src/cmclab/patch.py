"""Surface patches on structured parameter grids.

A :class:`Patch` samples an immersion ``f`` on a uniform rectangular grid of
parameter nodes ``(x_i, y_j)``.  Arrays are indexed ``[i, j]`` so that axis 0
runs along ``x`` and axis 1 along ``y``; vector fields carry a trailing axis of
length 3.

Conventions (used everywhere in the package):

* conformal factor ``rho`` with ``|f_x| = |f_y| = rho``;
* inner unit normal ``nu = f_x x f_y / rho^2``;
* second fundamental form ``h_ab = <nu, f_ab>`` and principal curvatures
  ``k1 <= k2``;
* in curvature coordinates ``kx = h11 / rho^2`` and ``ky = h22 / rho^2`` are the
  curvatures of the coordinate lines and ``kappa = ky - kx``.

Scalar fields are plain ``(nx, ny)`` arrays.
"""
from __future__ import annotations

import csv
import json
from dataclasses import dataclass, field
from typing import Optional, Sequence, Tuple

import numpy as np
from scipy.integrate import cumulative_simpson
from scipy.interpolate import RectBivariateSpline
from scipy.spatial import cKDTree

from . import fd
from .charts import Chart, ChartSample, GridChart, Reparametrized
from .errors import InvalidInput, InvalidPath, SingularImmersion, UmbilicObstruction

#: relative tolerance used when measuring the conformal / curvature-line flags
FLAG_TOL = 1e-6
#: |phi| below this fraction of max |phi| counts as an umbilic
UMBILIC_FRACTION = 1e-6

PATCH_CSV_COLUMNS = [
    "i", "j", "x", "y",
    "fx1", "fx2", "fx3", "fy1", "fy2", "fy3",
    "f1", "f2", "f3", "nu1", "nu2", "nu3",
    "rho", "k1", "k2",
]


# ---------------------------------------------------------------------------
# grid

@dataclass(frozen=True)
class GridSpec:
    """Uniform grid with ``nx * ny`` nodes on ``[x0, x1] x [y0, y1]`` (endpoints included)."""

    x0: float
    x1: float
    nx: int
    y0: float
    y1: float
    ny: int
    #: parameter periods used to close paths, ``None`` when not periodic
    period: Tuple[Optional[float], Optional[float]] = (None, None)

    def __post_init__(self):
        if self.nx < 3 or self.ny < 3:
            raise InvalidInput("a grid needs at least 3 nodes per axis")
        if not (self.x1 > self.x0 and self.y1 > self.y0):
            raise InvalidInput("grid bounds must be increasing")

    @classmethod
    def cells(cls, xr, yr, n, m=None, period=(None, None)) -> "GridSpec":
        """Grid with ``n`` cells along x and ``m`` (default ``n``) along y."""
        m = n if m is None else m
        return cls(float(xr[0]), float(xr[1]), int(n) + 1, float(yr[0]), float(yr[1]), int(m) + 1,
                   tuple(period))

    @property
    def hx(self) -> float:
        return (self.x1 - self.x0) / (self.nx - 1)

    @property
    def hy(self) -> float:
        return (self.y1 - self.y0) / (self.ny - 1)

    @property
    def xs(self) -> np.ndarray:
        return np.linspace(self.x0, self.x1, self.nx)

    @property
    def ys(self) -> np.ndarray:
        return np.linspace(self.y0, self.y1, self.ny)

    def mesh(self):
        return np.meshgrid(self.xs, self.ys, indexing="ij")

    def node(self, i: int, j: int) -> np.ndarray:
        return np.array([self.xs[i], self.ys[j]])

    def index_of(self, x=None, y=None) -> int:
        """Index of the node closest to the given x (or y) coordinate."""
        if (x is None) == (y is None):
            raise ValueError("give exactly one of x, y")
        if x is not None:
            return int(round((x - self.x0) / self.hx))
        return int(round((y - self.y0) / self.hy))

    def as_dict(self) -> dict:
        return {"x0": self.x0, "x1": self.x1, "nx": self.nx,
                "y0": self.y0, "y1": self.y1, "ny": self.ny,
                "period": list(self.period)}


# ---------------------------------------------------------------------------
# patch

def _freeze(a: np.ndarray) -> np.ndarray:
    a = np.ascontiguousarray(a)
    a.setflags(write=False)
    return a


def _dot(a, b):
    return np.sum(a * b, axis=-1)


@dataclass(frozen=True)
class Patch:
    grid: GridSpec
    f: np.ndarray
    fx: np.ndarray
    fy: np.ndarray
    fxx: np.ndarray
    fxy: np.ndarray
    fyy: np.ndarray
    nu: np.ndarray
    rho: np.ndarray
    k1: np.ndarray
    k2: np.ndarray
    h11: np.ndarray
    h12: np.ndarray
    h22: np.ndarray
    is_conformal: bool
    is_curvature_coords: bool
    chart: Optional[Chart] = field(default=None, compare=False, repr=False)
    chart_id: str = "samples"

    # -- derived quantities -------------------------------------------------
    @property
    def shape(self):
        return (self.grid.nx, self.grid.ny)

    @property
    def kx(self) -> np.ndarray:
        """Curvature of the x coordinate lines, ``h11 / rho^2``."""
        return self.h11 / self.rho ** 2

    @property
    def ky(self) -> np.ndarray:
        return self.h22 / self.rho ** 2

    @property
    def kappa(self) -> np.ndarray:
        return self.ky - self.kx

    @property
    def H(self) -> np.ndarray:
        return 0.5 * (self.k1 + self.k2)

    @property
    def A2(self) -> np.ndarray:
        """Squared norm of the shape operator, ``k1^2 + k2^2``."""
        return self.k1 ** 2 + self.k2 ** 2

    def sample(self, x, y) -> ChartSample:
        if self.chart is None:
            raise InvalidInput("patch has no chart to evaluate off-grid")
        return self.chart.evaluate(x, y)

    def normal_component(self, e) -> np.ndarray:
        """Scalar field ``<nu, e>``; a Jacobi field for any fixed vector ``e``."""
        return _dot(self.nu, np.asarray(e, dtype=float))

    def describe(self) -> dict:
        return {
            "chart_id": self.chart_id,
            "grid": self.grid.as_dict(),
            "hx": self.grid.hx,
            "hy": self.grid.hy,
            "is_conformal": self.is_conformal,
            "is_curvature_coords": self.is_curvature_coords,
        }


def build_patch(chart, grid: GridSpec) -> Patch:
    """Sample ``chart`` on ``grid``.

    ``chart`` is either a :class:`~cmclab.charts.Chart` (exact derivatives) or
    a plain callable ``f(x, y) -> (..., 3)``; in the latter case derivatives
    are fourth-order finite differences on the grid.  The conformal and
    curvature-line flags are measured from the data.
    """
    X, Y = grid.mesh()
    if isinstance(chart, Chart):
        s = chart.evaluate(X, Y)
        f, fx, fy, fxx, fxy, fyy = s.f, s.fx, s.fy, s.fxx, s.fxy, s.fyy
        chart_obj, chart_id = chart, chart.chart_id
        if grid.period == (None, None) and chart.period != (None, None):
            grid = GridSpec(grid.x0, grid.x1, grid.nx, grid.y0, grid.y1, grid.ny, chart.period)
    elif callable(chart):
        f = np.asarray(chart(X, Y), dtype=float)
        hx, hy = grid.hx, grid.hy
        fx = fd.d1(f, hx, 0, order=4)
        fy = fd.d1(f, hy, 1, order=4)
        fxx = fd.d1(fx, hx, 0, order=4)
        fxy = fd.d1(fx, hy, 1, order=4)
        fyy = fd.d1(fy, hy, 1, order=4)
        chart_obj, chart_id = GridChart(grid.xs, grid.ys, f), getattr(chart, "__name__", "callable")
    else:
        raise InvalidInput("chart must be a Chart or a callable")
    return _assemble(grid, f, fx, fy, fxx, fxy, fyy, chart_obj, chart_id)


def _assemble(grid, f, fx, fy, fxx, fxy, fyy, chart, chart_id) -> Patch:
    g11, g12, g22 = _dot(fx, fx), _dot(fx, fy), _dot(fy, fy)
    n = np.cross(fx, fy)
    area = np.linalg.norm(n, axis=-1)
    scale = max(float(np.max(g11 + g22)), np.finfo(float).tiny)
    if not np.all(np.isfinite(area)) or np.min(area) <= 1e-14 * scale:
        raise SingularImmersion("chart is singular (f_x x f_y vanishes) on the grid")
    nu = n / area[..., None]
    h11, h12, h22 = _dot(nu, fxx), _dot(nu, fxy), _dot(nu, fyy)
    rho = np.sqrt(0.5 * (g11 + g22))
    det = g11 * g22 - g12 ** 2
    Hm = (h11 * g22 - 2 * h12 * g12 + h22 * g11) / (2 * det)
    K = (h11 * h22 - h12 ** 2) / det
    disc = np.sqrt(np.maximum(Hm ** 2 - K, 0.0))
    k1, k2 = Hm - disc, Hm + disc

    conf = max(np.max(np.abs(g11 - g22)), np.max(np.abs(g12))) / np.max(g11)
    is_conformal = bool(conf < FLAG_TOL)
    hscale = max(np.max(np.abs(h11)), np.max(np.abs(h22)), 1e-300)
    is_curv = bool(is_conformal and np.max(np.abs(h12)) < FLAG_TOL * max(hscale, 1.0))
    fields = [_freeze(np.asarray(a, dtype=float)) for a in
              (f, fx, fy, fxx, fxy, fyy, nu, rho, k1, k2, h11, h12, h22)]
    return Patch(grid, *fields, is_conformal=is_conformal, is_curvature_coords=is_curv,
                 chart=chart, chart_id=chart_id)


def _require_conformal(p: Patch):
    if not p.is_conformal:
        raise InvalidInput("operation needs a conformal patch")


def _require_curvature(p: Patch):
    if not p.is_curvature_coords:
        raise InvalidInput("operation needs conformal curvature coordinates")


# ---------------------------------------------------------------------------
# residuals and operators

def mean_curvature_residual(p: Patch) -> np.ndarray:
    """``|Delta_0 f - 2 rho^2 nu|`` per node; NaN on the boundary ring.

    Vanishes (at second order in the grid spacing) exactly when ``H = 1``.
    """
    _require_conformal(p)
    lap = fd.laplacian5(p.f, p.grid.hx, p.grid.hy)
    return np.linalg.norm(lap - 2 * p.rho[..., None] ** 2 * p.nu, axis=-1)


def gauss_formula_residual(p: Patch, method: str = "chart") -> np.ndarray:
    """Defect of the frame formulas for ``f_xx`` and ``f_yy`` in curvature coordinates.

    ``method="chart"`` uses the stored second derivatives and finite
    differences of ``rho``; ``method="fd"`` differences the stored first
    derivatives instead (second order; edges one-sided).
    """
    _require_curvature(p)
    hx, hy = p.grid.hx, p.grid.hy
    rho = p.rho
    if method == "chart":
        fxx, fyy = p.fxx, p.fyy
        # rho_x = <f_xx, f_x> / rho exactly, likewise for y
        rx = _dot(p.fxx, p.fx) / rho
        ry = _dot(p.fyy, p.fy) / rho
    elif method == "fd":
        fxx = fd.d1(p.fx, hx, 0)
        fyy = fd.d1(p.fy, hy, 1)
        rx = fd.d1(rho, hx, 0)
        ry = fd.d1(rho, hy, 1)
    else:
        raise ValueError("method must be 'chart' or 'fd'")
    a = (rx / rho)[..., None]
    b = (ry / rho)[..., None]
    r2 = (rho ** 2)[..., None]
    ex = fxx - (a * p.fx - b * p.fy + p.kx[..., None] * r2 * p.nu)
    ey = fyy - (-a * p.fx + b * p.fy + p.ky[..., None] * r2 * p.nu)
    return np.linalg.norm(ex, axis=-1) + np.linalg.norm(ey, axis=-1)


J0 = np.array([[0.0, -1.0], [1.0, 0.0]])


def j1_operator(p: Patch, u) -> np.ndarray:
    """First-order change ``[[0, u kappa], [u kappa, 0]]`` of the complex structure under ``f + t u nu``."""
    _require_curvature(p)
    uk = np.asarray(u, dtype=float) * p.kappa
    out = np.zeros(uk.shape + (2, 2))
    out[..., 0, 1] = uk
    out[..., 1, 0] = uk
    return out


def hopf_function(p: Patch) -> np.ndarray:
    """``phi = (h11 - h22)/2 + i h12`` per node (transforms like ``phi dw^2`` conjugated)."""
    _require_conformal(p)
    return 0.5 * (p.h11 - p.h22) + 1j * p.h12


def hopf_cr_residual(p: Patch) -> np.ndarray:
    """``|d/dw-bar conj(phi)|`` by central differences; interior nodes, NaN elsewhere.

    ``conj(phi)`` is the holomorphic representative; it is holomorphic iff H is
    constant, so the residual is O(h^2) on CMC patches.
    """
    q = np.conj(hopf_function(p))
    hx, hy = p.grid.hx, p.grid.hy
    out = np.full(q.shape, np.nan)
    qx = (q[2:, 1:-1] - q[:-2, 1:-1]) / (2 * hx)
    qy = (q[1:-1, 2:] - q[1:-1, :-2]) / (2 * hy)
    out[1:-1, 1:-1] = np.abs(0.5 * (qx + 1j * qy))
    return out


def jacobi_residual(p: Patch, u) -> np.ndarray:
    """``Delta_0 u + rho^2 (k1^2 + k2^2) u`` by the 5-point stencil; NaN on the boundary ring."""
    _require_conformal(p)
    u = np.asarray(u, dtype=float)
    if u.shape != p.shape:
        raise InvalidInput(f"scalar field shape {u.shape} does not match grid {p.shape}")
    return fd.laplacian5(u, p.grid.hx, p.grid.hy) + p.rho ** 2 * p.A2 * u


def jacobi_relative_residual(p: Patch, u, margin: int = 1) -> float:
    """``max |L u| / max |rho^2 |A|^2 u|`` over nodes at least ``margin`` from the edge."""
    res = jacobi_residual(p, u)
    sl = (slice(margin, -margin or None),) * 2
    num = float(np.nanmax(np.abs(res[sl])))
    den = float(np.max(np.abs(p.rho ** 2 * p.A2 * np.asarray(u))[sl]))
    if den == 0.0:
        return 0.0 if num == 0.0 else np.inf
    return num / den


def shape_operators(p: Patch):
    """``(A, B, C)`` per node as ``(nx, ny, 2, 2)`` arrays with ``A = B + C``, ``C = H I``."""
    _require_curvature(p)
    A = np.zeros(p.shape + (2, 2))
    A[..., 0, 0] = p.kx
    A[..., 1, 1] = p.ky
    H = 0.5 * (p.kx + p.ky)
    C = H[..., None, None] * np.eye(2)
    return A, A - C, C


def frobenius2(m: np.ndarray) -> np.ndarray:
    return np.sum(m * m, axis=(-2, -1))


# ---------------------------------------------------------------------------
# conversion to curvature coordinates

@dataclass(frozen=True)
class CurvatureCoordinates:
    """Result of :func:`to_curvature_coords`: the new patch and the parameter map."""

    patch: Patch
    #: ``w(z)`` evaluator (complex in, complex out) mapping new to old parameters
    inverse_map: object = field(repr=False)
    #: ``kappa rho^2`` constant of the new coordinates (2 by construction)
    constant: float = 2.0


def _continuous_sqrt(q: np.ndarray) -> np.ndarray:
    """Square root of a non-vanishing complex grid field, continued along row 0 then columns."""
    s = np.sqrt(q)
    nx, ny = q.shape
    for i in range(1, nx):
        if abs(s[i, 0] - s[i - 1, 0]) > abs(s[i, 0] + s[i - 1, 0]):
            s[i, 0] = -s[i, 0]
    for j in range(1, ny):
        flip = np.abs(s[:, j] - s[:, j - 1]) > np.abs(s[:, j] + s[:, j - 1])
        s[flip, j] = -s[flip, j]
    return s


def _integrate_rows_columns(dzdx: np.ndarray, dzdy: np.ndarray, hx, hy) -> np.ndarray:
    """Integrate an exact differential along row 0 then each column (composite Simpson)."""
    def cs(a, h, axis):
        return (cumulative_simpson(a.real, dx=h, axis=axis, initial=0.0)
                + 1j * cumulative_simpson(a.imag, dx=h, axis=axis, initial=0.0))

    row = cs(dzdx[:, 0], hx, 0)
    return row[:, None] + cs(dzdy, hy, 1)


class _SplineMap:
    """Inverse of the developing map ``z(w)`` via Newton on bicubic splines."""

    def __init__(self, grid: GridSpec, z: np.ndarray, s: np.ndarray):
        xs, ys = grid.xs, grid.ys
        self.grid = grid
        self._zr = RectBivariateSpline(xs, ys, z.real, s=0)
        self._zi = RectBivariateSpline(xs, ys, z.imag, s=0)
        self._sr = RectBivariateSpline(xs, ys, s.real, s=0)
        self._si = RectBivariateSpline(xs, ys, s.imag, s=0)
        X, Y = grid.mesh()
        self._nodes = (X + 1j * Y).ravel()
        self._tree = cKDTree(np.column_stack([z.real.ravel(), z.imag.ravel()]))

    def z(self, w):
        return self._zr.ev(w.real, w.imag) + 1j * self._zi.ev(w.real, w.imag)

    def s(self, w):
        return self._sr.ev(w.real, w.imag) + 1j * self._si.ev(w.real, w.imag)

    def ds(self, w):
        # s is holomorphic in w, so ds/dw = ds/dx
        return self._sr.ev(w.real, w.imag, dx=1) + 1j * self._si.ev(w.real, w.imag, dx=1)

    def inside(self, w, margin=0.0):
        g = self.grid
        return ((w.real >= g.x0 - margin) & (w.real <= g.x1 + margin)
                & (w.imag >= g.y0 - margin) & (w.imag <= g.y1 + margin))

    def invert(self, zt, iters=30, tol=1e-13):
        zt = np.asarray(zt, dtype=complex)
        flat = zt.ravel()
        _, idx = self._tree.query(np.column_stack([flat.real, flat.imag]))
        w = self._nodes[idx].copy()
        ok = np.zeros(flat.shape, dtype=bool)
        for _ in range(iters):
            r = self.z(w) - flat
            step = r / (1j * self.s(w))
            w = w - step
            ok = np.abs(step) < tol * (1 + np.abs(w))
            if np.all(ok):
                break
        return w.reshape(zt.shape), ok.reshape(zt.shape)


def to_curvature_coords(p: Patch, n=None) -> CurvatureCoordinates:
    """Change to conformal curvature coordinates with ``kappa rho^2 = 2``.

    The new coordinate is ``z = int i sqrt(conj(phi)) dw``.  The output grid
    is the largest rectangle (centred at the image of the grid centre, with
    the aspect ratio of the image) whose preimage stays inside the input grid;
    ``n = (nx, ny)`` defaults to the input node counts.
    """
    _require_conformal(p)
    if p.chart is None:
        raise InvalidInput("to_curvature_coords needs a chart to resample the immersion")
    q = np.conj(hopf_function(p))
    amax = float(np.max(np.abs(q)))
    if amax == 0.0 or float(np.min(np.abs(q))) < UMBILIC_FRACTION * amax:
        raise UmbilicObstruction("patch contains (near-)umbilic points; no curvature coordinates")
    s = _continuous_sqrt(q)
    g = p.grid
    dz = 1j * s
    # dz = i sqrt(q) dw, so dz/dx = i s and dz/dy = i * i s
    z = _integrate_rows_columns(dz, 1j * dz, g.hx, g.hy)
    smap = _SplineMap(g, z, s)

    ic, jc = (g.nx - 1) // 2, (g.ny - 1) // 2
    zc = z[ic, jc]
    # aspect from the image of the two centre lines
    ax = float(np.ptp(z[:, jc].real)) or float(np.ptp(z.real))
    ay = float(np.ptp(z[ic, :].imag)) or float(np.ptp(z.imag))
    nx, ny = (g.nx, g.ny) if n is None else n
    tx = np.linspace(-0.5, 0.5, 41)

    def boundary(scale):
        e = np.concatenate([tx * ax + 1j * (-0.5) * ay, 0.5 * ax + 1j * tx * ay,
                            tx[::-1] * ax + 0.5j * ay, -0.5 * ax + 1j * tx[::-1] * ay])
        return zc + scale * e

    def feasible(scale):
        w, ok = smap.invert(boundary(scale))
        return bool(np.all(ok) and np.all(smap.inside(w, margin=-1e-12)))

    lo, hi = 0.0, 1.0
    if feasible(hi):
        lo = hi
    else:
        for _ in range(40):
            mid = 0.5 * (lo + hi)
            if feasible(mid):
                lo = mid
            else:
                hi = mid
    scale = 0.98 * lo
    if scale <= 0.0:
        raise InvalidInput("could not fit a curvature-coordinate rectangle in the patch")

    def W(zz):
        w, ok = smap.invert(zz)
        if not np.all(ok):
            raise InvalidInput("curvature-coordinate inverse failed to converge")
        return w

    def dW(zz):
        return 1.0 / (1j * smap.s(W(zz)))

    def ddW(zz):
        w = W(zz)
        sw = smap.s(w)
        d1 = 1.0 / (1j * sw)
        return 1j * smap.ds(w) * d1 / sw ** 2

    chart = Reparametrized(p.chart, W, dW, ddW, chart_id=f"{p.chart_id}+curvature")
    half_x, half_y = 0.5 * scale * ax, 0.5 * scale * ay
    new_grid = GridSpec(zc.real - half_x, zc.real + half_x, nx, zc.imag - half_y, zc.imag + half_y, ny)
    return CurvatureCoordinates(build_patch(chart, new_grid), W, 2.0)


# ---------------------------------------------------------------------------
# paths

_GL_X, _GL_W = np.polynomial.legendre.leggauss(4)


@dataclass(frozen=True)
class PathOnPatch:
    """Polygonal path in parameter space (straight segments between vertices)."""

    points: np.ndarray
    arclength: np.ndarray
    closed: bool = False
    label: str = ""

    @property
    def length(self) -> float:
        return float(self.arclength[-1])

    def __len__(self):
        return len(self.points)


def _segment_lengths(p: Patch, pts: np.ndarray) -> np.ndarray:
    a, b = pts[:-1], pts[1:]
    d = b - a
    tau = 0.5 * (_GL_X + 1.0)
    q = a[:, None, :] + tau[None, :, None] * d[:, None, :]
    if p.chart is not None:
        rho = np.linalg.norm(p.chart.evaluate(q[..., 0], q[..., 1]).fx, axis=-1)
    else:
        spl = RectBivariateSpline(p.grid.xs, p.grid.ys, p.rho, s=0)
        rho = spl.ev(q[..., 0], q[..., 1])
    return 0.5 * np.linalg.norm(d, axis=-1) * (rho @ _GL_W)


def make_path(p: Patch, points, closed: bool = False, label: str = "") -> PathOnPatch:
    """Validate a parameter polygon against the patch and compute its arclength.

    A closed path must end where it starts, possibly shifted by whole
    parameter periods of the grid.
    """
    pts = np.asarray(points, dtype=float)
    if pts.ndim != 2 or pts.shape[1] != 2 or len(pts) < 2:
        raise InvalidPath("a path needs at least two 2-d parameter points")
    g = p.grid
    eps = 1e-9 * max(g.x1 - g.x0, g.y1 - g.y0)
    inside = ((pts[:, 0] >= g.x0 - eps) & (pts[:, 0] <= g.x1 + eps)
              & (pts[:, 1] >= g.y0 - eps) & (pts[:, 1] <= g.y1 + eps))
    if not np.all(inside):
        raise InvalidPath("path leaves the grid domain")
    seg = _segment_lengths(p, pts)
    if np.any(seg <= 0):
        raise InvalidPath("path has repeated vertices")
    if closed:
        gap = pts[-1] - pts[0]
        for k in range(2):
            per = g.period[k]
            if per:
                gap[k] -= per * np.round(gap[k] / per)
        if np.max(np.abs(gap)) > eps:
            raise InvalidPath("closed path does not return to its start")
    arc = np.concatenate([[0.0], np.cumsum(seg)])
    return PathOnPatch(_freeze(pts), _freeze(arc), bool(closed), label)


def node_path(p: Patch, nodes: Sequence[Tuple[int, int]], closed=False, label="") -> PathOnPatch:
    """Path through grid nodes given as ``(i, j)`` index pairs."""
    xs, ys = p.grid.xs, p.grid.ys
    pts = [(xs[i], ys[j]) for i, j in nodes]
    return make_path(p, pts, closed=closed, label=label)


def line_nodes(start: Tuple[int, int], stop: Tuple[int, int]):
    """Grid nodes on the axis-parallel segment from ``start`` to ``stop`` (inclusive)."""
    (i0, j0), (i1, j1) = start, stop
    if i0 != i1 and j0 != j1:
        raise InvalidPath("line_nodes needs an axis-parallel segment")
    if i0 == i1:
        step = 1 if j1 >= j0 else -1
        return [(i0, j) for j in range(j0, j1 + step, step)]
    step = 1 if i1 >= i0 else -1
    return [(i, j0) for i in range(i0, i1 + step, step)]


def polyline_nodes(corners: Sequence[Tuple[int, int]]):
    """Concatenate axis-parallel node segments through the given corners."""
    out = [tuple(corners[0])]
    for a, b in zip(corners[:-1], corners[1:]):
        out.extend(line_nodes(a, b)[1:])
    return out


def rectangle_loop(p: Patch, i0, i1, j0, j1, label="rectangle") -> PathOnPatch:
    """Counterclockwise grid loop around the node rectangle ``[i0, i1] x [j0, j1]``."""
    nodes = polyline_nodes([(i0, j0), (i1, j0), (i1, j1), (i0, j1), (i0, j0)])
    return node_path(p, nodes, closed=True, label=label)


# ---------------------------------------------------------------------------
# serialization

def write_patch(p: Patch, csv_path, json_path=None) -> None:
    """Write one CSV row per node (columns :data:`PATCH_CSV_COLUMNS`) and a JSON sidecar."""
    X, Y = p.grid.mesh()
    with open(csv_path, "w", newline="") as fh:
        w = csv.writer(fh)
        w.writerow(PATCH_CSV_COLUMNS)
        for i in range(p.grid.nx):
            for j in range(p.grid.ny):
                vals = np.concatenate([[X[i, j], Y[i, j]], p.fx[i, j], p.fy[i, j], p.f[i, j], p.nu[i, j],
                                       [p.rho[i, j], p.k1[i, j], p.k2[i, j]]])
                w.writerow([i, j] + [repr(float(v)) for v in vals])
    if json_path is not None:
        with open(json_path, "w") as fh:
            json.dump(p.describe(), fh, indent=2, sort_keys=True)


def read_patch(csv_path, json_path) -> Patch:
    """Rebuild a patch from disk; positions are splined (numeric provenance)."""
    with open(json_path) as fh:
        meta = json.load(fh)
    gd = meta["grid"]
    grid = GridSpec(gd["x0"], gd["x1"], gd["nx"], gd["y0"], gd["y1"], gd["ny"],
                    tuple(gd.get("period", (None, None))))
    data = np.loadtxt(csv_path, delimiter=",", skiprows=1)
    if data.shape[1] != len(PATCH_CSV_COLUMNS):
        raise InvalidInput("unexpected patch CSV layout")
    f = np.zeros((grid.nx, grid.ny, 3))
    ii, jj = data[:, 0].astype(int), data[:, 1].astype(int)
    f[ii, jj] = data[:, 10:13]
    return build_patch(GridChart(grid.xs, grid.ys, f), grid)
