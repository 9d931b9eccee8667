"""Analytic surface charts.

A chart maps parameter points ``(x, y)`` to R^3 and supplies exact first and
second derivatives.  Charts broadcast: ``chart.evaluate(x, y)`` accepts arrays
of any (common) shape and returns a :class:`ChartSample` whose fields carry a
trailing axis of length 3.

All the model charts below are conformal; most are also curvature charts with
the x-lines carrying the smaller principal curvature.
"""
from __future__ import annotations

from dataclasses import dataclass
from typing import Callable, Optional, Tuple

import numpy as np


@dataclass(frozen=True)
class ChartSample:
    f: np.ndarray
    fx: np.ndarray
    fy: np.ndarray
    fxx: np.ndarray
    fxy: np.ndarray
    fyy: np.ndarray

    @property
    def normal(self) -> np.ndarray:
        n = np.cross(self.fx, self.fy)
        return n / np.linalg.norm(n, axis=-1, keepdims=True)

    def normal_derivatives(self) -> Tuple[np.ndarray, np.ndarray]:
        """``(nu_x, nu_y)`` of the unit normal ``fx x fy / |fx x fy|``."""
        n = np.cross(self.fx, self.fy)
        ln = np.linalg.norm(n, axis=-1, keepdims=True)
        nu = n / ln
        nx = np.cross(self.fxx, self.fy) + np.cross(self.fx, self.fxy)
        ny = np.cross(self.fxy, self.fy) + np.cross(self.fx, self.fyy)
        nux = (nx - nu * np.sum(nu * nx, axis=-1, keepdims=True)) / ln
        nuy = (ny - nu * np.sum(nu * ny, axis=-1, keepdims=True)) / ln
        return nux, nuy


def _vec(*components) -> np.ndarray:
    comps = np.broadcast_arrays(*[np.asarray(c, dtype=float) for c in components])
    return np.stack(comps, axis=-1)


class Chart:
    """Base class.  Subclasses implement :meth:`evaluate`."""

    chart_id = "chart"
    #: parameter periods (None when the axis is not periodic)
    period: Tuple[Optional[float], Optional[float]] = (None, None)
    #: closed parameter box where the chart is defined, or None for all of R^2
    domain: Optional[Tuple[float, float, float, float]] = None

    def evaluate(self, x, y) -> ChartSample:  # pragma: no cover - abstract
        raise NotImplementedError

    def __call__(self, x, y) -> np.ndarray:
        return self.evaluate(x, y).f

    def describe(self) -> dict:
        return {"chart_id": self.chart_id}


class PlaneChart(Chart):
    chart_id = "plane"

    def evaluate(self, x, y):
        x, y = np.broadcast_arrays(np.asarray(x, float), np.asarray(y, float))
        z = np.zeros_like(x)
        o = np.ones_like(x)
        zero3 = _vec(z, z, z)
        return ChartSample(_vec(x, y, z), _vec(o, z, z), _vec(z, o, z), zero3, zero3, zero3)


class CylinderChart(Chart):
    """``(x, cos(2y)/2, sin(2y)/2)``: radius 1/2, conformal factor 1, H = 1."""

    chart_id = "cylinder"
    period = (None, np.pi)

    def evaluate(self, x, y):
        x, y = np.broadcast_arrays(np.asarray(x, float), np.asarray(y, float))
        c, s = np.cos(2 * y), np.sin(2 * y)
        z = np.zeros_like(x)
        o = np.ones_like(x)
        return ChartSample(
            _vec(x, c / 2, s / 2),
            _vec(o, z, z),
            _vec(z, -s, c),
            _vec(z, z, z),
            _vec(z, z, z),
            _vec(z, -2 * c, -2 * s),
        )


class SphereChart(Chart):
    """Mercator chart ``R (cos y sech x, sin y sech x, tanh x)``; H = 1/R."""

    period = (None, 2 * np.pi)

    def __init__(self, radius: float = 1.0):
        self.radius = float(radius)
        self.chart_id = "sphere" if self.radius == 1.0 else f"sphere{self.radius:g}"

    def evaluate(self, x, y):
        x, y = np.broadcast_arrays(np.asarray(x, float), np.asarray(y, float))
        R = self.radius
        sh, th = 1.0 / np.cosh(x), np.tanh(x)
        c, s = np.cos(y), np.sin(y)
        z = np.zeros_like(x)
        # d/dx sech = -sech tanh ; d/dx tanh = sech^2
        dsh = -sh * th
        ddsh = sh * th ** 2 - sh ** 3
        return ChartSample(
            R * _vec(c * sh, s * sh, th),
            R * _vec(c * dsh, s * dsh, sh ** 2),
            R * _vec(-s * sh, c * sh, z),
            R * _vec(c * ddsh, s * ddsh, -2 * sh ** 2 * th),
            R * _vec(-s * dsh, c * dsh, z),
            R * _vec(-c * sh, -s * sh, z),
        )

    def describe(self):
        return {"chart_id": self.chart_id, "radius": self.radius}


class CatenoidChart(Chart):
    """``(cosh x cos y, cosh x sin y, x)``: minimal, conformal factor cosh x."""

    chart_id = "catenoid"
    period = (None, 2 * np.pi)

    def evaluate(self, x, y):
        x, y = np.broadcast_arrays(np.asarray(x, float), np.asarray(y, float))
        ch, sh = np.cosh(x), np.sinh(x)
        c, s = np.cos(y), np.sin(y)
        z = np.zeros_like(x)
        o = np.ones_like(x)
        return ChartSample(
            _vec(ch * c, ch * s, x),
            _vec(sh * c, sh * s, o),
            _vec(-ch * s, ch * c, z),
            _vec(ch * c, ch * s, z),
            _vec(-sh * s, sh * c, z),
            _vec(-ch * c, -ch * s, z),
        )


class RigidMotion(Chart):
    """``Q f + b`` for a rotation ``Q``."""

    def __init__(self, base: Chart, rotation, translation=(0.0, 0.0, 0.0)):
        self.base = base
        self.rotation = np.asarray(rotation, dtype=float)
        self.translation = np.asarray(translation, dtype=float)
        self.chart_id = f"{base.chart_id}+rigid"
        self.period = base.period
        self.domain = base.domain

    def evaluate(self, x, y):
        s = self.base.evaluate(x, y)
        Q = self.rotation
        return ChartSample(
            s.f @ Q.T + self.translation,
            s.fx @ Q.T, s.fy @ Q.T, s.fxx @ Q.T, s.fxy @ Q.T, s.fyy @ Q.T,
        )


class Reparametrized(Chart):
    """``f(W(z))`` for a holomorphic change of parameter ``w = W(z)``.

    ``W``, ``dW`` and ``ddW`` take and return complex arrays.  Holomorphic maps
    keep the chart conformal, which is what every use here needs.
    """

    def __init__(self, base: Chart, W: Callable, dW: Callable, ddW: Callable,
                 chart_id: Optional[str] = None, domain=None):
        self.base = base
        self.W, self.dW, self.ddW = W, dW, ddW
        self.chart_id = chart_id or f"{base.chart_id}+conformal"
        self.domain = domain

    def evaluate(self, x, y):
        z = np.asarray(x, float) + 1j * np.asarray(y, float)
        w, dw, ddw = self.W(z), self.dW(z), self.ddW(z)
        s = self.base.evaluate(w.real, w.imag)
        # partials of (X, Y) = (Re W, Im W) with respect to (a, b), z = a + ib
        Xa, Ya = dw.real[..., None], dw.imag[..., None]
        Xb, Yb = -dw.imag[..., None], dw.real[..., None]
        Xaa, Yaa = ddw.real[..., None], ddw.imag[..., None]
        Xab, Yab = -ddw.imag[..., None], ddw.real[..., None]
        Xbb, Ybb = -ddw.real[..., None], -ddw.imag[..., None]
        fa = s.fx * Xa + s.fy * Ya
        fb = s.fx * Xb + s.fy * Yb
        faa = s.fxx * Xa * Xa + 2 * s.fxy * Xa * Ya + s.fyy * Ya * Ya + s.fx * Xaa + s.fy * Yaa
        fab = (s.fxx * Xa * Xb + s.fxy * (Xa * Yb + Xb * Ya) + s.fyy * Ya * Yb
               + s.fx * Xab + s.fy * Yab)
        fbb = s.fxx * Xb * Xb + 2 * s.fxy * Xb * Yb + s.fyy * Yb * Yb + s.fx * Xbb + s.fy * Ybb
        return ChartSample(s.f, fa, fb, faa, fab, fbb)


def rotated(base: Chart, angle: float) -> Reparametrized:
    """``base`` precomposed with ``w = e^{i angle} z`` (a rotation of the parameter plane)."""
    e = np.exp(1j * angle)
    return Reparametrized(
        base,
        lambda z: e * z,
        lambda z: e * np.ones_like(z),
        lambda z: np.zeros_like(z),
        chart_id=f"{base.chart_id}+rot{np.degrees(angle):g}",
    )


def exponential(base: Chart) -> Reparametrized:
    """``base`` precomposed with ``w = exp(z)``; gives a non-constant Hopf function."""
    return Reparametrized(base, np.exp, np.exp, np.exp, chart_id=f"{base.chart_id}+exp")


class GridChart(Chart):
    """Bicubic spline chart through sampled positions (numeric provenance).

    Used for patches read back from disk; derivatives come from the spline.
    """

    chart_id = "samples"

    def __init__(self, x, y, f):
        from scipy.interpolate import RectBivariateSpline

        self.x = np.asarray(x, float)
        self.y = np.asarray(y, float)
        f = np.asarray(f, float)
        self._splines = [RectBivariateSpline(self.x, self.y, f[..., k], kx=3, ky=3, s=0)
                         for k in range(3)]
        self.domain = (self.x[0], self.x[-1], self.y[0], self.y[-1])

    def evaluate(self, x, y):
        x, y = np.broadcast_arrays(np.asarray(x, float), np.asarray(y, float))

        def ev(dx, dy):
            return np.stack([s.ev(x, y, dx=dx, dy=dy) for s in self._splines], axis=-1)

        return ChartSample(ev(0, 0), ev(1, 0), ev(0, 1), ev(2, 0), ev(1, 1), ev(0, 2))


CHARTS = {
    "plane": PlaneChart,
    "cylinder": CylinderChart,
    "sphere": lambda: SphereChart(1.0),
    "sphere2": lambda: SphereChart(2.0),
    "catenoid": CatenoidChart,
}
