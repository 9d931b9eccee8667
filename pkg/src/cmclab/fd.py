"""Finite-difference stencils on uniform grids.

Second-order differences are ``numpy.gradient`` with second-order one-sided
edges.  The fourth-order variants use five-point central stencils in the
interior and five-point one-sided stencils on the two outermost layers.
"""
import numpy as np

_C4 = np.array([1.0, -8.0, 0.0, 8.0, -1.0]) / 12.0
_F4 = [
    np.array([-25.0, 48.0, -36.0, 16.0, -3.0]) / 12.0,  # at node 0
    np.array([-3.0, -10.0, 18.0, -6.0, 1.0]) / 12.0,    # at node 1, nodes -1..3
]


def d1(a, h, axis, order=2):
    """First derivative of ``a`` along ``axis`` with spacing ``h``."""
    a = np.asarray(a, dtype=float)
    if order == 2:
        return np.gradient(a, h, axis=axis, edge_order=2)
    if order != 4:
        raise ValueError("order must be 2 or 4")
    a = np.moveaxis(a, axis, 0)
    n = a.shape[0]
    if n < 5:
        raise ValueError("need at least 5 nodes for fourth-order differences")
    out = np.empty_like(a)
    out[2:-2] = sum(c * a[k:n - 4 + k] for k, c in enumerate(_C4))
    out[0] = sum(c * a[k] for k, c in enumerate(_F4[0]))
    out[1] = sum(c * a[k] for k, c in enumerate(_F4[1]))
    out[-1] = -sum(c * a[n - 1 - k] for k, c in enumerate(_F4[0]))
    out[-2] = -sum(c * a[n - 1 - k] for k, c in enumerate(_F4[1]))
    return np.moveaxis(out / h, 0, axis)


def laplacian5(a, hx, hy):
    """Five-point Laplacian over the first two axes; boundary ring is NaN."""
    a = np.asarray(a, dtype=float)
    out = np.full(a.shape, np.nan)
    out[1:-1, 1:-1] = (
        (a[2:, 1:-1] - 2 * a[1:-1, 1:-1] + a[:-2, 1:-1]) / hx ** 2
        + (a[1:-1, 2:] - 2 * a[1:-1, 1:-1] + a[1:-1, :-2]) / hy ** 2
    )
    return out


def d2(a, h, axis):
    """Second-order central second derivative; edges NaN."""
    a = np.moveaxis(np.asarray(a, dtype=float), axis, 0)
    out = np.full(a.shape, np.nan)
    out[1:-1] = (a[2:] - 2 * a[1:-1] + a[:-2]) / h ** 2
    return np.moveaxis(out, 0, axis)


def dxy(a, hx, hy):
    """Second-order central mixed derivative over axes (0, 1); boundary NaN."""
    a = np.asarray(a, dtype=float)
    out = np.full(a.shape, np.nan)
    out[1:-1, 1:-1] = (a[2:, 2:] - a[2:, :-2] - a[:-2, 2:] + a[:-2, :-2]) / (4 * hx * hy)
    return out
