"""Pure numpy implementation of the path-stepping kernels.

Every kernel advances a batch of ``m`` independent initial values through
``n`` steps; the batch axis is vectorized, the step loop is sequential.
Stage samples are supplied per step:

* ``quat_rk4``: ``w[k, s, 0:3]`` at ``tau = 0, 1/2, 1`` of step ``s``;
* ``quat_magnus4`` and ``affine_magnus4``: samples at the two Gauss points
  ``tau = 1/2 -+ sqrt(3)/6``.
"""
import numpy as np

SQ3_6 = np.sqrt(3.0) / 6.0
SQ3_12 = np.sqrt(3.0) / 12.0


def _qmul_vec(q, v):
    """``q * (0, v)`` for quaternions ``q`` (m, 4) and vectors ``v`` (m, 3)."""
    w, x, y, z = q[:, 0], q[:, 1], q[:, 2], q[:, 3]
    a, b, c = v[:, 0], v[:, 1], v[:, 2]
    return np.stack([
        -x * a - y * b - z * c,
        w * a + y * c - z * b,
        w * b - x * c + z * a,
        w * c + x * b - y * a,
    ], axis=1)


def _qmul(p, q):
    pw, px, py, pz = p[:, 0], p[:, 1], p[:, 2], p[:, 3]
    qw, qx, qy, qz = q[:, 0], q[:, 1], q[:, 2], q[:, 3]
    return np.stack([
        pw * qw - px * qx - py * qy - pz * qz,
        pw * qx + px * qw + py * qz - pz * qy,
        pw * qy - px * qz + py * qw + pz * qx,
        pw * qz + px * qy - py * qx + pz * qw,
    ], axis=1)


def _qexp(v):
    th = np.sqrt(np.sum(v * v, axis=1))
    small = th < 1e-8
    safe = np.where(small, 1.0, th)
    sinc = np.where(small, 1.0 - th * th / 6.0, np.sin(safe) / safe)
    return np.concatenate([np.cos(th)[:, None], sinc[:, None] * v], axis=1)


def quat_rk4(q0, w, h=1.0, renormalize=True):
    q0 = np.asarray(q0, dtype=float)
    w = np.asarray(w, dtype=float)
    m, n = w.shape[0], w.shape[1]
    out = np.empty((m, n + 1, 4))
    g = q0.copy()
    out[:, 0] = g
    for s in range(n):
        w0, wh, w1 = w[:, s, 0], w[:, s, 1], w[:, s, 2]
        k1 = _qmul_vec(g, w0)
        k2 = _qmul_vec(g + 0.5 * h * k1, wh)
        k3 = _qmul_vec(g + 0.5 * h * k2, wh)
        k4 = _qmul_vec(g + h * k3, w1)
        g = g + (h / 6.0) * (k1 + 2.0 * k2 + 2.0 * k3 + k4)
        if renormalize:
            g = g / np.sqrt(np.sum(g * g, axis=1))[:, None]
        out[:, s + 1] = g
    return out


def quat_magnus4(q0, w, h=1.0):
    q0 = np.asarray(q0, dtype=float)
    w = np.asarray(w, dtype=float)
    m, n = w.shape[0], w.shape[1]
    out = np.empty((m, n + 1, 4))
    g = q0.copy()
    out[:, 0] = g
    for s in range(n):
        wa, wb = w[:, s, 0], w[:, s, 1]
        om = 0.5 * h * (wa + wb) + SQ3_6 * h * h * np.cross(wa, wb)
        g = _qmul(g, _qexp(om))
        out[:, s + 1] = g
    return out


def _rotate(v, x):
    """Rodrigues rotation of ``x`` by rotation vectors ``v`` plus the se(3) V-matrix coefficients."""
    th2 = np.sum(v * v, axis=1)
    th = np.sqrt(th2)
    small = th < 1e-4
    safe = np.where(small, 1.0, th)
    a = np.where(small, 1.0 - th2 / 6.0 + th2 * th2 / 120.0, np.sin(safe) / safe)
    b = np.where(small, 0.5 - th2 / 24.0 + th2 * th2 / 720.0, (1.0 - np.cos(safe)) / (safe * safe))
    c = np.where(small, 1.0 / 6.0 - th2 / 120.0 + th2 * th2 / 5040.0,
                 (safe - np.sin(safe)) / (safe * safe * safe))
    vx = np.cross(v, x)
    vvx = np.cross(v, vx)
    return x + a[:, None] * vx + b[:, None] * vvx, b, c


def affine_magnus4(e0, w, b, h=1.0):
    e0 = np.asarray(e0, dtype=float)
    w = np.asarray(w, dtype=float)
    b = np.asarray(b, dtype=float)
    m, n = w.shape[0], w.shape[1]
    out = np.empty((m, n + 1, 3))
    e = e0.copy()
    out[:, 0] = e
    for s in range(n):
        wa, wb = w[:, s, 0], w[:, s, 1]
        ba, bb = b[:, s, 0], b[:, s, 1]
        ow = 0.5 * h * (wa + wb) + SQ3_12 * h * h * np.cross(wb, wa)
        ov = 0.5 * h * (ba + bb) + SQ3_12 * h * h * (np.cross(wb, ba) - np.cross(wa, bb))
        re, cb, cc = _rotate(ow, e)
        wv = np.cross(ow, ov)
        e = re + ov + cb[:, None] * wv + cc[:, None] * np.cross(ow, wv)
        out[:, s + 1] = e
    return out
