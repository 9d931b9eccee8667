# cython: language_level=3, boundscheck=False, wraparound=False, cdivision=True
"""Compiled path-stepping kernels (same contracts as ``_fallback``).

The batch axis runs in parallel with OpenMP; each batch member is stepped
sequentially, so results do not depend on the thread count.
"""
import numpy as np
cimport numpy as cnp
from cython.parallel cimport prange
from libc.math cimport sqrt, sin, cos

cnp.import_array()

cdef double SQ3_6 = 0.28867513459481287
cdef double SQ3_12 = 0.14433756729740643


cdef inline void _cross(const double* a, const double* b, double* out) noexcept nogil:
    out[0] = a[1] * b[2] - a[2] * b[1]
    out[1] = a[2] * b[0] - a[0] * b[2]
    out[2] = a[0] * b[1] - a[1] * b[0]


cdef inline void _qmul_vec(const double* q, const double* v, double* out) noexcept nogil:
    out[0] = -q[1] * v[0] - q[2] * v[1] - q[3] * v[2]
    out[1] = q[0] * v[0] + q[2] * v[2] - q[3] * v[1]
    out[2] = q[0] * v[1] - q[1] * v[2] + q[3] * v[0]
    out[3] = q[0] * v[2] + q[1] * v[1] - q[2] * v[0]


cdef inline void _qmul(const double* p, const double* q, double* out) noexcept nogil:
    out[0] = p[0] * q[0] - p[1] * q[1] - p[2] * q[2] - p[3] * q[3]
    out[1] = p[0] * q[1] + p[1] * q[0] + p[2] * q[3] - p[3] * q[2]
    out[2] = p[0] * q[2] - p[1] * q[3] + p[2] * q[0] + p[3] * q[1]
    out[3] = p[0] * q[3] + p[1] * q[2] - p[2] * q[1] + p[3] * q[0]


cdef inline void _qexp(const double* v, double* out) noexcept nogil:
    cdef double th = sqrt(v[0] * v[0] + v[1] * v[1] + v[2] * v[2])
    cdef double s
    if th < 1e-8:
        s = 1.0 - th * th / 6.0
    else:
        s = sin(th) / th
    out[0] = cos(th)
    out[1] = s * v[0]
    out[2] = s * v[1]
    out[3] = s * v[2]


cdef void _rk4_one(double[:, :] q0, double[:, :, :, :] w, double[:, :, :] out,
                   Py_ssize_t k, Py_ssize_t n, double h, bint renorm) noexcept nogil:
    cdef double g[4]
    cdef double t[4]
    cdef double k1[4]
    cdef double k2[4]
    cdef double k3[4]
    cdef double k4[4]
    cdef double v[3]
    cdef Py_ssize_t s, c
    cdef double nrm
    for c in range(4):
        g[c] = q0[k, c]
        out[k, 0, c] = g[c]
    for s in range(n):
        for c in range(3):
            v[c] = w[k, s, 0, c]
        _qmul_vec(g, v, k1)
        for c in range(4):
            t[c] = g[c] + 0.5 * h * k1[c]
        for c in range(3):
            v[c] = w[k, s, 1, c]
        _qmul_vec(t, v, k2)
        for c in range(4):
            t[c] = g[c] + 0.5 * h * k2[c]
        _qmul_vec(t, v, k3)
        for c in range(4):
            t[c] = g[c] + h * k3[c]
        for c in range(3):
            v[c] = w[k, s, 2, c]
        _qmul_vec(t, v, k4)
        for c in range(4):
            g[c] = g[c] + (h / 6.0) * (k1[c] + 2.0 * k2[c] + 2.0 * k3[c] + k4[c])
        if renorm:
            nrm = sqrt(g[0] * g[0] + g[1] * g[1] + g[2] * g[2] + g[3] * g[3])
            for c in range(4):
                g[c] = g[c] / nrm
        for c in range(4):
            out[k, s + 1, c] = g[c]


def quat_rk4(q0, w, double h=1.0, bint renormalize=True, int num_threads=1):
    cdef double[:, :] q0v = np.ascontiguousarray(q0, dtype=np.float64)
    cdef double[:, :, :, :] wv = np.ascontiguousarray(w, dtype=np.float64)
    cdef Py_ssize_t m = wv.shape[0], n = wv.shape[1], k
    res = np.empty((m, n + 1, 4))
    cdef double[:, :, :] out = res
    for k in prange(m, nogil=True, num_threads=num_threads, schedule="static"):
        _rk4_one(q0v, wv, out, k, n, h, renormalize)
    return res


cdef void _qmagnus_one(double[:, :] q0, double[:, :, :, :] w, double[:, :, :] out,
                       Py_ssize_t k, Py_ssize_t n, double h) noexcept nogil:
    cdef double g[4]
    cdef double e[4]
    cdef double t[4]
    cdef double wa[3]
    cdef double wb[3]
    cdef double cr[3]
    cdef double om[3]
    cdef Py_ssize_t s, c
    for c in range(4):
        g[c] = q0[k, c]
        out[k, 0, c] = g[c]
    for s in range(n):
        for c in range(3):
            wa[c] = w[k, s, 0, c]
            wb[c] = w[k, s, 1, c]
        _cross(wa, wb, cr)
        for c in range(3):
            om[c] = 0.5 * h * (wa[c] + wb[c]) + SQ3_6 * h * h * cr[c]
        _qexp(om, e)
        _qmul(g, e, t)
        for c in range(4):
            g[c] = t[c]
            out[k, s + 1, c] = g[c]


def quat_magnus4(q0, w, double h=1.0, int num_threads=1):
    cdef double[:, :] q0v = np.ascontiguousarray(q0, dtype=np.float64)
    cdef double[:, :, :, :] wv = np.ascontiguousarray(w, dtype=np.float64)
    cdef Py_ssize_t m = wv.shape[0], n = wv.shape[1], k
    res = np.empty((m, n + 1, 4))
    cdef double[:, :, :] out = res
    for k in prange(m, nogil=True, num_threads=num_threads, schedule="static"):
        _qmagnus_one(q0v, wv, out, k, n, h)
    return res


cdef void _amagnus_one(double[:, :] e0, double[:, :, :, :] w, double[:, :, :, :] b,
                       double[:, :, :] out, Py_ssize_t k, Py_ssize_t n, double h) noexcept nogil:
    cdef double e[3]
    cdef double wa[3]
    cdef double wb[3]
    cdef double ba[3]
    cdef double bb[3]
    cdef double ow[3]
    cdef double ov[3]
    cdef double c1[3]
    cdef double c2[3]
    cdef double vx[3]
    cdef double vvx[3]
    cdef double wv[3]
    cdef double wwv[3]
    cdef Py_ssize_t s, c
    cdef double th2, th, ca, cb, cc
    for c in range(3):
        e[c] = e0[k, c]
        out[k, 0, c] = e[c]
    for s in range(n):
        for c in range(3):
            wa[c] = w[k, s, 0, c]
            wb[c] = w[k, s, 1, c]
            ba[c] = b[k, s, 0, c]
            bb[c] = b[k, s, 1, c]
        _cross(wb, wa, c1)
        for c in range(3):
            ow[c] = 0.5 * h * (wa[c] + wb[c]) + SQ3_12 * h * h * c1[c]
        _cross(wb, ba, c1)
        _cross(wa, bb, c2)
        for c in range(3):
            ov[c] = 0.5 * h * (ba[c] + bb[c]) + SQ3_12 * h * h * (c1[c] - c2[c])
        th2 = ow[0] * ow[0] + ow[1] * ow[1] + ow[2] * ow[2]
        th = sqrt(th2)
        if th < 1e-4:
            ca = 1.0 - th2 / 6.0 + th2 * th2 / 120.0
            cb = 0.5 - th2 / 24.0 + th2 * th2 / 720.0
            cc = 1.0 / 6.0 - th2 / 120.0 + th2 * th2 / 5040.0
        else:
            ca = sin(th) / th
            cb = (1.0 - cos(th)) / (th * th)
            cc = (th - sin(th)) / (th * th * th)
        _cross(ow, e, vx)
        _cross(ow, vx, vvx)
        _cross(ow, ov, wv)
        _cross(ow, wv, wwv)
        for c in range(3):
            e[c] = (e[c] + ca * vx[c] + cb * vvx[c]) + ov[c] + cb * wv[c] + cc * wwv[c]
            out[k, s + 1, c] = e[c]


def affine_magnus4(e0, w, b, double h=1.0, int num_threads=1):
    cdef double[:, :] e0v = np.ascontiguousarray(e0, dtype=np.float64)
    cdef double[:, :, :, :] wv = np.ascontiguousarray(w, dtype=np.float64)
    cdef double[:, :, :, :] bv = np.ascontiguousarray(b, dtype=np.float64)
    cdef Py_ssize_t m = wv.shape[0], n = wv.shape[1], k
    res = np.empty((m, n + 1, 3))
    cdef double[:, :, :] out = res
    for k in prange(m, nogil=True, num_threads=num_threads, schedule="static"):
        _amagnus_one(e0v, wv, bv, out, k, n, h)
    return res
