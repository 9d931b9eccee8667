"""Quaternion and rotation algebra.

Quaternions are stored as ``(w, x, y, z)`` with ``w`` the real part.  Imaginary
quaternions are identified with vectors of R^3, so an "imaginary vector" is just
a length-3 numpy array.  Two layers are provided:

* :class:`Quaternion`, an immutable value type for scalar work and tests;
* array functions (:func:`qmul`, :func:`qconj`, ...) acting on ``(..., 4)``
  arrays, used by the grid and path integrators.

Rotation convention: ``rotation_of(q)`` is the matrix of ``alpha -> q^-1 alpha q``.
With this choice the covering map reverses products::

    rotation_of(q1 * q2) == rotation_of(q2) @ rotation_of(q1)
"""
from __future__ import annotations

import math
from dataclasses import dataclass

import numpy as np

from .errors import InvalidInput

#: inputs whose norm differs from 1 by more than this are rejected as non-unit
UNIT_TOL = 1e-9


@dataclass(frozen=True)
class Quaternion:
    w: float = 1.0
    x: float = 0.0
    y: float = 0.0
    z: float = 0.0

    @classmethod
    def from_array(cls, a) -> "Quaternion":
        a = np.asarray(a, dtype=float)
        if a.shape == (3,):
            return cls(0.0, *map(float, a))
        if a.shape != (4,):
            raise InvalidInput(f"expected 3 or 4 components, got shape {a.shape}")
        return cls(*map(float, a))

    @classmethod
    def axis_angle(cls, axis, angle: float) -> "Quaternion":
        """Unit quaternion ``cos(angle/2) + sin(angle/2) axis``."""
        axis = np.asarray(axis, dtype=float)
        axis = axis / np.linalg.norm(axis)
        s = math.sin(angle / 2)
        return cls(math.cos(angle / 2), *(s * axis))

    def as_array(self) -> np.ndarray:
        return np.array([self.w, self.x, self.y, self.z])

    @property
    def vector(self) -> np.ndarray:
        return np.array([self.x, self.y, self.z])

    def norm(self) -> float:
        return math.sqrt(self.w ** 2 + self.x ** 2 + self.y ** 2 + self.z ** 2)

    def conj(self) -> "Quaternion":
        return Quaternion(self.w, -self.x, -self.y, -self.z)

    def inverse(self) -> "Quaternion":
        n2 = self.norm() ** 2
        if n2 == 0.0:
            raise ZeroDivisionError("zero quaternion has no inverse")
        c = self.conj()
        return Quaternion(c.w / n2, c.x / n2, c.y / n2, c.z / n2)

    def __mul__(self, other):
        if isinstance(other, Quaternion):
            return quat_mul(self, other)
        if isinstance(other, (int, float)):
            return Quaternion(self.w * other, self.x * other, self.y * other, self.z * other)
        return NotImplemented

    def __rmul__(self, other):
        if isinstance(other, (int, float)):
            return self * other
        return NotImplemented

    def __add__(self, other):
        if not isinstance(other, Quaternion):
            return NotImplemented
        return Quaternion(self.w + other.w, self.x + other.x, self.y + other.y, self.z + other.z)

    def __sub__(self, other):
        if not isinstance(other, Quaternion):
            return NotImplemented
        return Quaternion(self.w - other.w, self.x - other.x, self.y - other.y, self.z - other.z)

    def __neg__(self):
        return Quaternion(-self.w, -self.x, -self.y, -self.z)


ONE = Quaternion(1.0, 0.0, 0.0, 0.0)
I = Quaternion(0.0, 1.0, 0.0, 0.0)
J = Quaternion(0.0, 0.0, 1.0, 0.0)
K = Quaternion(0.0, 0.0, 0.0, 1.0)


def _as_quaternion(q) -> Quaternion:
    return q if isinstance(q, Quaternion) else Quaternion.from_array(q)


def quat_mul(a, b) -> Quaternion:
    """Hamilton product ``a b``.

    For imaginary inputs this is ``-<p, q> + p x q``.
    """
    a = _as_quaternion(a)
    b = _as_quaternion(b)
    return Quaternion(
        a.w * b.w - a.x * b.x - a.y * b.y - a.z * b.z,
        a.w * b.x + a.x * b.w + a.y * b.z - a.z * b.y,
        a.w * b.y - a.x * b.z + a.y * b.w + a.z * b.x,
        a.w * b.z + a.x * b.y - a.y * b.x + a.z * b.w,
    )


def as_unit(q) -> Quaternion:
    """Return ``q`` renormalized, or raise if it is not within UNIT_TOL of S^3."""
    q = _as_quaternion(q)
    n = q.norm()
    if not math.isfinite(n) or abs(n - 1.0) > UNIT_TOL:
        raise InvalidInput(f"expected a unit quaternion, |q| = {n!r}")
    return Quaternion(q.w / n, q.x / n, q.y / n, q.z / n)


def conjugate_by(q, alpha) -> np.ndarray:
    """``q^-1 alpha q`` for a unit quaternion ``q`` and imaginary ``alpha``."""
    q = as_unit(q)
    a = Quaternion.from_array(alpha)
    return quat_mul(quat_mul(q.conj(), a), q).vector


def rotation_of(q) -> np.ndarray:
    """Matrix of ``alpha -> q^-1 alpha q``; ``q`` and ``-q`` give the same matrix."""
    q = as_unit(q)
    return rotation_matrices(q.as_array())


def rotation_angle(r) -> float:
    """Rotation angle in [0, pi] of an orthonormal 3x3 matrix."""
    r = np.asarray(r, dtype=float)
    c = (np.trace(r) - 1.0) / 2.0
    # near theta = 0 the arccos of the trace loses half the digits
    s = 0.5 * np.linalg.norm([r[2, 1] - r[1, 2], r[0, 2] - r[2, 0], r[1, 0] - r[0, 1]])
    return float(math.atan2(s, c))


# ---------------------------------------------------------------------------
# array layer: (..., 4) quaternions, (..., 3) imaginary vectors

def qmul(a: np.ndarray, b: np.ndarray) -> np.ndarray:
    """Broadcasting Hamilton product of ``(..., 4)`` arrays."""
    aw, ax, ay, az = np.moveaxis(np.asarray(a, dtype=float), -1, 0)
    bw, bx, by, bz = np.moveaxis(np.asarray(b, dtype=float), -1, 0)
    return np.stack([
        aw * bw - ax * bx - ay * by - az * bz,
        aw * bx + ax * bw + ay * bz - az * by,
        aw * by - ax * bz + ay * bw + az * bx,
        aw * bz + ax * by - ay * bx + az * bw,
    ], axis=-1)


def qconj(a: np.ndarray) -> np.ndarray:
    a = np.array(a, dtype=float, copy=True)
    a[..., 1:] *= -1.0
    return a


def imag(v: np.ndarray) -> np.ndarray:
    """Embed ``(..., 3)`` vectors as imaginary quaternions ``(..., 4)``."""
    v = np.asarray(v, dtype=float)
    return np.concatenate([np.zeros(v.shape[:-1] + (1,)), v], axis=-1)


def qexp(v: np.ndarray) -> np.ndarray:
    """Exponential of imaginary quaternions given as ``(..., 3)`` vectors."""
    v = np.asarray(v, dtype=float)
    th = np.linalg.norm(v, axis=-1)
    sinc = np.where(th > 1e-8, np.sin(th) / np.where(th > 0, th, 1.0), 1.0 - th ** 2 / 6.0)
    return np.concatenate([np.cos(th)[..., None], sinc[..., None] * v], axis=-1)


def conjugate_vectors(q: np.ndarray, v: np.ndarray) -> np.ndarray:
    """Array form of :func:`conjugate_by` (no unit check): ``q^-1 v q``."""
    return qmul(qmul(qconj(q), imag(v)), q)[..., 1:]


def rotation_matrices(q: np.ndarray) -> np.ndarray:
    """Array form of :func:`rotation_of` for ``(..., 4)`` unit quaternions."""
    q = np.asarray(q, dtype=float)
    w, x, y, z = np.moveaxis(q, -1, 0)
    # matrix of v -> q v q^-1, transposed
    m = np.stack([
        np.stack([1 - 2 * (y * y + z * z), 2 * (x * y - w * z), 2 * (x * z + w * y)], -1),
        np.stack([2 * (x * y + w * z), 1 - 2 * (x * x + z * z), 2 * (y * z - w * x)], -1),
        np.stack([2 * (x * z - w * y), 2 * (y * z + w * x), 1 - 2 * (x * x + y * y)], -1),
    ], -2)
    return np.swapaxes(m, -1, -2)


def rotate(axis_angle: np.ndarray, v: np.ndarray) -> np.ndarray:
    """Rodrigues rotation of ``v`` by the rotation vector ``axis_angle``."""
    w = np.asarray(axis_angle, dtype=float)
    v = np.asarray(v, dtype=float)
    th = np.linalg.norm(w, axis=-1)[..., None]
    safe = np.where(th > 0, th, 1.0)
    k = w / safe
    c, s = np.cos(th), np.sin(th)
    return v * c + np.cross(k, v) * s + k * np.sum(k * v, axis=-1, keepdims=True) * (1 - c)
