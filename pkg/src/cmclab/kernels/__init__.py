"""Path-stepping kernels with a compiled core and a numpy fallback.

The compiled extension is used when it imports; set ``CMCLAB_PURE_PYTHON=1``
to force the fallback.  ``CMCLAB_THREADS`` caps the OpenMP threads of the
compiled core (default 1).
"""
import importlib
import os

from . import _fallback

BACKEND = "python"
_core = None
if os.environ.get("CMCLAB_PURE_PYTHON", "") not in ("1", "true", "yes"):
    try:
        _core = importlib.import_module("._core", __name__)
        BACKEND = "cython"
    except ImportError:  # pragma: no cover - depends on the build
        _core = None


def _threads() -> int:
    try:
        return max(1, int(os.environ.get("CMCLAB_THREADS", "1")))
    except ValueError:
        return 1


def quat_rk4(q0, w, h=1.0, renormalize=True):
    """RK4 for ``g' = g w`` with stage samples at ``tau = 0, 1/2, 1``; returns ``(m, n+1, 4)``."""
    if _core is not None:
        return _core.quat_rk4(q0, w, h, renormalize, _threads())
    return _fallback.quat_rk4(q0, w, h, renormalize)


def quat_magnus4(q0, w, h=1.0):
    """Fourth-order Magnus step for ``g' = g w`` (two Gauss samples per step)."""
    if _core is not None:
        return _core.quat_magnus4(q0, w, h, _threads())
    return _fallback.quat_magnus4(q0, w, h)


def affine_magnus4(e0, w, b, h=1.0):
    """Fourth-order Magnus step for ``e' = w x e + b`` (two Gauss samples per step)."""
    if _core is not None:
        return _core.affine_magnus4(e0, w, b, h, _threads())
    return _fallback.affine_magnus4(e0, w, b, h)


__all__ = ["BACKEND", "quat_rk4", "quat_magnus4", "affine_magnus4"]
