"""Backend selection for the hot kernels.

The compiled extension is used when it imports; otherwise the numpy
reference implementation is used.  Set ``FBLQUAD_PURE_PYTHON=1`` to force the
fallback (the test suite does this to cross-check both).
"""
import os

from . import _kernels_py

STATE_SIZE = _kernels_py.STATE_SIZE
WIND_SIZE = _kernels_py.WIND_SIZE


def _load(force_python=False):
    if force_python:
        return _kernels_py, "python"
    try:
        from . import _kernels_ext
    except ImportError:
        return _kernels_py, "python"
    return _kernels_ext, "cython"


_impl, BACKEND = _load(os.environ.get("FBLQUAD_PURE_PYTHON", "") not in ("", "0"))

plant_step = _impl.plant_step
chol_update = _impl.chol_update
feature_eval = _impl.feature_eval
wind_accel = _impl.wind_accel


def backends():
    """Mapping of available backend name -> kernel module."""
    found = {"python": _kernels_py}
    ext, name = _load()
    if name == "cython":
        found["cython"] = ext
    return found
