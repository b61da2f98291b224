"""Selects the compiled kernels when importable, else the numpy fallback.

Set ``HSPLUS_PURE_PYTHON=1`` to force the fallback.
"""

import logging
import os

from . import _fallback

log = logging.getLogger(__name__)

_compiled = None
if os.environ.get("HSPLUS_PURE_PYTHON", "").strip() not in ("1", "true", "yes"):
    try:
        from . import _kernels as _compiled
    except ImportError:  # extension not built
        log.debug("compiled kernels unavailable; using numpy fallback")
        _compiled = None


def kernels(name=None):
    """Return the kernel module: ``None`` for the default, or ``"cython"`` / ``"numpy"``."""
    if name is None:
        return _compiled if _compiled is not None else _fallback
    if name == "numpy":
        return _fallback
    if name == "cython":
        if _compiled is None:
            raise ImportError("compiled kernels are not available in this installation")
        return _compiled
    raise ValueError(f"unknown backend {name!r}")


def available():
    return ["cython", "numpy"] if _compiled is not None else ["numpy"]


def active():
    return kernels().NAME
