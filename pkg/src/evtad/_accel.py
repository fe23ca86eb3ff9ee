"""Numba acceleration switch.

Hot numeric kernels are decorated with :func:`jit`. By default this is
``numba.njit(cache=True)``; setting the environment variable
``EVTAD_DISABLE_NUMBA=1`` (or numba being unimportable) turns the decorator
into a no-op so the same source runs as pure numpy. The variable is read
once, at import time.
"""

import os

_TRUTHY = ("1", "true", "yes", "on")

NUMBA_DISABLED = os.environ.get("EVTAD_DISABLE_NUMBA", "").strip().lower() in _TRUTHY

if not NUMBA_DISABLED:
    try:
        from numba import njit as _njit
    except ImportError:  # pragma: no cover - numba is a declared dependency
        _njit = None
else:
    _njit = None

USING_NUMBA = _njit is not None


def jit(func):
    """Compile ``func`` with numba when enabled, else return it unchanged."""
    if USING_NUMBA:
        return _njit(cache=True)(func)
    return func


def py_func(func):
    """Return the pure-Python implementation behind a jitted function."""
    return getattr(func, "py_func", func)
