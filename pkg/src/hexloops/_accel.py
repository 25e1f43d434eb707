"""Optional numba acceleration.

Kernels in :mod:`hexloops.kernels` are written once, as plain loops over
numpy arrays.  When numba is importable and ``HEXLOOPS_DISABLE_NUMBA`` is
unset (or ``0``), they are compiled with ``numba.njit``; otherwise they run
as ordinary Python.  Both paths consume the same pre-drawn random arrays, so
results are bit-identical.
"""

import os

_FLAG = os.environ.get("HEXLOOPS_DISABLE_NUMBA", "").strip().lower()
DISABLED = _FLAG not in ("", "0", "false", "no")

try:
    if DISABLED:
        raise ImportError
    import numba

    NUMBA = True
except ImportError:  # pragma: no cover - exercised via the env flag
    numba = None
    NUMBA = False


def njit(func=None, **kwargs):
    """``numba.njit(cache=True)`` or the identity, depending on availability."""
    kwargs.setdefault("cache", True)

    def wrap(f):
        if NUMBA:
            return numba.njit(**kwargs)(f)
        f.py_func = f
        return f

    if func is None:
        return wrap
    return wrap(func)


def backend():
    return "numba" if NUMBA else "python"
