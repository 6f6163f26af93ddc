"""Numba switch.

Kernels are compiled with numba when it is importable, unless the
environment variable ``LADDERS_DISABLE_NUMBA`` is set to a truthy value,
in which case the pure-numpy versions are used everywhere.
"""

import os

try:
    import numba

    HAVE_NUMBA = True
except ImportError:  # pragma: no cover
    numba = None
    HAVE_NUMBA = False

_flag = os.environ.get("LADDERS_DISABLE_NUMBA", "").strip().lower()
USE_NUMBA = HAVE_NUMBA and _flag not in ("1", "true", "yes", "on")


def njit(func):
    """Compile ``func`` in nopython mode, or return it unchanged without numba."""
    if not HAVE_NUMBA:  # pragma: no cover
        return func
    return numba.njit(cache=True, fastmath=False)(func)
