"""Numba switch.

Set ``ACCEPTRANK_DISABLE_NUMBA=1`` to force the pure-numpy kernels. If numba
cannot be imported the numpy kernels are used regardless.
"""

import os

_FLAG = "ACCEPTRANK_DISABLE_NUMBA"


def _disabled_by_env():
    return os.environ.get(_FLAG, "").strip().lower() in {"1", "true", "yes", "on"}


try:
    import numba
except ImportError:  # pragma: no cover - numba is a declared dependency
    numba = None

HAVE_NUMBA = numba is not None
USE_NUMBA = HAVE_NUMBA and not _disabled_by_env()


def njit(func):
    """Compile ``func`` with numba when available, otherwise return it as-is."""
    if not HAVE_NUMBA:
        return func
    return numba.njit(cache=True, fastmath=False)(func)
