"""Numba switch.

Set ``SEDPILOT_DISABLE_NUMBA=1`` to force the pure-numpy kernels. When numba
is missing the numpy path is used automatically.
"""
import os

try:
    import numba
except ImportError:  # pragma: no cover - numba is a hard dependency in CI
    numba = None

HAS_NUMBA = numba is not None
USE_NUMBA = HAS_NUMBA and os.environ.get("SEDPILOT_DISABLE_NUMBA", "0").lower() in ("", "0", "false", "no")


def njit(*args, **kws):
    """``numba.njit`` with ``nogil`` and ``cache``; identity decorator without numba."""
    if numba is None:
        if args and callable(args[0]):
            return args[0]
        return lambda f: f
    kws.setdefault("nogil", True)
    kws.setdefault("cache", True)
    return numba.njit(*args, **kws)
