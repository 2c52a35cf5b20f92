"""Numba detection and backend selection for the hot kernels.

Set DWLAB_DISABLE_NUMBA=1 to force the pure-numpy fallback paths even when
numba is installed.  Every kernel in `dwlab.kernels` has both
implementations; integer-valued kernels produce identical results on both
backends, float kernels agree to machine precision.
"""

import os

try:
    import numba

    HAVE_NUMBA = True
except ImportError:  # pragma: no cover - numba is a declared dependency
    numba = None
    HAVE_NUMBA = False

USE_NUMBA = HAVE_NUMBA and os.environ.get("DWLAB_DISABLE_NUMBA", "0") != "1"


def njit(*args, **kwargs):
    """numba.njit passthrough; identity decorator when numba is unavailable."""
    if not HAVE_NUMBA:
        def wrap(fn):
            return fn

        return wrap
    return numba.njit(*args, **kwargs)
