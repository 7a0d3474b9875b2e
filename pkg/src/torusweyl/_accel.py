"""Numba switch for the hot kernels.

Set ``TORUSWEYL_DISABLE_NUMBA=1`` to force the pure-numpy fallback path.
"""

import functools
import os

try:
    import numba as nb
except ImportError:  # pragma: no cover - numba is a declared dependency
    nb = None

ENV_FLAG = "TORUSWEYL_DISABLE_NUMBA"

USE_NUMBA = nb is not None and os.environ.get(ENV_FLAG, "").strip().lower() not in ("1", "true", "yes")

if nb is not None:
    njit = functools.partial(nb.njit, cache=True, nogil=True)
else:  # pragma: no cover
    def njit(*args, **kwargs):
        def wrap(fn):
            return fn
        return wrap


def backend_name():
    return "numba" if USE_NUMBA else "numpy"
