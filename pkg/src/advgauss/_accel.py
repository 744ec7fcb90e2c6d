"""Optional numba acceleration.

Hot kernels are written in the subset of numpy that numba can compile. When
numba is importable they are jitted; set ``ADVGAUSS_DISABLE_NUMBA=1`` to run
the same functions as plain numpy (useful for debugging and for the
benchmark, which compares both paths).
"""

import os

_DISABLED = os.environ.get("ADVGAUSS_DISABLE_NUMBA", "").strip().lower() in {"1", "true", "yes", "on"}

try:
    if _DISABLED:
        raise ImportError
    from numba import njit as _njit

    NUMBA_ENABLED = True
except ImportError:
    _njit = None
    NUMBA_ENABLED = False


def kernel(fn):
    """Jit ``fn`` with numba when enabled; the original stays at ``fn.py_func``."""
    if NUMBA_ENABLED:
        return _njit(cache=True, nogil=True)(fn)
    fn.py_func = fn
    return fn
