"""Selection between numba-compiled kernels and their numpy twins.

Set ``NIOPT_NUMBA=0`` in the environment before import to force the pure
numpy path (useful for debugging and for machines without numba).
"""

import os

try:
    import numba
except ImportError:  # pragma: no cover - exercised only without numba
    numba = None

HAVE_NUMBA = numba is not None
USE_NUMBA = HAVE_NUMBA and os.environ.get("NIOPT_NUMBA", "1").strip().lower() not in (
    "0",
    "false",
    "no",
    "off",
)


def njit(fn):
    """Compile ``fn`` in nopython mode, or return it untouched without numba."""
    if not HAVE_NUMBA:
        return fn
    return numba.njit(cache=True, nogil=True)(fn)


def pick(compiled, fallback):
    return compiled if USE_NUMBA else fallback
