"""Hot-loop kernels with two interchangeable backends.

`FREESPACE_NUMBA=1` forces the numba backend (import error surfaces loudly),
`FREESPACE_NUMBA=0` forces the pure numpy/python fallback, unset auto-detects.
Both backends execute the same IEEE operation sequence, so results are
bit-identical; tests import both modules directly to verify.
"""

import os


def _pick_backend() -> bool:
    flag = os.environ.get("FREESPACE_NUMBA", "").strip().lower()
    if flag in ("0", "false", "off", "no"):
        return False
    if flag in ("1", "true", "on", "yes"):
        import numba  # noqa: F401  # fail loudly when forced

        return True
    try:
        import numba  # noqa: F401

        return True
    except ImportError:
        return False


USING_NUMBA = _pick_backend()

if USING_NUMBA:
    from . import numba_impl as _impl
else:
    from . import numpy_impl as _impl

backend_name = "numba" if USING_NUMBA else "numpy"
assign_pixels = _impl.assign_pixels
assign_nearest = _impl.assign_nearest
poisson_accept = _impl.poisson_accept
connected_components = _impl.connected_components
