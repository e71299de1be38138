"""Propagation kernel backends.

The hot loop (one 2x2 exponential per grid cell per spectral point) exists
twice: a Cython extension and a vectorized numpy fallback with identical
semantics.  Selection happens at import time; ``SPECRECON_KERNEL=py`` or
``=c`` forces a backend.
"""

import os

from . import magnus_py

_forced = os.environ.get("SPECRECON_KERNEL", "").lower()

if _forced in ("py", "python"):
    _impl = magnus_py
    BACKEND = "python"
else:
    try:
        from . import magnus_cy as _impl  # type: ignore[attr-defined]

        BACKEND = "compiled"
    except ImportError:
        if _forced in ("c", "compiled"):
            raise
        _impl = magnus_py
        BACKEND = "python"

propagate = _impl.propagate


def backend_name() -> str:
    return BACKEND
