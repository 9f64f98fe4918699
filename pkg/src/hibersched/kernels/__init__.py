"""Hot scheduling kernels.

The compiled extension is used when it was built; otherwise the pure-Python
implementation is selected. Set ``HIBERSCHED_PURE=1`` to force the fallback.
"""

import os

from . import _fit_py

BACKEND = "python"
earliest_fit = _fit_py.earliest_fit

if os.environ.get("HIBERSCHED_PURE", "") not in ("1", "true", "yes"):
    try:
        from . import _fit  # type: ignore[attr-defined]
    except ImportError:
        pass
    else:
        earliest_fit = _fit.earliest_fit
        BACKEND = "cython"

__all__ = ["earliest_fit", "BACKEND"]
