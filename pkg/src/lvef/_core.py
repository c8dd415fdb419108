"""Kernel backend selection.

The compiled ``_kernels`` extension is used when it imports; otherwise the
numpy fallback. Set ``LVEF_PURE_PYTHON=1`` to force the fallback.
"""
import os

from . import _kernels_py

BACKEND = "python"
_impl = _kernels_py

if os.environ.get("LVEF_PURE_PYTHON", "") not in ("1", "true", "yes"):
    try:
        from . import _kernels as _compiled
    except ImportError:
        pass
    else:
        _impl = _compiled
        BACKEND = "cython"

local_maxima = _impl.local_maxima
peak_prominences = _impl.peak_prominences
select_by_distance = _impl.select_by_distance
fill_polygon = _impl.fill_polygon
best_split = _impl.best_split
tree_predict = _impl.tree_predict
fit_random_tree = _impl.fit_random_tree


def backends():
    """Map of available backend name -> kernel module (for tests and benchmarks)."""
    found = {"python": _kernels_py}
    try:
        from . import _kernels as compiled
    except ImportError:
        pass
    else:
        found["cython"] = compiled
    return found
