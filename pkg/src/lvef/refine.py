"""ED/ES area refinement: the improved Jeffrey's averaging and the percentile baseline."""
import math

import numpy as np

from .errors import InvalidCycle


def _count(fraction, n):
    # round first so e.g. 0.1 * 30 = 3.0000000000000004 does not ceil to 4
    return max(1, math.ceil(round(fraction * n, 9)))


def refine_cycle_areas(series, cycle, fraction=0.10):
    """Outlier-robust ED and ES areas for one cycle.

    ED area is the plain mean over: the area at the ED frame, the largest
    ``ceil(fraction * N)`` areas of the whole video, and the largest
    ``ceil(fraction * M)`` areas inside the cycle window ``[ed, es]``
    (inclusive). ES mirrors this with the smallest areas.
    """
    x = np.asarray(getattr(series, "areas", series), dtype=np.float64)
    ed, es = cycle.ed_frame, cycle.es_frame
    if not 0 <= ed < es < x.size:
        raise InvalidCycle(f"cycle ({ed}, {es}) invalid for a {x.size}-frame series")
    if not 0 < fraction <= 1:
        raise ValueError("fraction must lie in (0, 1]")
    whole = np.sort(x)
    window = np.sort(x[ed:es + 1])
    k_all = _count(fraction, whole.size)
    k_win = _count(fraction, window.size)
    ed_parts = np.concatenate([[x[ed]], whole[::-1][:k_all], window[::-1][:k_win]])
    es_parts = np.concatenate([[x[es]], whole[:k_all], window[:k_win]])
    return float(ed_parts.mean()), float(es_parts.mean())


def percentile_baseline(series):
    x = np.asarray(getattr(series, "areas", series), dtype=np.float64)
    if x.size < 1:
        raise ValueError("empty series")
    return float(np.percentile(x, 90)), float(np.percentile(x, 10))
