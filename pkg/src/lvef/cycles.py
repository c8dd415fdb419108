"""End-diastole / end-systole detection on per-frame LV area curves."""
from __future__ import annotations

from dataclasses import dataclass

import numpy as np

from . import _core
from ._io import atomic_write_text
from .errors import NoCycles


@dataclass(frozen=True, eq=False)
class AreaSeries:
    video_id: str
    areas: np.ndarray

    def __post_init__(self):
        a = np.asarray(self.areas, dtype=np.float64)
        if a.ndim != 1 or a.size < 1:
            raise ValueError("area series must be a non-empty 1-d sequence")
        if not np.all(np.isfinite(a)) or (a < 0).any():
            raise ValueError("areas must be finite and non-negative")
        object.__setattr__(self, "areas", a)

    def __len__(self):
        return self.areas.size


@dataclass(frozen=True)
class PeakParams:
    min_distance: int = 20
    prominence_fraction: float = 0.5

    def __post_init__(self):
        if self.min_distance < 1:
            raise ValueError("min_distance must be >= 1")
        if not 0 < self.prominence_fraction < 1:
            raise ValueError("prominence_fraction must lie in (0, 1)")


@dataclass(frozen=True)
class CardiacCycle:
    ed_frame: int
    es_frame: int


def _areas(series):
    return np.asarray(getattr(series, "areas", series), dtype=np.float64)


def find_peaks(series, params=PeakParams()):
    """Frame indices of dominant local maxima.

    A candidate is a local maximum (plateaus by their first frame) whose
    prominence reaches ``prominence_fraction * (max - min)`` of the whole
    series. Surviving candidates are then thinned greedily, highest first
    (earlier frame wins ties), so that accepted peaks are at least
    ``min_distance`` frames apart.
    """
    x = _areas(series)
    peaks = _core.local_maxima(x)
    if peaks.size == 0:
        return []
    threshold = params.prominence_fraction * (x.max() - x.min())
    prom = _core.peak_prominences(x, peaks)
    peaks = peaks[prom >= threshold]
    if peaks.size == 0:
        return []
    keep = _core.select_by_distance(peaks, x[peaks], params.min_distance)
    return [int(p) for p in peaks[keep]]


def detect_cycles(series, params=PeakParams()):
    """Pair every ED peak with the lowest ES trough before the next ED.

    Returns an empty list when nothing pairs up; use :func:`require_cycles`
    where at least one cycle is mandatory.
    """
    x = _areas(series)
    eds = find_peaks(x, params)
    ess = find_peaks(-x, params)
    cycles = []
    for k, e in enumerate(eds):
        stop = eds[k + 1] if k + 1 < len(eds) else x.size
        cands = [s for s in ess if e < s < stop]
        if not cands:
            continue
        s = min(cands, key=lambda i: (x[i], i))
        if x[e] > x[s]:
            cycles.append(CardiacCycle(e, s))
    return cycles


def require_cycles(series, params=PeakParams()):
    cycles = detect_cycles(series, params)
    if not cycles:
        vid = getattr(series, "video_id", None)
        raise NoCycles(f"no cardiac cycle detected{' in ' + vid if vid else ''}")
    return cycles


def write_cycles_csv(path, rows):
    """``rows``: iterable of ``(video_id, cycles)``."""
    lines = ["video_id,cycle_index,ed_frame,es_frame"]
    for vid, cycles in rows:
        lines.extend(f"{vid},{i},{c.ed_frame},{c.es_frame}" for i, c in enumerate(cycles))
    atomic_write_text(path, "\n".join(lines) + "\n")
