"""Synthetic pulsating-ellipse mask videos with analytically known EF.

An ellipse with semi-axes ``(a, b)`` and long axis ``L = 2a`` has area
``pi*a*b`` and area-length volume ``c * (pi*a*b)**2 / (2*a)``, proportional to
``a * b**2``. Scaling both axes by ``s`` scales the volume by ``s**3``, so a
cycle shrinking from scale 1 to ``(1 - EF/100) ** (1/3)`` has exactly that EF.
"""
from __future__ import annotations

import math

import numpy as np

from .ingest import MaskSequence


def ellipse_mask(a, b, width, height, cx=None, cy=None, angle=0.0):
    """Pixels whose centre lies inside the ellipse; long semi-axis ``a`` points along ``angle`` from +y."""
    cx = width / 2.0 if cx is None else cx
    cy = height / 2.0 if cy is None else cy
    ys, xs = np.mgrid[0:height, 0:width]
    dx = xs + 0.5 - cx
    dy = ys + 0.5 - cy
    ca, sa = math.cos(angle), math.sin(angle)
    u = dx * sa + dy * ca  # along the long axis
    v = dx * ca - dy * sa
    return (u / a) ** 2 + (v / b) ** 2 <= 1.0


def es_scale(ef):
    """Axis scale at ES (ED scale 1) giving ejection fraction ``ef`` percent."""
    return (1.0 - ef / 100.0) ** (1.0 / 3.0)


def scale_waveform(cycle_efs, period=40, hold=6, lead=10):
    """Per-frame axis scale for consecutive cycles.

    Each cycle holds scale 1 for ``hold`` frames (ED), falls along a half
    cosine to its ES scale, holds that for ``hold`` frames, then rises back.
    ``lead`` frames of the rising limb precede the first ED so that ED is an
    interior maximum. Cycle lengths may vary when ``period`` is a sequence.
    """
    periods = [period] * len(cycle_efs) if np.isscalar(period) else list(period)
    if len(periods) != len(cycle_efs):
        raise ValueError("one period per cycle")
    scales = []
    first_es = es_scale(cycle_efs[0])
    for i in range(lead):
        scales.append(first_es + (1.0 - first_es) * 0.5 * (1 - math.cos(math.pi * (i + 1) / (lead + 1))))
    for ef, p in zip(cycle_efs, periods):
        s_es = es_scale(ef)
        ramp = (p - 2 * hold) // 2
        if ramp < 1:
            raise ValueError("period too short for the hold length")
        fall = [1.0 - (1.0 - s_es) * 0.5 * (1 - math.cos(math.pi * (i + 1) / (ramp + 1))) for i in range(ramp)]
        rise_n = p - 2 * hold - ramp
        rise = [s_es + (1.0 - s_es) * 0.5 * (1 - math.cos(math.pi * (i + 1) / (rise_n + 1))) for i in range(rise_n)]
        scales += [1.0] * hold + fall + [s_es] * hold + rise
    # close with a final ED plateau so the last ES is bracketed
    scales += [1.0] * hold + [0.98, 0.95]
    return np.asarray(scales)


def pulsating_ellipse_video(video_id, cycle_efs, a0=48.0, b0=24.0, width=112, height=128,
                            period=40, hold=6, lead=10, angle=0.0):
    """Mask video whose ellipse scale follows :func:`scale_waveform`."""
    scales = scale_waveform(cycle_efs, period, hold, lead)
    frames = np.stack([ellipse_mask(a0 * s, b0 * s, width, height, angle=angle) for s in scales])
    return MaskSequence(video_id, frames)


def ellipse_training_set(a_values, ratios=(0.45, 0.5, 0.55), angles=(0.0,), width=112, height=128):
    """``(features, lengths)`` for rasterized ellipses labelled with ``L = 2a``."""
    from .geometry import extract_features

    X, y = [], []
    for a in a_values:
        for r in ratios:
            for ang in angles:
                f = extract_features(ellipse_mask(a, a * r, width, height, angle=ang))
                X.append(f.as_vector())
                y.append(2.0 * a)
    return np.asarray(X, dtype=np.float64), np.asarray(y, dtype=np.float64)


def ellipse_trace(video_id, frame_index, a, b, cx, cy, n_chords=20):
    """Tracing of an upright ellipse: long axis first, then ``n_chords`` perpendicular chords."""
    from .ingest import TraceFrame

    segs = [((cx, cy - a), (cx, cy + a))]
    for t in np.linspace(-1, 1, n_chords + 2)[1:-1]:
        half = b * math.sqrt(1.0 - t * t)
        y = cy + a * t
        segs.append(((cx - half, y), (cx + half, y)))
    return TraceFrame(video_id, frame_index, tuple(segs))
