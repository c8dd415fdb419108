"""Tracing -> polygon -> mask conversion and per-frame LV shape features."""
from __future__ import annotations

import csv
import io
import math
from dataclasses import dataclass

import numpy as np

from . import _core
from ._io import atomic_write_text
from .errors import DegenerateTrace, DimensionMismatch, MalformedRow, MissingColumn, OutOfBounds

FEATURE_COLUMNS = ("video_id", "frame_index", "area", "width", "height")


@dataclass(frozen=True)
class LvFrameFeatures:
    frame_index: int
    area: float
    width: float
    height: float

    def as_vector(self):
        return (self.area, self.width, self.height)


def polygon_from_trace(trace):
    """Closed LV contour from the chord endpoints of a trace.

    Each chord contributes one endpoint to either side of the long axis (the
    endpoint with the larger signed distance goes to the positive side). One
    side is walked in increasing projection along the axis and the other back
    in decreasing projection, which yields a ring.
    """
    segs = np.asarray(trace.segments, dtype=np.float64)
    if segs.shape[0] < 2:
        raise DegenerateTrace("trace needs a long axis and at least one chord")
    p0, p1 = segs[0]
    axis = p1 - p0
    norm = math.hypot(axis[0], axis[1])
    if norm == 0:
        # no usable axis: fall back to the direction of the first chord's normal
        c = segs[1, 1] - segs[1, 0]
        axis = np.array([-c[1], c[0]])
        norm = math.hypot(axis[0], axis[1]) or 1.0
    u = axis / norm
    n = np.array([-u[1], u[0]])
    chords = segs[1:]
    a, b = chords[:, 0], chords[:, 1]
    da = (a - p0) @ n
    db = (b - p0) @ n
    pos = np.where((da >= db)[:, None], a, b)
    neg = np.where((da >= db)[:, None], b, a)
    pos = pos[np.argsort((pos - p0) @ u, kind="stable")]
    neg = neg[np.argsort((neg - p0) @ u, kind="stable")[::-1]]
    ring = np.vstack([pos, neg])
    # drop consecutive duplicates (including wrap-around)
    keep = np.any(ring != np.roll(ring, 1, axis=0), axis=1)
    if ring.shape[0] > 1:
        ring = ring[keep] if keep.any() else ring[:1]
    if len({tuple(p) for p in ring}) < 3 or shoelace_area(ring) == 0.0:
        raise DegenerateTrace("chord endpoints do not span an area")
    return ring


def shoelace_area(poly):
    p = np.asarray(poly, dtype=np.float64)
    if p.shape[0] < 3:
        return 0.0
    x, y = p[:, 0], p[:, 1]
    return abs(float(np.dot(x, np.roll(y, -1)) - np.dot(np.roll(x, -1), y))) / 2.0


def perimeter(poly):
    p = np.asarray(poly, dtype=np.float64)
    return float(np.hypot(*(np.roll(p, -1, axis=0) - p).T).sum())


def rasterize_polygon(poly, width, height):
    """Boolean ``(height, width)`` mask of pixels whose centre is inside ``poly`` (even-odd)."""
    p = np.asarray(poly, dtype=np.float64)
    if p.ndim != 2 or p.shape[1] != 2:
        raise ValueError("polygon must be an (n, 2) array of (x, y) vertices")
    if p.size and ((p[:, 0] < 0).any() or (p[:, 0] >= width).any()
                   or (p[:, 1] < 0).any() or (p[:, 1] >= height).any()):
        raise OutOfBounds(f"polygon vertex outside [0,{width})x[0,{height})")
    return _core.fill_polygon(p[:, 0], p[:, 1], int(width), int(height)).astype(bool)


def clip_polygon_to_frame(poly, width, height):
    """Clamp vertices into the frame; for tracings that touch the image border."""
    p = np.array(poly, dtype=np.float64)
    p[:, 0] = np.clip(p[:, 0], 0.0, np.nextafter(width, 0))
    p[:, 1] = np.clip(p[:, 1], 0.0, np.nextafter(height, 0))
    return p


def extract_features(mask, frame_index=0):
    """Area (pixel count) and principal-axis extents of a binary mask.

    ``height`` is the peak-to-peak extent of the foreground pixel coordinates
    along the major principal axis, ``width`` along the minor one. When the
    two eigenvalues tie, the image y axis is taken as the height direction.
    """
    mask = np.asarray(mask, dtype=bool)
    rows, cols = np.nonzero(mask)
    area = rows.size
    if area == 0:
        return LvFrameFeatures(frame_index, 0.0, 0.0, 0.0)
    pts = np.column_stack([cols, rows]).astype(np.float64)  # (x, y)
    centred = pts - pts.mean(axis=0)
    cov = centred.T @ centred / area
    evals, evecs = np.linalg.eigh(cov)  # ascending
    if evals[1] - evals[0] <= 1e-12 * max(evals[1], 1.0):
        major, minor = np.array([0.0, 1.0]), np.array([1.0, 0.0])
    else:
        major, minor = evecs[:, 1], evecs[:, 0]
    h = pts @ major
    w = pts @ minor
    return LvFrameFeatures(frame_index, float(area), float(np.ptp(w)), float(np.ptp(h)))


def trace_length(trace):
    (x1, y1), (x2, y2) = trace.segments[0]
    return math.hypot(x2 - x1, y2 - y1)


def dice(a, b):
    a = np.asarray(a, dtype=bool)
    b = np.asarray(b, dtype=bool)
    if a.shape != b.shape:
        raise DimensionMismatch(f"mask shapes differ: {a.shape} vs {b.shape}")
    total = int(a.sum()) + int(b.sum())
    if total == 0:
        return 1.0
    return 2.0 * int(np.logical_and(a, b).sum()) / total


def sequence_features(frames):
    return [extract_features(f, i) for i, f in enumerate(frames)]


def write_features_csv(path, rows):
    """Write dict rows with at least :data:`FEATURE_COLUMNS`; ``length``/``split`` are optional."""
    rows = list(rows)
    extra = [c for c in ("length", "split") if any(r.get(c) is not None for r in rows)]
    cols = list(FEATURE_COLUMNS) + extra
    buf = io.StringIO()
    out = csv.writer(buf, lineterminator="\n")
    out.writerow(cols)
    for r in rows:
        out.writerow(["" if r.get(c) is None else (repr(float(r[c])) if isinstance(r[c], (float, np.floating)) else r[c])
                      for c in cols])
    atomic_write_text(path, buf.getvalue())


def read_features_csv(path):
    with open(path, newline="", encoding="utf-8") as fh:
        reader = csv.DictReader(fh)
        missing = [c for c in FEATURE_COLUMNS if c not in (reader.fieldnames or [])]
        if missing:
            raise MissingColumn(missing[0])
        rows = []
        for lineno, r in enumerate(reader, start=2):
            try:
                rows.append({
                    "video_id": r["video_id"],
                    "frame_index": int(r["frame_index"]),
                    "area": float(r["area"]),
                    "width": float(r["width"]),
                    "height": float(r["height"]),
                    "length": float(r["length"]) if r.get("length") else None,
                    "split": r.get("split") or None,
                })
            except (TypeError, ValueError) as exc:
                raise MalformedRow(lineno, str(exc)) from None
    return rows
