"""Readers and writers for EchoNet-style manifests, volume tracings and PGM mask sequences."""
from __future__ import annotations

import enum
import math
import os
import re
from dataclasses import dataclass
from pathlib import Path

import numpy as np

from ._io import atomic_write_bytes, atomic_write_text
from .errors import DimensionMismatch, EmptyGroup, MalformedRow, MissingColumn, MissingFrame, NotPgm

MANIFEST_COLUMNS = ("FileName", "EF", "ESV", "EDV", "FrameHeight", "FrameWidth", "FPS", "NumberOfFrames", "Split")
TRACING_COLUMNS = ("FileName", "X1", "Y1", "X2", "Y2", "Frame")

_FRAME_RE = re.compile(r"^frame_(\d{5})\.pgm$")


class Split(enum.Enum):
    TRAIN = "TRAIN"
    VAL = "VAL"
    TEST = "TEST"

    @classmethod
    def parse(cls, text):
        return cls(text.strip().upper())


@dataclass(frozen=True)
class VideoRecord:
    file_name: str
    ef_label: float
    esv_label: float
    edv_label: float
    frame_height: int
    frame_width: int
    fps: float
    n_frames: int
    split: Split

    def validate(self):
        if self.n_frames < 1:
            raise ValueError("NumberOfFrames must be >= 1")
        if not 0 < self.ef_label < 100:
            raise ValueError(f"EF {self.ef_label} outside (0, 100)")
        if not self.esv_label < self.edv_label:
            raise ValueError("ESV must be smaller than EDV")
        if self.frame_height <= 0 or self.frame_width <= 0:
            raise ValueError("frame dimensions must be positive")


@dataclass(frozen=True)
class TraceFrame:
    """One traced frame. ``segments[0]`` is the long axis, the rest are chords."""

    file_name: str
    frame_index: int
    segments: tuple  # ((x1, y1), (x2, y2)) per row, in file order

    @property
    def n_segments(self):
        return len(self.segments)


@dataclass(frozen=True, eq=False)
class MaskSequence:
    video_id: str
    frames: np.ndarray  # (n_frames, height, width) bool

    def __post_init__(self):
        frames = np.asarray(self.frames)
        if frames.ndim != 3 or frames.shape[0] < 1:
            raise DimensionMismatch("mask sequence must be a non-empty (n, height, width) stack")
        object.__setattr__(self, "frames", frames.astype(bool))

    @property
    def height(self):
        return self.frames.shape[1]

    @property
    def width(self):
        return self.frames.shape[2]

    def __len__(self):
        return self.frames.shape[0]

    def __eq__(self, other):
        if not isinstance(other, MaskSequence):
            return NotImplemented
        return self.video_id == other.video_id and np.array_equal(self.frames, other.frames)


def video_id_from_name(name):
    """EchoNet tracings carry ``.avi`` on file names while the manifest does not."""
    name = name.strip()
    return name[:-4] if name.lower().endswith(".avi") else name


def _read_rows(path, required):
    """Yield ``(line_number, {column: text})`` for a plain comma-separated file."""
    with open(path, newline="", encoding="utf-8-sig") as fh:
        header_line = fh.readline()
        if not header_line.strip():
            raise MissingColumn(required[0])
        header = [h.strip() for h in header_line.rstrip("\r\n").split(",")]
        for name in required:
            if name not in header:
                raise MissingColumn(name)
        for lineno, line in enumerate(fh, start=2):
            line = line.rstrip("\r\n")
            if not line.strip():
                continue
            if '"' in line:
                raise MalformedRow(lineno, "quoted fields are not supported")
            fields = line.split(",")
            if len(fields) != len(header):
                raise MalformedRow(lineno, f"expected {len(header)} fields, got {len(fields)}")
            yield lineno, dict(zip(header, fields))


def _num(row, key, lineno, kind=float):
    text = row[key].strip()
    try:
        value = float(text)
    except ValueError:
        raise MalformedRow(lineno, f"{key}={text!r} is not a number") from None
    if not math.isfinite(value):
        raise MalformedRow(lineno, f"{key}={text!r} is not finite")
    if kind is int:
        if value != int(value):
            raise MalformedRow(lineno, f"{key}={text!r} is not an integer")
        return int(value)
    return value


def parse_manifest(csv_path):
    records = []
    for lineno, row in _read_rows(csv_path, MANIFEST_COLUMNS):
        try:
            split = Split.parse(row["Split"])
        except ValueError:
            raise MalformedRow(lineno, f"unknown split {row['Split']!r}") from None
        rec = VideoRecord(
            file_name=video_id_from_name(row["FileName"]),
            ef_label=_num(row, "EF", lineno),
            esv_label=_num(row, "ESV", lineno),
            edv_label=_num(row, "EDV", lineno),
            frame_height=_num(row, "FrameHeight", lineno, int),
            frame_width=_num(row, "FrameWidth", lineno, int),
            fps=_num(row, "FPS", lineno),
            n_frames=_num(row, "NumberOfFrames", lineno, int),
            split=split,
        )
        try:
            rec.validate()
        except ValueError as exc:
            raise MalformedRow(lineno, str(exc)) from None
        records.append(rec)
    return records


def serialize_manifest(records, csv_path):
    lines = [",".join(MANIFEST_COLUMNS)]
    for r in records:
        if "," in r.file_name:
            raise ValueError(f"file name {r.file_name!r} contains a comma")
        lines.append(",".join([
            r.file_name, repr(r.ef_label), repr(r.esv_label), repr(r.edv_label),
            str(r.frame_height), str(r.frame_width), repr(r.fps), str(r.n_frames), r.split.value,
        ]))
    atomic_write_text(csv_path, "\n".join(lines) + "\n")


def parse_tracings(csv_path):
    """Group tracing rows per (video, frame), preserving row order.

    Returns ``{video_id: [TraceFrame, ...]}`` with frames in file order. Rows
    of one (video, frame) must be contiguous; a group that reappears later is
    rejected, as is any group with fewer than two segments.
    """
    groups = {}
    seen = set()
    current_key = None
    current = None
    start_line = None

    def flush():
        if current_key is None:
            return
        if len(current) < 2:
            raise EmptyGroup(f"{current_key[0]} frame {current_key[1]} (line {start_line}) has "
                             f"{len(current)} segment(s); need a long axis and at least one chord")
        groups.setdefault(current_key[0], []).append(
            TraceFrame(file_name=current_key[0], frame_index=current_key[1], segments=tuple(current)))

    for lineno, row in _read_rows(csv_path, TRACING_COLUMNS):
        key = (video_id_from_name(row["FileName"]), _num(row, "Frame", lineno, int))
        if not key[0]:
            raise MalformedRow(lineno, "empty FileName")
        seg = ((_num(row, "X1", lineno), _num(row, "Y1", lineno)),
               (_num(row, "X2", lineno), _num(row, "Y2", lineno)))
        if key != current_key:
            flush()
            if key in seen:
                raise MalformedRow(lineno, f"rows for {key[0]} frame {key[1]} are not contiguous")
            seen.add(key)
            current_key, current, start_line = key, [], lineno
        current.append(seg)
    flush()
    return groups


# --- PGM masks -------------------------------------------------------------

def _read_pgm(path):
    data = Path(path).read_bytes()
    tokens = []
    pos = 0
    while len(tokens) < 4:
        while pos < len(data) and data[pos:pos + 1].isspace():
            pos += 1
        if pos < len(data) and data[pos:pos + 1] == b"#":
            while pos < len(data) and data[pos:pos + 1] not in (b"\n", b"\r"):
                pos += 1
            continue
        start = pos
        while pos < len(data) and not data[pos:pos + 1].isspace():
            pos += 1
        if start == pos:
            raise NotPgm(f"{path}: truncated header")
        tokens.append(data[start:pos])
    if tokens[0] != b"P5":
        raise NotPgm(f"{path}: magic {tokens[0]!r} is not P5")
    try:
        width, height, maxval = (int(t) for t in tokens[1:])
    except ValueError:
        raise NotPgm(f"{path}: bad header") from None
    if maxval != 255 or width <= 0 or height <= 0:
        raise NotPgm(f"{path}: expected 8-bit maxval 255, got {maxval}")
    pos += 1  # single whitespace byte after maxval
    if len(data) - pos < width * height:
        raise NotPgm(f"{path}: truncated pixel data")
    pixels = np.frombuffer(data, dtype=np.uint8, count=width * height, offset=pos)
    return pixels.reshape(height, width)


def write_pgm(mask, path):
    mask = np.asarray(mask, dtype=bool)
    h, w = mask.shape
    payload = np.where(mask, 255, 0).astype(np.uint8).tobytes()
    atomic_write_bytes(path, b"P5\n%d %d\n255\n" % (w, h) + payload)


def read_pgm_mask(path):
    return _read_pgm(path) >= 128


def is_mask_dir(path):
    path = Path(path)
    return path.is_dir() and any(_FRAME_RE.match(p.name) for p in path.iterdir())


def read_mask_sequence(dir_path, video_id=None):
    dir_path = Path(dir_path)
    indices = {}
    for p in dir_path.iterdir():
        m = _FRAME_RE.match(p.name)
        if m:
            indices[int(m.group(1))] = p
    if not indices:
        raise MissingFrame(0)
    for i in range(max(indices) + 1):
        if i not in indices:
            raise MissingFrame(i)
    frames = [read_pgm_mask(indices[i]) for i in range(len(indices))]
    shape = frames[0].shape
    for i, f in enumerate(frames):
        if f.shape != shape:
            raise DimensionMismatch(f"frame {i} is {f.shape[1]}x{f.shape[0]}, expected {shape[1]}x{shape[0]}")
    return MaskSequence(video_id or dir_path.name, np.stack(frames))


def write_mask_sequence(seq, dir_path):
    dir_path = Path(dir_path)
    dir_path.mkdir(parents=True, exist_ok=True)
    for p in dir_path.iterdir():
        if _FRAME_RE.match(p.name):
            os.remove(p)
    for i, frame in enumerate(seq.frames):
        write_pgm(frame, dir_path / f"frame_{i:05d}.pgm")
