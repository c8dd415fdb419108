"""Area-length volumes, per-cycle and all-cycle ejection fraction, HFrEF call, per-video orchestration."""
from __future__ import annotations

import math
from dataclasses import dataclass, field

import numpy as np

from .cycles import AreaSeries, CardiacCycle, PeakParams, detect_cycles
from .errors import NoCycles, NonPositiveEdv, UntrainedModel, ZeroLength
from .geometry import LvFrameFeatures, extract_features
from .refine import refine_cycle_areas

AREA_LENGTH_CONSTANT = 8.0 / (3.0 * math.pi)
HFREF_THRESHOLD = 40.0


@dataclass(frozen=True)
class VolumeConstant:
    c: float = AREA_LENGTH_CONSTANT

    def __post_init__(self):
        if not self.c > 0:
            raise ValueError("volume constant must be positive")


@dataclass(frozen=True)
class PipelineConfig:
    peaks: PeakParams = PeakParams()
    jeffrey_fraction: float = 0.10
    volume_constant: VolumeConstant = VolumeConstant()
    refine: bool = True  # False uses the raw ED/ES frame areas


@dataclass(frozen=True)
class CycleVolumes:
    cycle: CardiacCycle
    ed_area: float
    es_area: float
    ed_length: float
    es_length: float
    edv: float
    esv: float
    ef: float

    def as_dict(self):
        return {
            "ed_frame": self.cycle.ed_frame, "es_frame": self.cycle.es_frame,
            "ed_area": self.ed_area, "es_area": self.es_area,
            "ed_length": self.ed_length, "es_length": self.es_length,
            "edv": self.edv, "esv": self.esv, "ef": self.ef,
        }


@dataclass
class VideoResult:
    video_id: str
    cycles: list
    ef_all_cycles: float
    ef_first_cycle: float
    ef_second_cycle: float | None
    hfref: bool
    flags: list = field(default_factory=list)

    def as_dict(self, single_cycle=False):
        ef = self.ef_first_cycle if single_cycle else self.ef_all_cycles
        return {
            "video_id": self.video_id,
            "cycles": [c.as_dict() for c in self.cycles],
            "ef_all_cycles": self.ef_all_cycles,
            "ef_first_cycle": self.ef_first_cycle,
            "ef_second_cycle": self.ef_second_cycle,
            "mode": "single-cycle" if single_cycle else "all-cycles",
            "ef": ef,
            "hfref": classify_hfref(ef),
            "flags": list(self.flags),
        }


def volume_area_length(area, length, k=VolumeConstant()):
    if not length > 0:
        raise ZeroLength(f"LV length must be positive, got {length}")
    c = k.c if isinstance(k, VolumeConstant) else float(k)
    return c * area * area / length


def ef_from_volumes(edv, esv):
    if not edv > 0:
        raise NonPositiveEdv(f"EDV must be positive, got {edv}")
    return 100.0 * (edv - esv) / edv


def ef_from_area_length(ed_area, ed_length, es_area, es_length):
    """EF from ED/ES areas and lengths without going through a volume constant.

    The constant cancels in the EF ratio; computing on ``A**2 / L`` directly
    makes the result bit-identical for every choice of constant.
    """
    for length in (ed_length, es_length):
        if not length > 0:
            raise ZeroLength(f"LV length must be positive, got {length}")
    q_ed = ed_area * ed_area / ed_length
    q_es = es_area * es_area / es_length
    if not q_ed > 0:
        raise NonPositiveEdv(f"EDV must be positive (ED area {ed_area})")
    return 100.0 * (q_ed - q_es) / q_ed


def ef_all_cycles(per_cycle_efs):
    efs = list(per_cycle_efs)
    if not efs:
        raise NoCycles("no accepted cycle to average")
    return float(np.mean(efs))


def classify_hfref(ef):
    return ef < HFREF_THRESHOLD


def phenotype(ef):
    if ef < HFREF_THRESHOLD:
        return "HFrEF"
    if ef < 50.0:
        return "HFmrEF"
    return "HFpEF"


def _length_predictor(model):
    if callable(getattr(model, "predict", None)):
        if not getattr(model, "is_trained", True):
            raise UntrainedModel("length model has not been trained")
        return lambda feats: [float(v) for v in model.predict(np.array([f.as_vector() for f in feats]))]
    if callable(model):
        return lambda feats: [float(model(f)) for f in feats]
    raise UntrainedModel("no usable length model supplied")


def compute_video_result(video_id, features, model, config=PipelineConfig()):
    """EF for one video from its per-frame features.

    ``model`` is a trained :class:`~lvef.ensemble.LengthModel` (anything with
    ``predict(X)``) or a plain callable mapping one :class:`LvFrameFeatures`
    to a length.
    """
    predict = _length_predictor(model)
    series = AreaSeries(video_id, [f.area for f in features])
    cycles = detect_cycles(series, config.peaks)
    if not cycles:
        raise NoCycles(f"no cardiac cycle detected in {video_id}")
    flags = []
    accepted = []
    for i, cyc in enumerate(cycles):
        if config.refine:
            ed_area, es_area = refine_cycle_areas(series, cyc, config.jeffrey_fraction)
        else:
            ed_area, es_area = float(series.areas[cyc.ed_frame]), float(series.areas[cyc.es_frame])
        if ed_area < es_area:
            flags.append(f"cycle {i}: refined ED area {ed_area:.6g} below ES area {es_area:.6g}")
        ed_len, es_len = predict([features[cyc.ed_frame], features[cyc.es_frame]])
        try:
            edv = volume_area_length(ed_area, ed_len, config.volume_constant)
            esv = volume_area_length(es_area, es_len, config.volume_constant)
            ef = ef_from_area_length(ed_area, ed_len, es_area, es_len)
        except (ZeroLength, NonPositiveEdv) as exc:
            flags.append(f"cycle {i} rejected: {exc}")
            continue
        if not 0.0 <= ef < 100.0:
            flags.append(f"cycle {i} rejected: EF {ef:.4g}% outside [0, 100)")
            continue
        accepted.append(CycleVolumes(cyc, ed_area, es_area, ed_len, es_len, edv, esv, ef))
    if not accepted:
        raise NoCycles(f"no acceptable cardiac cycle in {video_id}: " + "; ".join(flags))
    efs = [c.ef for c in accepted]
    ef_all = ef_all_cycles(efs)
    return VideoResult(
        video_id=video_id,
        cycles=accepted,
        ef_all_cycles=ef_all,
        ef_first_cycle=efs[0],
        ef_second_cycle=efs[1] if len(efs) > 1 else None,
        hfref=classify_hfref(ef_all),
        flags=flags,
    )


def ef_from_labeled_frames(area_length_pairs):
    """EF from expert-labeled frames given as ``(area, length)`` pairs.

    The frame with the largest area is taken as ED and the smallest as ES.
    """
    pairs = list(area_length_pairs)
    if len(pairs) < 2:
        raise NoCycles("need at least two labeled frames")
    ed = max(pairs, key=lambda p: p[0])
    es = min(pairs, key=lambda p: p[0])
    return ef_from_area_length(ed[0], ed[1], es[0], es[1])


def run_pipeline(masks, model, config=PipelineConfig()):
    """Masks -> features -> cycles -> refined areas -> volumes -> EF."""
    if model is None:
        raise UntrainedModel("no length model supplied")
    features = [extract_features(frame, i) for i, frame in enumerate(masks.frames)]
    return compute_video_result(masks.video_id, features, model, config)


__all__ = [
    "AREA_LENGTH_CONSTANT", "HFREF_THRESHOLD", "CycleVolumes", "LvFrameFeatures", "PipelineConfig",
    "VideoResult", "VolumeConstant", "classify_hfref", "compute_video_result", "ef_all_cycles",
    "ef_from_area_length", "ef_from_labeled_frames", "ef_from_volumes", "phenotype", "run_pipeline", "volume_area_length",
]
