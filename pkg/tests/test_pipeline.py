import math

import numpy as np
import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

from lvef.cycles import PeakParams
from lvef.errors import NoCycles, NonPositiveEdv, UntrainedModel, ZeroLength
from lvef.geometry import sequence_features
from lvef.ingest import MaskSequence
from lvef.pipeline import (
    AREA_LENGTH_CONSTANT,
    PipelineConfig,
    VolumeConstant,
    classify_hfref,
    compute_video_result,
    ef_all_cycles,
    ef_from_area_length,
    ef_from_labeled_frames,
    ef_from_volumes,
    phenotype,
    run_pipeline,
    volume_area_length,
)
from lvef.synthetic import pulsating_ellipse_video


def height_length(f):
    """Length proxy that scales with the mask, for tests that need no trained model."""
    return f.height + 1.0


def test_volume_examples():
    assert volume_area_length(100, 10) == pytest.approx(848.826, abs=1e-3)
    assert volume_area_length(100, 10) == pytest.approx(8 / (3 * math.pi) * 1000, rel=1e-15)
    assert volume_area_length(0, 10) == 0.0
    assert volume_area_length(100, 10, VolumeConstant(2 * AREA_LENGTH_CONSTANT)) == 2 * volume_area_length(100, 10)
    with pytest.raises(ZeroLength):
        volume_area_length(100, 0)
    with pytest.raises(ValueError):
        VolumeConstant(0.0)


def test_ef_examples():
    assert ef_from_volumes(100, 40) == 60.0
    assert ef_from_volumes(80, 80) == 0.0
    assert ef_from_volumes(50, 60) == -20.0
    with pytest.raises(NonPositiveEdv):
        ef_from_volumes(0, 10)


def test_all_cycle_average_examples():
    assert ef_all_cycles([53.68, 51.28, 45.30]) == pytest.approx(50.09, abs=0.01)
    assert ef_all_cycles([60.53, 62.86, 63.50]) == pytest.approx(62.30, abs=0.01)
    assert ef_all_cycles([47.5]) == 47.5
    assert ef_all_cycles([33.0] * 5) == 33.0
    with pytest.raises(NoCycles):
        ef_all_cycles([])


def test_hfref_threshold():
    assert classify_hfref(39.99) is True
    assert classify_hfref(40.0) is False
    assert classify_hfref(55.0) is False
    assert [phenotype(v) for v in (39.9, 40.0, 49.9, 50.0)] == ["HFrEF", "HFmrEF", "HFmrEF", "HFpEF"]


positive = st.floats(1.0, 1e4)


@settings(max_examples=200, deadline=None)
@given(positive, positive, positive, positive, st.floats(0.01, 100))
def test_ef_formula_invariances(a_ed, l_ed, a_es, l_es, s):
    ef = ef_from_area_length(a_ed, l_ed, a_es, l_es)
    q_ed, q_es = a_ed ** 2 / l_ed, a_es ** 2 / l_es
    assert ef == pytest.approx(100 * (1 - q_es / q_ed), rel=1e-9, abs=1e-9)
    assert ef_from_area_length(s * s * a_ed, s * l_ed, s * s * a_es, s * l_es) == pytest.approx(ef, rel=1e-12,
                                                                                                abs=1e-9)


def test_labeled_frames_ef():
    # ED area 400/length 40, ES area 200/length 30
    ef = ef_from_labeled_frames([(200.0, 30.0), (400.0, 40.0), (300.0, 35.0)])
    assert ef == pytest.approx(100 * (1 - (200 ** 2 / 30) / (400 ** 2 / 40)))


@pytest.fixture(scope="module")
def video():
    return pulsating_ellipse_video("ell", [35.0, 45.0, 55.0])


@pytest.mark.parametrize("ef", [25.0, 45.0, 65.0])
def test_synthetic_video_recovers_ef(ef):
    res = run_pipeline(pulsating_ellipse_video("e", [ef] * 3), height_length)
    assert len(res.cycles) == 3
    assert res.ef_all_cycles == pytest.approx(ef, abs=2.0)
    assert all(c.edv > c.esv for c in res.cycles)


def test_per_cycle_ef_with_raw_areas(video):
    res = run_pipeline(video, height_length, PipelineConfig(refine=False))
    for c, target in zip(res.cycles, (35.0, 45.0, 55.0)):
        assert c.ef == pytest.approx(target, abs=2.0)
    assert res.ef_first_cycle == res.cycles[0].ef
    assert res.ef_second_cycle == res.cycles[1].ef


def test_refinement_pulls_cycles_towards_video_extremes(video):
    # the whole-video top/bottom areas enter every cycle's average
    raw = run_pipeline(video, height_length, PipelineConfig(refine=False))
    ref = run_pipeline(video, height_length)
    assert ref.cycles[0].ef > raw.cycles[0].ef
    assert ref.cycles[0].es_area < raw.cycles[0].es_area


def test_deterministic(video):
    a = run_pipeline(video, height_length).as_dict()
    b = run_pipeline(video, height_length).as_dict()
    assert a == b


def test_volume_constant_does_not_change_ef(video):
    feats = sequence_features(video.frames)
    efs = set()
    for c in (8 / (3 * math.pi), 8 * math.pi / 3, 1.0):
        res = compute_video_result("v", feats, height_length, PipelineConfig(volume_constant=VolumeConstant(c)))
        efs.add(tuple(cv.ef for cv in res.cycles))
    assert len(efs) == 1


def test_resolution_doubling(video):
    big = MaskSequence("big", np.kron(video.frames, np.ones((1, 2, 2), dtype=bool)))
    a = run_pipeline(video, height_length).ef_all_cycles
    b = run_pipeline(big, height_length).ef_all_cycles
    assert abs(a - b) <= 1.0


def test_identical_frames_have_no_cycles():
    frames = np.zeros((60, 32, 32), bool)
    frames[:, 8:24, 10:20] = True
    with pytest.raises(NoCycles):
        run_pipeline(MaskSequence("flat", frames), height_length)


def test_single_cycle_mode_only_changes_selection(video):
    res = run_pipeline(video, height_length)
    all_doc, one_doc = res.as_dict(), res.as_dict(single_cycle=True)
    assert all_doc["cycles"] == one_doc["cycles"]
    assert all_doc["ef"] == res.ef_all_cycles
    assert one_doc["ef"] == res.ef_first_cycle
    assert {k for k in all_doc if all_doc[k] != one_doc[k]} <= {"mode", "ef", "hfref"}


def test_raw_areas_option(video):
    res = run_pipeline(video, height_length, PipelineConfig(refine=False))
    assert len(res.cycles) == 3
    for c in res.cycles:
        assert c.ed_area == float(video.frames[c.cycle.ed_frame].sum())


def test_bad_cycles_are_flagged_not_fatal():
    # ES lengths predicted as zero for one cycle: that cycle is rejected, the rest survive
    video = pulsating_ellipse_video("z", [40.0, 40.0])
    feats = sequence_features(video.frames)
    res = compute_video_result("z", feats, height_length)
    bad_es = res.cycles[0].cycle.es_frame
    res2 = compute_video_result("z", feats, lambda f: 0.0 if f.frame_index == bad_es else height_length(f))
    assert len(res2.cycles) == len(res.cycles) - 1
    assert any("rejected" in msg for msg in res2.flags)


def test_missing_model(video):
    with pytest.raises(UntrainedModel):
        run_pipeline(video, None)


def test_peak_parameters_are_used(video):
    res = run_pipeline(video, height_length, PipelineConfig(peaks=PeakParams(min_distance=200)))
    assert len(res.cycles) == 1
