import csv
import json
import math
import os
from pathlib import Path

import numpy as np
import pytest

from lvef.cli import main
from lvef.ingest import MaskSequence, write_mask_sequence
from lvef.synthetic import ellipse_trace, pulsating_ellipse_video, scale_waveform

GOLDEN = Path(__file__).parent / "golden" / "e2e_report.json"
W, H, A0, B0 = 112, 128, 48.0, 24.0
VIDEOS = {  # video id -> (EF, split)
    "SYN01": (25.0, "TRAIN"), "SYN02": (35.0, "TRAIN"), "SYN03": (45.0, "TRAIN"), "SYN04": (60.0, "TRAIN"),
    "SYN05": (30.0, "TEST"), "SYN06": (38.0, "TEST"), "SYN07": (52.0, "TEST"), "SYN08": (66.0, "TEST"),
}


def build_dataset(root):
    """Mask videos, a manifest and expert-style tracings for every few frames."""
    root = Path(root)
    manifest = ["FileName,EF,ESV,EDV,FrameHeight,FrameWidth,FPS,NumberOfFrames,Split"]
    traces = ["FileName,X1,Y1,X2,Y2,Frame"]
    for vid, (ef, split) in VIDEOS.items():
        video = pulsating_ellipse_video(vid, [ef] * 3, a0=A0, b0=B0, width=W, height=H)
        write_mask_sequence(video, root / "masks" / vid)
        edv = 8 / (3 * math.pi) * (math.pi * A0 * B0) ** 2 / (2 * A0)
        esv = edv * (1 - ef / 100)
        manifest.append(f"{vid},{ef},{esv:.4f},{edv:.4f},{H},{W},50,{len(video)},{split}")
        for i, s in enumerate(scale_waveform([ef] * 3)):
            if i % 3:
                continue
            tf = ellipse_trace(vid, i, A0 * s, B0 * s, W / 2, H / 2)
            for (x1, y1), (x2, y2) in tf.segments:
                traces.append(f"{vid}.avi,{x1:.4f},{y1:.4f},{x2:.4f},{y2:.4f},{i}")
    (root / "FileList.csv").write_text("\n".join(manifest) + "\n")
    (root / "VolumeTracings.csv").write_text("\n".join(traces) + "\n")
    return root


@pytest.fixture(scope="module")
def dataset(tmp_path_factory):
    root = build_dataset(tmp_path_factory.mktemp("data"))
    assert main(["ingest", "--manifest", str(root / "FileList.csv"), "--tracings", str(root / "VolumeTracings.csv"),
                 "--out", str(root / "ingested")]) == 0
    assert main(["train-length", "--features", str(root / "ingested" / "features.csv"), "--train-split", "train",
                 "--et-trees", "20", "--out", str(root / "model.json")]) == 0
    return root


def _read_csv(path):
    with open(path, newline="") as fh:
        return list(csv.DictReader(fh))


def test_usage_errors(capsys):
    assert main([]) == 1
    assert main(["frobnicate"]) == 1
    assert main(["predict", "--masks", "x", "--model", "m", "--out", "o", "--jeffrey-fraction", "2"]) == 1
    assert main(["evaluate", "--predictions", "p"]) == 1
    assert "usage error" in capsys.readouterr().err


def test_help_exits_cleanly():
    with pytest.raises(SystemExit) as exc:
        main(["--help"])
    assert exc.value.code == 0


def test_data_errors(tmp_path, dataset):
    assert main(["predict", "--masks", str(tmp_path / "nope"), "--model", str(dataset / "model.json"),
                 "--out", str(tmp_path / "r.json")]) == 2
    (tmp_path / "bad.json").write_text("{not json")
    assert main(["predict", "--masks", str(dataset / "masks" / "SYN01"), "--model", str(tmp_path / "bad.json"),
                 "--out", str(tmp_path / "r.json")]) == 2
    (tmp_path / "m.csv").write_text("FileName,EF\nx,abc\n")
    assert main(["ingest", "--manifest", str(tmp_path / "m.csv"), "--tracings", str(tmp_path / "m.csv"),
                 "--out", str(tmp_path / "o")]) == 2


def test_identical_frames_exit_3(tmp_path, dataset):
    frames = np.zeros((50, H, W), bool)
    frames[:, 30:90, 40:70] = True
    write_mask_sequence(MaskSequence("flat", frames), tmp_path / "flat")
    assert main(["predict", "--masks", str(tmp_path / "flat"), "--model", str(dataset / "model.json"),
                 "--out", str(tmp_path / "r.json")]) == 3
    assert not (tmp_path / "r.json").exists()


def test_ingest_outputs(dataset):
    rows = _read_csv(dataset / "ingested" / "features.csv")
    assert {r["split"] for r in rows} == {"TRAIN", "TEST"}
    assert all(float(r["length"]) > 0 for r in rows)
    labeled = sorted((dataset / "ingested" / "labeled" / "SYN01").iterdir())
    assert labeled[0].name == "frame_00000.pgm"
    ef_rows = {r["video_id"]: r for r in _read_csv(dataset / "ingested" / "tracing_ef.csv")}
    for vid, (ef, _) in VIDEOS.items():
        assert float(ef_rows[vid]["ef_tracing"]) == pytest.approx(ef, abs=3.0)


def test_extract_batch_and_single(tmp_path, dataset):
    assert main(["extract", "--masks", str(dataset / "masks"), "--out", str(tmp_path / "all.csv"),
                 "--jobs", "2"]) == 0
    rows = _read_csv(tmp_path / "all.csv")
    assert {r["video_id"] for r in rows} == set(VIDEOS)
    assert main(["extract", "--masks", str(dataset / "masks" / "SYN02"), "--out", str(tmp_path / "one.csv")]) == 0
    one = _read_csv(tmp_path / "one.csv")
    assert one == [r for r in rows if r["video_id"] == "SYN02"]


def test_predict_single_video_modes(tmp_path, dataset):
    args = ["predict", "--masks", str(dataset / "masks" / "SYN03"), "--model", str(dataset / "model.json")]
    assert main(args + ["--out", str(tmp_path / "all.json")]) == 0
    assert main(args + ["--out", str(tmp_path / "one.json"), "--single-cycle"]) == 0
    a = json.loads((tmp_path / "all.json").read_text())
    b = json.loads((tmp_path / "one.json").read_text())
    assert a["cycles"] == b["cycles"]
    assert a["ef"] == a["ef_all_cycles"] and b["ef"] == b["ef_first_cycle"]
    assert a["ef"] == pytest.approx(45.0, abs=2.0)


def test_predict_flags_change_result(tmp_path, dataset):
    base = ["predict", "--masks", str(dataset / "masks" / "SYN03"), "--model", str(dataset / "model.json")]
    assert main(base + ["--out", str(tmp_path / "a.json")]) == 0
    assert main(base + ["--out", str(tmp_path / "b.json"), "--volume-constant", str(8 * math.pi / 3)]) == 0
    a = json.loads((tmp_path / "a.json").read_text())
    b = json.loads((tmp_path / "b.json").read_text())
    assert a["ef"] == b["ef"]
    assert b["cycles"][0]["edv"] == pytest.approx(a["cycles"][0]["edv"] * math.pi ** 2, rel=1e-12)
    assert main(base + ["--out", str(tmp_path / "c.json"), "--min-distance", "200"]) == 0
    assert len(json.loads((tmp_path / "c.json").read_text())["cycles"]) == 1


def test_batch_predict_is_deterministic_across_jobs(tmp_path, dataset):
    outs = []
    for jobs in ("1", "3"):
        out = tmp_path / f"j{jobs}"
        assert main(["predict", "--masks", str(dataset / "masks"), "--model", str(dataset / "model.json"),
                     "--out", str(out), "--jobs", jobs]) == 0
        outs.append({p.name: p.read_bytes() for p in sorted(out.iterdir())})
    assert outs[0] == outs[1]
    assert set(outs[0]) == {f"{v}.json" for v in VIDEOS} | {"predictions.csv"}


def test_evaluate_perfect_predictions(tmp_path):
    ids = [f"v{i}" for i in range(12)]
    efs = np.linspace(20, 70, 12)
    text = "video_id,ef\n" + "".join(f"{v},{float(e)!r}\n" for v, e in zip(ids, efs))
    (tmp_path / "pred.csv").write_text(text)
    (tmp_path / "labels.csv").write_text(text.replace("video_id,ef", "video_id,label_ef"))
    assert main(["evaluate", "--predictions", str(tmp_path / "pred.csv"), "--labels", str(tmp_path / "labels.csv"),
                 "--out", str(tmp_path / "rep.json")]) == 0
    rep = json.loads((tmp_path / "rep.json").read_text())
    assert rep["pearson"]["r"] == 1.0
    assert rep["auc"]["value"] == 1.0


def test_visualize(tmp_path, dataset):
    assert main(["predict", "--masks", str(dataset / "masks" / "SYN04"), "--model", str(dataset / "model.json"),
                 "--out", str(tmp_path / "r.json")]) == 0
    assert main(["extract", "--masks", str(dataset / "masks" / "SYN04"), "--out", str(tmp_path / "f.csv")]) == 0
    for name in ("a.svg", "b.svg"):
        assert main(["visualize", "--result", str(tmp_path / "r.json"), "--areas", str(tmp_path / "f.csv"),
                     "--out", str(tmp_path / name)]) == 0
    svg = (tmp_path / "a.svg").read_text()
    assert svg.count('class="ed"') == 3 and "HFpEF" in svg
    assert (tmp_path / "a.svg").read_bytes() == (tmp_path / "b.svg").read_bytes()


def _close(a, b, path="report"):
    if isinstance(a, dict):
        assert set(a) == set(b), path
        for k in a:
            _close(a[k], b[k], f"{path}.{k}")
    elif isinstance(a, list):
        assert len(a) == len(b), path
        for i, (x, y) in enumerate(zip(a, b)):
            _close(x, y, f"{path}[{i}]")
    elif isinstance(a, float):
        assert a == pytest.approx(b, rel=1e-9, abs=1e-12), path
    else:
        assert a == b, path


def test_end_to_end_matches_golden(tmp_path, dataset):
    assert main(["predict", "--masks", str(dataset / "masks"), "--model", str(dataset / "model.json"),
                 "--out", str(tmp_path / "pred")]) == 0
    assert main(["evaluate", "--predictions", str(tmp_path / "pred" / "predictions.csv"),
                 "--labels", str(dataset / "FileList.csv"), "--out", str(tmp_path / "report.json")]) == 0
    report = json.loads((tmp_path / "report.json").read_text())
    if os.environ.get("LVEF_REGENERATE_GOLDEN") == "1":
        GOLDEN.write_text((tmp_path / "report.json").read_text())
    _close(report, json.loads(GOLDEN.read_text()))
    assert report["n"] == len(VIDEOS)
    assert report["pearson"]["r"] > 0.99
