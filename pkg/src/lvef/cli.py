"""Command-line entry point: ``lvef <subcommand> ...``.

Exit codes: 0 success, 1 usage error, 2 data error, 3 no usable cardiac cycle.
"""
from __future__ import annotations

import argparse
import csv
import io
import json
import logging
import sys
from concurrent.futures import ProcessPoolExecutor
from pathlib import Path

import numpy as np

from ._io import atomic_write_text, dump_json
from .cycles import CardiacCycle, PeakParams
from .ensemble import EnsembleConfig, kfold_r2, load_model, save_model, train_voting_ensemble
from .errors import DegenerateTrace, LvefError, MissingColumn, NoCycles
from .geometry import (
    clip_polygon_to_frame,
    extract_features,
    polygon_from_trace,
    rasterize_polygon,
    read_features_csv,
    sequence_features,
    trace_length,
    write_features_csv,
)
from .ingest import MANIFEST_COLUMNS, Split, is_mask_dir, parse_manifest, parse_tracings, read_mask_sequence, write_pgm
from .pipeline import (
    AREA_LENGTH_CONSTANT,
    HFREF_THRESHOLD,
    PipelineConfig,
    VolumeConstant,
    compute_video_result,
    ef_from_labeled_frames,
    phenotype,
)
from .stats import evaluation_report
from .viz import emit_beat_to_beat_svg

log = logging.getLogger("lvef")

EXIT_OK, EXIT_USAGE, EXIT_DATA, EXIT_NO_CYCLES = 0, 1, 2, 3


class UsageError(Exception):
    pass


class _Parser(argparse.ArgumentParser):
    def error(self, message):
        raise UsageError(message)


def _csv_text(header, rows):
    buf = io.StringIO()
    out = csv.writer(buf, lineterminator="\n")
    out.writerow(header)
    out.writerows(rows)
    return buf.getvalue()


def _fmt(v):
    return "" if v is None else repr(float(v))


def _map(fn, items, jobs):
    """Order-preserving map, in worker processes when ``jobs > 1``."""
    if jobs > 1 and len(items) > 1:
        with ProcessPoolExecutor(max_workers=jobs) as pool:
            return list(pool.map(fn, items))
    return [fn(it) for it in items]


def _mask_dirs(root):
    root = Path(root)
    if not root.is_dir():
        raise FileNotFoundError(f"mask directory not found: {root}")
    if is_mask_dir(root):
        return [root], False
    subdirs = sorted(p for p in root.iterdir() if is_mask_dir(p))
    if not subdirs:
        raise LvefError(f"{root} holds no frame_NNNNN.pgm files and no video subdirectories")
    return subdirs, True


# --- ingest -----------------------------------------------------------------

def cmd_ingest(args):
    records = {r.file_name: r for r in parse_manifest(args.manifest)}
    traces = parse_tracings(args.tracings)
    out = Path(args.out)
    rows, ef_rows = [], []
    for vid in sorted(traces):
        rec = records.get(vid)
        if rec is None:
            log.warning("%s: tracings without a manifest row, skipped", vid)
            continue
        pairs = []
        for tf in traces[vid]:
            try:
                poly = clip_polygon_to_frame(polygon_from_trace(tf), rec.frame_width, rec.frame_height)
                mask = rasterize_polygon(poly, rec.frame_width, rec.frame_height)
            except DegenerateTrace as exc:
                log.warning("%s frame %d: %s, skipped", vid, tf.frame_index, exc)
                continue
            write_pgm(mask, out / "labeled" / vid / f"frame_{tf.frame_index:05d}.pgm")
            f = extract_features(mask, tf.frame_index)
            length = trace_length(tf)
            pairs.append((f.area, length))
            rows.append({"video_id": vid, "frame_index": tf.frame_index, "area": f.area, "width": f.width,
                         "height": f.height, "length": length, "split": rec.split.value})
        ef = None
        if len(pairs) >= 2:
            try:
                ef = ef_from_labeled_frames(pairs)
            except LvefError as exc:
                log.warning("%s: no tracing EF (%s)", vid, exc)
        ef_rows.append([vid, _fmt(ef), repr(rec.ef_label), rec.split.value])
    write_features_csv(out / "features.csv", rows)
    atomic_write_text(out / "tracing_ef.csv",
                      _csv_text(["video_id", "ef_tracing", "label_ef", "split"], ef_rows))
    print(f"{len(rows)} labeled frames from {len(ef_rows)} videos -> {out}")
    return EXIT_OK


# --- extract ----------------------------------------------------------------

def _extract_one(path):
    seq = read_mask_sequence(path)
    return [{"video_id": seq.video_id, "frame_index": f.frame_index, "area": f.area,
             "width": f.width, "height": f.height} for f in sequence_features(seq.frames)]


def cmd_extract(args):
    dirs, _ = _mask_dirs(args.masks)
    rows = [r for per_video in _map(_extract_one, dirs, args.jobs) for r in per_video]
    write_features_csv(args.out, rows)
    print(f"{len(rows)} frames from {len(dirs)} video(s) -> {args.out}")
    return EXIT_OK


# --- train-length -----------------------------------------------------------

def cmd_train_length(args):
    rows = [r for r in read_features_csv(args.features) if r["length"] is not None]
    if not rows:
        raise MissingColumn("length")
    if any(r["split"] is not None for r in rows):
        want = Split.parse(args.train_split).value
        rows = [r for r in rows if r["split"] is not None and r["split"].upper() == want]
    else:
        log.warning("features have no split column; training on every row")
    X = np.array([[r["area"], r["width"], r["height"]] for r in rows], dtype=np.float64)
    y = np.array([r["length"] for r in rows], dtype=np.float64)
    kwargs = {"k_folds": args.k, "seed": args.seed}
    if args.et_trees is not None:
        kwargs["et_trees"] = args.et_trees
    config = EnsembleConfig(**kwargs)
    scores, mean = kfold_r2(X, y, config)
    for i, s in enumerate(scores):
        print(f"fold {i}: R2 = {s:.4f}")
    print(f"mean R2 = {mean:.4f} (n = {y.size})")
    save_model(train_voting_ensemble(X, y, config), args.out)
    return EXIT_OK


# --- predict ----------------------------------------------------------------

def _pipeline_config(args):
    return PipelineConfig(
        peaks=PeakParams(min_distance=args.min_distance, prominence_fraction=args.prominence_fraction),
        jeffrey_fraction=args.jeffrey_fraction,
        volume_constant=VolumeConstant(args.volume_constant),
        refine=not args.raw_areas,
    )


def _predict_one(job):
    path, model, config, single = job
    seq = read_mask_sequence(path)
    feats = sequence_features(seq.frames)
    try:
        return seq.video_id, compute_video_result(seq.video_id, feats, model, config).as_dict(single), None
    except NoCycles as exc:
        return seq.video_id, None, str(exc)


def cmd_predict(args):
    dirs, batch = _mask_dirs(args.masks)
    model = load_model(args.model)
    config = _pipeline_config(args)
    results = _map(_predict_one, [(d, model, config, args.single_cycle) for d in dirs], args.jobs)
    if not batch:
        vid, doc, err = results[0]
        if doc is None:
            raise NoCycles(err)
        dump_json(doc, args.out)
        print(f"{vid}: EF {doc['ef']:.2f}% ({doc['mode']}), {phenotype(doc['ef'])}")
        return EXIT_OK
    out = Path(args.out)
    table = []
    for vid, doc, err in results:
        if doc is None:
            log.warning("%s: %s", vid, err)
            table.append([vid, "", "", 0, "no_cycles"])
            continue
        dump_json(doc, out / f"{vid}.json")
        table.append([vid, _fmt(doc["ef"]), int(doc["hfref"]), len(doc["cycles"]), "ok"])
    atomic_write_text(out / "predictions.csv", _csv_text(["video_id", "ef", "hfref", "n_cycles", "status"], table))
    n_ok = sum(1 for _, doc, _ in results if doc is not None)
    print(f"{n_ok}/{len(results)} videos with an EF -> {out}")
    return EXIT_OK if n_ok else EXIT_NO_CYCLES


# --- evaluate ---------------------------------------------------------------

def _read_table(path):
    with open(path, newline="", encoding="utf-8-sig") as fh:
        reader = csv.DictReader(fh)
        return list(reader.fieldnames or []), list(reader)


def _read_predictions(path):
    if str(path).endswith(".json"):
        with open(path, encoding="utf-8") as fh:
            doc = json.load(fh)
        return {doc["video_id"]: float(doc["ef"])}
    cols, rows = _read_table(path)
    for c in ("video_id", "ef"):
        if c not in cols:
            raise MissingColumn(c)
    return {r["video_id"]: float(r["ef"]) for r in rows if r["ef"].strip()}


def _read_labels(path):
    cols, rows = _read_table(path)
    if all(c in cols for c in MANIFEST_COLUMNS):
        return {r.file_name: r.ef_label for r in parse_manifest(path)}
    for c in ("video_id", "label_ef"):
        if c not in cols:
            raise MissingColumn(c)
    return {r["video_id"]: float(r["label_ef"]) for r in rows}


def cmd_evaluate(args):
    preds = _read_predictions(args.predictions)
    labels = _read_labels(args.labels)
    ids = sorted(v for v in preds if v in labels)
    missing = len(preds) - len(ids)
    if missing:
        log.warning("%d predicted videos have no label and were left out", missing)
    if not ids:
        raise LvefError("no predicted video has a label")
    report = evaluation_report([preds[v] for v in ids], [labels[v] for v in ids],
                               threshold=args.threshold, n_resamples=args.bootstrap, seed=args.seed)
    report["bootstrap"] = {"resamples": args.bootstrap, "seed": args.seed}
    dump_json(report, args.out)
    p, a = report["pearson"], report["auc"]
    print(f"n = {report['n']}  r = {p['r'] if p else float('nan'):.4f}  "
          f"AUC = {a['value'] if a else float('nan'):.4f}  accuracy = {report['confusion']['accuracy']:.4f}")
    return EXIT_OK


# --- visualize --------------------------------------------------------------

def _read_areas(path, video_id):
    cols, rows = _read_table(path)
    for c in ("frame_index", "area"):
        if c not in cols:
            raise MissingColumn(c)
    if "video_id" in cols:
        rows = [r for r in rows if r["video_id"] == video_id]
    if not rows:
        raise LvefError(f"no areas for {video_id} in {path}")
    pairs = sorted((int(r["frame_index"]), float(r["area"])) for r in rows)
    if [i for i, _ in pairs] != list(range(len(pairs))):
        raise LvefError(f"area frames for {video_id} are not 0..{len(pairs) - 1}")
    return np.array([a for _, a in pairs])


def cmd_visualize(args):
    with open(args.result, encoding="utf-8") as fh:
        doc = json.load(fh)
    areas = _read_areas(args.areas, doc["video_id"])
    cycles = [CardiacCycle(c["ed_frame"], c["es_frame"]) for c in doc["cycles"]]
    if any(c.ed_frame >= areas.size or c.es_frame >= areas.size for c in cycles):
        raise LvefError("result cycles reference frames beyond the area series")
    ef = doc.get("ef", doc["ef_all_cycles"])
    emit_beat_to_beat_svg(areas, cycles, [c["ef"] for c in doc["cycles"]], ef, phenotype(ef), args.out,
                          title=doc["video_id"])
    return EXIT_OK


# --- parser -----------------------------------------------------------------

def _positive_int(text):
    v = int(text)
    if v < 1:
        raise argparse.ArgumentTypeError("must be >= 1")
    return v


def _fraction(text):
    v = float(text)
    if not 0.0 < v <= 1.0:
        raise argparse.ArgumentTypeError("must lie in (0, 1]")
    return v


def _positive_float(text):
    v = float(text)
    if not v > 0:
        raise argparse.ArgumentTypeError("must be positive")
    return v


def build_parser():
    parser = _Parser(prog="lvef", description="LV ejection fraction from segmentation masks.")
    parser.add_argument("-v", "--verbose", action="store_true")
    sub = parser.add_subparsers(dest="command", required=True, parser_class=_Parser)

    p = sub.add_parser("ingest", help="rasterize expert tracings into masks and a features CSV")
    p.add_argument("--manifest", required=True)
    p.add_argument("--tracings", required=True)
    p.add_argument("--out", required=True)
    p.set_defaults(func=cmd_ingest)

    p = sub.add_parser("extract", help="per-frame area/width/height from a mask directory")
    p.add_argument("--masks", required=True)
    p.add_argument("--out", required=True)
    p.add_argument("--jobs", type=_positive_int, default=1)
    p.set_defaults(func=cmd_extract)

    p = sub.add_parser("train-length", help="train the LV length voting ensemble")
    p.add_argument("--features", required=True)
    p.add_argument("--train-split", default="train", choices=["train", "val", "test"])
    p.add_argument("--k", type=_positive_int, default=5)
    p.add_argument("--seed", type=int, default=42)
    p.add_argument("--et-trees", type=_positive_int, default=None, help="extra-trees size (default 100)")
    p.add_argument("--out", required=True)
    p.set_defaults(func=cmd_train_length)

    p = sub.add_parser("predict", help="EF for one mask video, or every video under a directory")
    p.add_argument("--masks", required=True)
    p.add_argument("--model", required=True)
    p.add_argument("--out", required=True, help="result JSON (single video) or output directory (batch)")
    p.add_argument("--jeffrey-fraction", type=_fraction, default=0.10)
    p.add_argument("--min-distance", type=_positive_int, default=20)
    p.add_argument("--prominence-fraction", type=float, default=0.5)
    p.add_argument("--volume-constant", type=_positive_float, default=AREA_LENGTH_CONSTANT)
    p.add_argument("--single-cycle", action="store_true", help="report the first cycle's EF")
    p.add_argument("--raw-areas", action="store_true", help="skip area refinement at ED/ES")
    p.add_argument("--jobs", type=_positive_int, default=1)
    p.set_defaults(func=cmd_predict)

    p = sub.add_parser("evaluate", help="agreement and HFrEF classification statistics")
    p.add_argument("--predictions", required=True)
    p.add_argument("--labels", required=True)
    p.add_argument("--bootstrap", type=_positive_int, default=100)
    p.add_argument("--seed", type=int, default=42)
    p.add_argument("--threshold", type=float, default=HFREF_THRESHOLD)
    p.add_argument("--out", required=True)
    p.set_defaults(func=cmd_evaluate)

    p = sub.add_parser("visualize", help="beat-to-beat SVG of the area curve")
    p.add_argument("--result", required=True)
    p.add_argument("--areas", required=True, help="features CSV (or frame_index,area CSV)")
    p.add_argument("--out", required=True)
    p.set_defaults(func=cmd_visualize)
    return parser


def main(argv=None):
    try:
        args = build_parser().parse_args(argv)
    except UsageError as exc:
        print(f"lvef: usage error: {exc}", file=sys.stderr)
        return EXIT_USAGE
    logging.basicConfig(level=logging.INFO if args.verbose else logging.WARNING,
                        format="%(levelname)s: %(message)s")
    try:
        return args.func(args)
    except NoCycles as exc:
        print(f"lvef: {exc}", file=sys.stderr)
        return EXIT_NO_CYCLES
    except (LvefError, OSError, ValueError, KeyError) as exc:
        print(f"lvef: {type(exc).__name__}: {exc}", file=sys.stderr)
        return EXIT_DATA


if __name__ == "__main__":
    sys.exit(main())
