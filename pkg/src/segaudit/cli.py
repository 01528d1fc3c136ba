"""Command-line entry point: score, inject, evaluate, overlay.

Exit codes: 0 success, 2 validation problem, 3 I/O failure, 4 infeasible
corruption plan.
"""

from __future__ import annotations

import argparse
import json
import shutil
import sys
from concurrent.futures import ThreadPoolExecutor
from pathlib import Path

import numpy as np

from . import confident, components, inject, io, metrics, pixels, scores
from .errors import (
    InfeasiblePlanError,
    IoError,
    JoinError,
    SegAuditError,
    ShapeError,
    ValidationError,
)

EXIT_OK = 0
EXIT_VALIDATION = 2
EXIT_IO = 3
EXIT_INFEASIBLE = 4


def _parse_methods(raw: str) -> tuple[str, ...]:
    if raw.strip().lower() == "all":
        return io.METHODS
    chosen = tuple(m.strip().lower() for m in raw.split(",") if m.strip())
    if not chosen:
        raise ValidationError("no methods selected")
    unknown = [m for m in chosen if m not in io.METHODS]
    if unknown:
        raise ValidationError(
            f"unknown methods {unknown}; valid: {', '.join(io.METHODS)}"
        )
    return chosen


def _parse_thresholds(raw: str) -> tuple[float, ...]:
    try:
        values = tuple(float(tok) for tok in raw.split(",") if tok.strip())
    except ValueError as exc:
        raise ValidationError(f"bad threshold list {raw!r}: {exc}") from exc
    return scores.check_tccp_thresholds(values)


def _load_pair(manifest: io.DatasetManifest, entry: io.ManifestEntry):
    expected = (entry.height, entry.width, manifest.num_classes)
    probs = io.read_tensor(manifest.resolve(entry.prob_path), expected)
    labels = io.read_mask(manifest.resolve(entry.label_path), manifest.num_classes)
    if labels.shape != (entry.height, entry.width):
        raise ShapeError(
            f"mask shape {labels.shape} does not match manifest "
            f"({entry.height}, {entry.width})"
        )
    return probs, labels


def _with_image_context(fn, entry, *args):
    try:
        return fn(entry, *args)
    except SegAuditError as exc:
        raise type(exc)(f"image {entry.image_id!r}: {exc}") from exc
    except OSError as exc:
        raise IoError(f"image {entry.image_id!r}: {exc}") from exc


def _map_entries(entries, fn, workers: int):
    """Run fn over manifest entries on a worker pool; results keyed by image
    id so downstream consumers impose a canonical order."""
    if workers <= 1:
        return {e.image_id: _with_image_context(fn, e) for e in entries}
    results = {}
    with ThreadPoolExecutor(max_workers=workers) as pool:
        futures = {e.image_id: pool.submit(_with_image_context, fn, e) for e in entries}
        for image_id, future in futures.items():
            results[image_id] = future.result()
    return results


def _pooled_thresholds(manifest, factor, workers):
    def partials(entry):
        probs, labels = _load_pair(manifest, entry)
        pooled_p, pooled_l = confident.downsample(probs, labels, factor)
        return confident.threshold_partials(pooled_p, pooled_l, manifest.num_classes)

    by_image = _map_entries(manifest.entries, partials, workers)
    sums = np.zeros(manifest.num_classes)
    counts = np.zeros(manifest.num_classes, dtype=np.int64)
    for entry in manifest.entries:  # manifest order: thread-count independent
        s, c = by_image[entry.image_id]
        sums += s
        counts += c
    defined = counts > 0
    values = np.divide(sums, counts, out=np.zeros_like(sums), where=defined)
    return confident.ClassThresholds(values=values, defined=defined)


def cmd_score(args) -> int:
    manifest = io.read_manifest(args.manifest)
    methods = _parse_methods(args.methods)
    thresholds = _parse_thresholds(args.tccp_thresholds)
    if args.tau <= 0:
        raise ValidationError(f"--tau must be positive, got {args.tau}")
    if args.downsample_factor < 1:
        raise ValidationError("--downsample-factor must be >= 1")
    if not manifest.entries:
        raise ValidationError("manifest has no entries")

    overlay_dir = None
    if args.overlay_threshold is not None:
        if not 0.0 <= args.overlay_threshold <= 1.0:
            raise ValidationError("--overlay-threshold must be in [0, 1]")
        overlay_dir = Path(args.overlay_dir or Path(args.output).parent / "overlays")
        overlay_dir.mkdir(parents=True, exist_ok=True)

    needs_pooling = bool({"clc", "coco"} & set(methods)) or overlay_dir is not None
    class_thresholds = None
    if "clc" in methods or overlay_dir is not None:
        class_thresholds = _pooled_thresholds(
            manifest, args.downsample_factor, args.workers
        )

    def score_one(entry):
        probs, labels = _load_pair(manifest, entry)
        result: dict[str, float] = {}
        pred = None
        if {"ccp", "iou"} & set(methods):
            pred = pixels.predicted_mask(probs)
        if "ccp" in methods:
            result["ccp"] = scores.ccp(pred, labels)
        if "iou" in methods:
            result["iou"] = scores.iou(pred, labels)
        if "tccp" in methods:
            result["tccp"] = scores.tccp(probs, labels, thresholds, args.tccp_mode)
        score_map = None
        if {"cil", "softmin"} & set(methods) or overlay_dir is not None:
            score_map = pixels.self_confidence(probs, labels)
        if "cil" in methods:
            result["cil"] = scores.cil(score_map)
        if "softmin" in methods:
            result["softmin"] = scores.softmin(score_map, args.tau)
        marked = None
        if needs_pooling:
            pooled_p, pooled_l = confident.downsample(
                probs, labels, args.downsample_factor
            )
            if "coco" in methods:
                result["coco"] = components.coco_score(
                    pooled_p, pixels.predicted_mask(pooled_p), pooled_l
                )
            if class_thresholds is not None:
                flags = confident.flag_mask(pooled_p, pooled_l, class_thresholds)
                if "clc" in methods:
                    result["clc"] = confident.clc_score(flags)
                if overlay_dir is not None:
                    full = np.repeat(
                        np.repeat(flags, args.downsample_factor, axis=0),
                        args.downsample_factor,
                        axis=1,
                    )[: labels.shape[0], : labels.shape[1]]
                    marked = io.emit_overlay(
                        entry.image_id,
                        score_map,
                        full,
                        args.overlay_threshold,
                        overlay_dir / f"{entry.image_id}.png",
                    )
        return result, marked

    outcomes = _map_entries(manifest.entries, score_one, args.workers)
    per_method: dict[str, dict[str, float]] = {m: {} for m in methods}
    for entry in manifest.entries:
        result, marked = outcomes[entry.image_id]
        for method, value in result.items():
            per_method[method][entry.image_id] = value
        if marked is not None:
            print(
                f"overlay {marked['image_id']}: "
                f"{marked['marked_pixels']}/{marked['total_pixels']} pixels"
            )
    records = io.rank_records(per_method)
    io.write_report(records, args.output, args.format)
    print(f"wrote {len(records)} records to {args.output}")
    return EXIT_OK


def cmd_inject(args) -> int:
    manifest = io.read_manifest(args.manifest)
    if not manifest.entries:
        raise ValidationError("manifest has no entries")
    plan = inject.CorruptionPlan(
        error_type=args.type,
        proportion=args.proportion,
        seed=args.seed,
        shift_radius_range=(args.shift_radius_min, args.shift_radius_max),
    )
    out_dir = Path(args.output_dir)
    masks_dir = out_dir / "masks"
    masks_dir.mkdir(parents=True, exist_ok=True)

    by_id = {e.image_id: e for e in manifest.entries}

    def load(image_id: str) -> np.ndarray:
        entry = by_id[image_id]
        return io.read_mask(manifest.resolve(entry.label_path), manifest.num_classes)

    ids = [e.image_id for e in manifest.entries]
    corrupted, logs = inject.corrupt_dataset(ids, load, plan, manifest.unlabeled_class)

    new_entries = []
    for entry in manifest.entries:
        target = masks_dir / f"{entry.image_id}.png"
        if entry.image_id in corrupted:
            io.write_mask(corrupted[entry.image_id], target)
        else:
            shutil.copyfile(manifest.resolve(entry.label_path), target)
        new_entries.append(
            io.ManifestEntry(
                image_id=entry.image_id,
                # tensors are not copied (they typically do not exist yet when
                # errors are injected), so anchor their paths absolutely
                prob_path=str(manifest.resolve(entry.prob_path)),
                label_path=f"masks/{entry.image_id}.png",
                height=entry.height,
                width=entry.width,
            )
        )
    io.write_error_log(
        inject.log_header(plan, len(ids)), logs, out_dir / "errors.jsonl"
    )
    new_manifest = io.DatasetManifest(
        num_classes=manifest.num_classes,
        unlabeled_class=manifest.unlabeled_class,
        entries=new_entries,
        base_dir=out_dir,
    )
    # Manifest is written last: its presence marks a complete output tree.
    io.write_manifest(new_manifest, out_dir / "manifest.json")
    print(f"corrupted {len(corrupted)}/{len(ids)} images into {out_dir}")
    return EXIT_OK


def cmd_evaluate(args) -> int:
    records = io.read_report(args.report)
    if not records:
        raise ValidationError("report holds no records")
    _, logs = io.read_error_log(args.error_log)
    truth = {log.image_id: log.error_type != "none" for log in logs}

    report_ids = {r.image_id for r in records}
    missing = sorted(report_ids - truth.keys())
    if missing:
        raise JoinError(f"images absent from the error log: {missing}")

    by_method: dict[str, list[metrics.LabeledScore]] = {}
    for r in records:
        by_method.setdefault(r.method, []).append(
            metrics.LabeledScore(r.image_id, r.score, truth[r.image_id])
        )
    table = {
        method: metrics.summarize(items, fixed_t=args.top_t)
        for method, items in sorted(by_method.items())
    }
    io.atomic_write_text(args.output, json.dumps(table, indent=2) + "\n")

    columns = list(next(iter(table.values())).keys())
    width = max(len(m) for m in table) + 2
    print("method".ljust(width) + "  ".join(c.rjust(16) for c in columns))
    for method, row in table.items():
        cells = "  ".join(f"{row[c]:16.6f}" for c in columns)
        print(method.ljust(width) + cells)
    return EXIT_OK


def cmd_overlay(args) -> int:
    manifest = io.read_manifest(args.manifest)
    if not manifest.entries:
        raise ValidationError("manifest has no entries")
    if not 0.0 <= args.threshold <= 1.0:
        raise ValidationError("--threshold must be in [0, 1]")
    out_dir = Path(args.output_dir)
    out_dir.mkdir(parents=True, exist_ok=True)
    class_thresholds = _pooled_thresholds(
        manifest, args.downsample_factor, args.workers
    )

    def one(entry):
        probs, labels = _load_pair(manifest, entry)
        score_map = pixels.self_confidence(probs, labels)
        pooled_p, pooled_l = confident.downsample(probs, labels, args.downsample_factor)
        flags = confident.flag_mask(pooled_p, pooled_l, class_thresholds)
        full = np.repeat(
            np.repeat(flags, args.downsample_factor, axis=0),
            args.downsample_factor,
            axis=1,
        )[: labels.shape[0], : labels.shape[1]]
        return io.emit_overlay(
            entry.image_id, score_map, full, args.threshold,
            out_dir / f"{entry.image_id}.png",
        )

    outcomes = _map_entries(manifest.entries, one, args.workers)
    for entry in manifest.entries:
        info = outcomes[entry.image_id]
        print(
            f"{info['image_id']}: {info['marked_pixels']}/{info['total_pixels']} "
            f"pixels marked"
        )
    return EXIT_OK


def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(
        prog="segaudit",
        description="Score segmentation label quality, inject benchmark "
        "errors, and evaluate detection.",
    )
    sub = parser.add_subparsers(dest="command", required=True)

    p = sub.add_parser("score", help="score every image in a manifest")
    p.add_argument("--manifest", required=True)
    p.add_argument("--output", required=True)
    p.add_argument("--format", choices=("csv", "json"), default="csv")
    p.add_argument("--methods", default="all",
                   help="comma list from: " + ",".join(io.METHODS))
    p.add_argument("--tau", type=float, default=scores.DEFAULT_SOFTMIN_TAU)
    p.add_argument("--tccp-thresholds",
                   default=",".join(str(t) for t in scores.DEFAULT_TCCP_THRESHOLDS))
    p.add_argument("--tccp-mode", choices=("agreement", "literal"),
                   default="agreement")
    p.add_argument("--downsample-factor", type=int, default=4)
    p.add_argument("--workers", type=int, default=1)
    p.add_argument("--overlay-threshold", type=float, default=None)
    p.add_argument("--overlay-dir", default=None)
    p.set_defaults(func=cmd_score)

    p = sub.add_parser("inject", help="corrupt a dataset with one error type")
    p.add_argument("--manifest", required=True)
    p.add_argument("--type", required=True, choices=inject.ERROR_TYPES)
    p.add_argument("--proportion", type=float, required=True)
    p.add_argument("--seed", type=int, required=True)
    p.add_argument("--output-dir", required=True)
    p.add_argument("--shift-radius-min", type=int, default=3)
    p.add_argument("--shift-radius-max", type=int, default=25)
    p.set_defaults(func=cmd_inject)

    p = sub.add_parser("evaluate", help="precision/recall metrics per method")
    p.add_argument("--report", required=True)
    p.add_argument("--error-log", required=True)
    p.add_argument("--output", required=True)
    p.add_argument("--top-t", type=int, default=100)
    p.set_defaults(func=cmd_evaluate)

    p = sub.add_parser("overlay", help="write suspicious-pixel masks")
    p.add_argument("--manifest", required=True)
    p.add_argument("--threshold", type=float, required=True)
    p.add_argument("--output-dir", required=True)
    p.add_argument("--downsample-factor", type=int, default=4)
    p.add_argument("--workers", type=int, default=1)
    p.set_defaults(func=cmd_overlay)
    return parser


def main(argv=None) -> int:
    parser = build_parser()
    args = parser.parse_args(argv)
    try:
        return args.func(args)
    except InfeasiblePlanError as exc:
        print(f"error: {exc}", file=sys.stderr)
        return EXIT_INFEASIBLE
    except IoError as exc:
        print(f"error: {exc}", file=sys.stderr)
        return EXIT_IO
    except OSError as exc:
        print(f"error: {exc}", file=sys.stderr)
        return EXIT_IO
    except SegAuditError as exc:
        print(f"error: {exc}", file=sys.stderr)
        return EXIT_VALIDATION


if __name__ == "__main__":
    sys.exit(main())
