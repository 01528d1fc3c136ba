"""Disk formats: probability tensors, label masks, manifests, reports, logs.

This is the only module that touches the filesystem.  Tensors use the
version-1.0 ``.npy`` container (little-endian float32, C order, shape
h x w x K); masks are 8-bit grayscale PNG; manifests and evaluation output
are JSON; score reports are CSV or JSON; error logs are JSON lines with a
header record.
"""

from __future__ import annotations

import csv
import io as _stdio
import json
import os
from dataclasses import dataclass, field
from pathlib import Path

import numpy as np
from numpy.lib import format as npy_format
from PIL import Image, UnidentifiedImageError

from .errors import FormatError, IoError, ShapeError, ValidationError
from .inject import ErrorLog

METHODS = ("ccp", "tccp", "cil", "softmin", "clc", "iou", "coco")

_NPY_MAGIC = b"\x93NUMPY"
_TENSOR_DTYPE = np.dtype("<f4")
_SUM_TOLERANCE = 1e-3


@dataclass
class ManifestEntry:
    image_id: str
    prob_path: str
    label_path: str
    height: int
    width: int


@dataclass
class DatasetManifest:
    num_classes: int
    unlabeled_class: int
    entries: list[ManifestEntry]
    base_dir: Path = Path(".")
    metadata: dict = field(default_factory=dict)

    def __post_init__(self):
        if self.num_classes < 2:
            raise ValidationError(f"need at least 2 classes, got {self.num_classes}")
        if not 0 <= self.unlabeled_class < self.num_classes:
            raise ValidationError(
                f"unlabeled class {self.unlabeled_class} outside "
                f"[0, {self.num_classes})"
            )
        ids = [e.image_id for e in self.entries]
        if len(set(ids)) != len(ids):
            raise ValidationError("image ids must be unique")

    def resolve(self, path: str) -> Path:
        p = Path(path)
        return p if p.is_absolute() else self.base_dir / p


@dataclass
class ScoreRecord:
    image_id: str
    method: str
    score: float
    rank: int


def read_tensor(path, expected_shape: tuple[int, int, int] | None = None) -> np.ndarray:
    """Load a probability tensor, validate it, and renormalize each pixel.

    The container header is authoritative for the shape; ``expected_shape``
    (from the manifest) is cross-checked when given.
    """
    try:
        fh = open(path, "rb")
    except OSError as exc:
        raise IoError(f"cannot open tensor {path}: {exc}") from exc
    with fh:
        magic = fh.read(len(_NPY_MAGIC))
        if magic != _NPY_MAGIC:
            raise FormatError(f"{path}: not a tensor container (bad magic)")
        fh.seek(0)
        try:
            version = npy_format.read_magic(fh)
            if version != (1, 0):
                raise FormatError(f"{path}: unsupported container version {version}")
            shape, fortran, dtype = npy_format.read_array_header_1_0(fh)
        except FormatError:
            raise
        except Exception as exc:
            raise FormatError(f"{path}: malformed container header: {exc}") from exc
        if fortran:
            raise FormatError(f"{path}: tensor must be C-contiguous")
        if dtype != _TENSOR_DTYPE:
            raise FormatError(f"{path}: tensor dtype must be <f4, got {dtype}")
        if len(shape) != 3:
            raise ShapeError(f"{path}: tensor must be h x w x K, got shape {shape}")
        if expected_shape is not None and tuple(shape) != tuple(expected_shape):
            raise ShapeError(
                f"{path}: tensor shape {tuple(shape)} does not match manifest "
                f"{tuple(expected_shape)}"
            )
        count = int(np.prod(shape))
        data = np.fromfile(fh, dtype=_TENSOR_DTYPE, count=count)
        if data.size != count:
            raise FormatError(f"{path}: truncated tensor payload")

    probs = data.reshape(shape).astype(np.float64)
    if not np.isfinite(probs).all():
        raise ValidationError(f"{path}: tensor holds non-finite values")
    if probs.min() < 0.0 or probs.max() > 1.0:
        raise ValidationError(f"{path}: probabilities outside [0, 1]")
    sums = probs.sum(axis=2)
    if np.abs(sums - 1.0).max() > _SUM_TOLERANCE:
        worst = float(np.abs(sums - 1.0).max())
        raise ValidationError(
            f"{path}: per-pixel sums off by up to {worst:.2e} (> {_SUM_TOLERANCE})"
        )
    probs /= sums[:, :, None]
    return probs


def write_tensor(probs: np.ndarray, path) -> None:
    """Store a probability tensor in the version-1.0 container as float32."""
    probs = np.asarray(probs)
    if probs.ndim != 3:
        raise ShapeError(f"tensor must be h x w x K, got shape {probs.shape}")
    data = np.ascontiguousarray(probs, dtype=_TENSOR_DTYPE)
    try:
        with open(path, "wb") as fh:
            npy_format.write_array(fh, data, version=(1, 0))
    except OSError as exc:
        raise IoError(f"cannot write tensor {path}: {exc}") from exc


def read_mask(path, num_classes: int) -> np.ndarray:
    """Load an 8-bit single-channel PNG mask of class indices."""
    try:
        img = Image.open(path)
        img.load()
    except UnidentifiedImageError as exc:
        raise FormatError(f"{path}: not a readable image: {exc}") from exc
    except OSError as exc:
        raise IoError(f"cannot open mask {path}: {exc}") from exc
    if img.mode not in ("L", "P"):
        raise FormatError(
            f"{path}: mask must be single-channel 8-bit, got mode {img.mode!r}"
        )
    mask = np.asarray(img, dtype=np.int64)
    if mask.max() >= num_classes:
        raise ValidationError(
            f"{path}: mask value {int(mask.max())} >= num_classes {num_classes}"
        )
    return mask


def write_mask(mask: np.ndarray, path) -> None:
    mask = np.asarray(mask)
    if mask.ndim != 2:
        raise ShapeError(f"mask must be 2-D, got shape {mask.shape}")
    if mask.min() < 0 or mask.max() > 255:
        raise ValidationError("mask values must fit 8 bits")
    try:
        Image.fromarray(mask.astype(np.uint8), mode="L").save(path, format="PNG")
    except OSError as exc:
        raise IoError(f"cannot write mask {path}: {exc}") from exc


def read_manifest(path) -> DatasetManifest:
    try:
        with open(path, "r", encoding="utf-8") as fh:
            raw = json.load(fh)
    except OSError as exc:
        raise IoError(f"cannot open manifest {path}: {exc}") from exc
    except json.JSONDecodeError as exc:
        raise FormatError(f"{path}: manifest is not valid JSON: {exc}") from exc
    try:
        entries = [
            ManifestEntry(
                image_id=str(e["image_id"]),
                prob_path=str(e["prob_path"]),
                label_path=str(e["label_path"]),
                height=int(e["height"]),
                width=int(e["width"]),
            )
            for e in raw["entries"]
        ]
        manifest = DatasetManifest(
            num_classes=int(raw["num_classes"]),
            unlabeled_class=int(raw.get("unlabeled_class", 0)),
            entries=entries,
            base_dir=Path(path).resolve().parent,
            metadata=dict(raw.get("metadata", {})),
        )
    except (KeyError, TypeError) as exc:
        raise FormatError(f"{path}: manifest missing field: {exc}") from exc
    return manifest


def write_manifest(manifest: DatasetManifest, path) -> None:
    doc = {
        "num_classes": manifest.num_classes,
        "unlabeled_class": manifest.unlabeled_class,
        "entries": [
            {
                "image_id": e.image_id,
                "prob_path": e.prob_path,
                "label_path": e.label_path,
                "height": e.height,
                "width": e.width,
            }
            for e in manifest.entries
        ],
    }
    if manifest.metadata:
        doc["metadata"] = manifest.metadata
    atomic_write_text(path, json.dumps(doc, indent=2) + "\n")


def rank_records(scores_by_method: dict[str, dict[str, float]]) -> list[ScoreRecord]:
    """Turn per-method score maps into ranked records (rank 1 = lowest score,
    ties broken by image id)."""
    records = []
    for method in sorted(scores_by_method):
        per_image = scores_by_method[method]
        ordered = sorted(per_image.items(), key=lambda kv: (kv[1], kv[0]))
        for rank, (image_id, score) in enumerate(ordered, start=1):
            records.append(ScoreRecord(image_id, method, float(score), rank))
    return records


def write_report(records: list[ScoreRecord], path, fmt: str = "csv") -> None:
    """Write score records sorted by (method, rank); output bytes are a pure
    function of the records."""
    if not records:
        raise ValidationError("refusing to write an empty report")
    if fmt not in ("csv", "json"):
        raise ValidationError(f"report format must be csv or json, got {fmt!r}")
    rows = sorted(records, key=lambda r: (r.method, r.rank))
    if fmt == "csv":
        buf = _stdio.StringIO()
        writer = csv.writer(buf, lineterminator="\n")
        writer.writerow(["image_id", "method", "score", "rank"])
        for r in rows:
            writer.writerow([r.image_id, r.method, repr(float(r.score)), r.rank])
        atomic_write_text(path, buf.getvalue())
    else:
        doc = [
            {
                "image_id": r.image_id,
                "method": r.method,
                "score": float(r.score),
                "rank": r.rank,
            }
            for r in rows
        ]
        atomic_write_text(path, json.dumps(doc, indent=2) + "\n")


def read_report(path) -> list[ScoreRecord]:
    try:
        with open(path, "r", encoding="utf-8", newline="") as fh:
            text = fh.read()
    except OSError as exc:
        raise IoError(f"cannot open report {path}: {exc}") from exc
    try:
        if str(path).endswith(".json") or text.lstrip().startswith("["):
            doc = json.loads(text)
            return [
                ScoreRecord(str(r["image_id"]), str(r["method"]),
                            float(r["score"]), int(r["rank"]))
                for r in doc
            ]
        reader = csv.DictReader(_stdio.StringIO(text))
        return [
            ScoreRecord(row["image_id"], row["method"],
                        float(row["score"]), int(row["rank"]))
            for row in reader
        ]
    except (KeyError, TypeError, ValueError, json.JSONDecodeError) as exc:
        raise FormatError(f"{path}: malformed report: {exc}") from exc


def write_error_log(header: dict, logs: list[ErrorLog], path) -> None:
    lines = [json.dumps(dict(header))]
    for log in logs:
        lines.append(
            json.dumps(
                {
                    "image_id": log.image_id,
                    "error_type": log.error_type,
                    "params": log.params,
                    "pixels_changed": log.pixels_changed,
                }
            )
        )
    atomic_write_text(path, "\n".join(lines) + "\n")


def read_error_log(path) -> tuple[dict, list[ErrorLog]]:
    try:
        with open(path, "r", encoding="utf-8") as fh:
            lines = [line for line in fh.read().splitlines() if line.strip()]
    except OSError as exc:
        raise IoError(f"cannot open error log {path}: {exc}") from exc
    if not lines:
        raise FormatError(f"{path}: empty error log")
    try:
        header = json.loads(lines[0])
        logs = []
        for line in lines[1:]:
            raw = json.loads(line)
            logs.append(
                ErrorLog(
                    image_id=str(raw["image_id"]),
                    error_type=str(raw["error_type"]),
                    params=dict(raw.get("params", {})),
                    pixels_changed=int(raw.get("pixels_changed", 0)),
                )
            )
    except (KeyError, TypeError, ValueError, json.JSONDecodeError) as exc:
        raise FormatError(f"{path}: malformed error log: {exc}") from exc
    return header, logs


def emit_overlay(
    image_id: str,
    score_map: np.ndarray,
    flags: np.ndarray,
    threshold: float,
    path,
) -> dict:
    """Write a mask of suspicious pixels: score below threshold or flagged.

    Marked pixels are 255, the rest 0.  Returns metadata with the marked
    pixel count.
    """
    score_map = np.asarray(score_map, dtype=np.float64)
    flags = np.asarray(flags)
    if score_map.shape != flags.shape:
        raise ShapeError(
            f"score map {score_map.shape} and flag mask {flags.shape} differ"
        )
    if not 0.0 <= threshold <= 1.0:
        raise ValidationError(f"overlay threshold must be in [0, 1], got {threshold}")
    marked = (score_map < threshold) | (flags == 0)
    out = np.where(marked, 255, 0).astype(np.uint8)
    try:
        Image.fromarray(out, mode="L").save(path, format="PNG")
    except OSError as exc:
        raise IoError(f"cannot write overlay {path}: {exc}") from exc
    return {
        "image_id": image_id,
        "marked_pixels": int(marked.sum()),
        "total_pixels": int(marked.size),
        "path": str(path),
    }


def atomic_write_text(path, text: str) -> None:
    path = Path(path)
    tmp = path.with_name(path.name + ".tmp")
    try:
        tmp.write_text(text, encoding="utf-8")
        os.replace(tmp, path)
    except OSError as exc:
        tmp.unlink(missing_ok=True)
        raise IoError(f"cannot write {path}: {exc}") from exc
