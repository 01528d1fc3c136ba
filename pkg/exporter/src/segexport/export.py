"""Out-of-sample prediction export.

Assigns images to folds, runs each fold's model on its held-out images only,
and serializes float32 probability tensors, 8-bit PNG masks, and a manifest
in the exact formats the scoring toolkit reads.
"""

from __future__ import annotations

import json
from pathlib import Path

import numpy as np
from numpy.lib import format as npy_format
from PIL import Image

from .config import ExportConfig
from .errors import ConfigError, ExportShapeError
from .models import build_model


def assign_folds(image_ids: list[str], folds: int, seed: int) -> dict[str, int]:
    """Deterministic balanced fold map: seeded shuffle, then round-robin."""
    order = sorted(image_ids)
    rng = np.random.default_rng(seed)
    shuffled = [order[i] for i in rng.permutation(len(order))]
    return {image_id: pos % folds for pos, image_id in enumerate(shuffled)}


def _normalize(raw: np.ndarray, activation: str, image_id: str) -> np.ndarray:
    scores = np.asarray(raw, dtype=np.float64)
    if activation == "softmax":
        scores -= scores.max(axis=2, keepdims=True)
        scores = np.exp(scores)
    if not np.isfinite(scores).all() or scores.min() < 0.0:
        raise ExportShapeError(
            f"{image_id}: model output holds negative or non-finite values; "
            "set activation=softmax for logit-emitting models"
        )
    sums = scores.sum(axis=2, keepdims=True)
    if (sums == 0).any():
        raise ExportShapeError(f"{image_id}: all-zero probability row")
    return scores / sums


def _load_mask(path, num_classes: int) -> np.ndarray:
    img = Image.open(path)
    img.load()
    if img.mode not in ("L", "P"):
        raise ConfigError(f"{path}: label mask must be single-channel 8-bit")
    mask = np.asarray(img, dtype=np.int64)
    if mask.max() >= num_classes:
        raise ConfigError(
            f"{path}: mask value {int(mask.max())} >= num_classes {num_classes}"
        )
    return mask


def export_predictions(config: ExportConfig, model_factory=None, fine_tune=None):
    """Run held-out inference and write the dataset tree.

    ``model_factory(fold) -> Predictor`` overrides the configured model
    registry (used for in-process models).  ``fine_tune(fold, train_ids,
    model)`` is an optional hook invoked before a fold predicts; the exporter
    itself never trains.

    Returns the manifest dictionary it wrote.
    """
    out_dir = Path(config.output_dir)
    if not out_dir.is_absolute():
        out_dir = config.base_dir / out_dir
    tensors_dir = out_dir / "tensors"
    masks_dir = out_dir / "masks"
    tensors_dir.mkdir(parents=True, exist_ok=True)
    masks_dir.mkdir(parents=True, exist_ok=True)

    records = {rec.image_id: rec for rec in config.images}
    if config.mode == "kfold":
        fold_map = assign_folds(list(records), config.folds, config.seed)
        fold_count = config.folds
        scored_ids = sorted(records)
    else:
        fold_map = {image_id: 0 for image_id in config.holdout_ids}
        fold_count = 1
        scored_ids = sorted(config.holdout_ids)

    if model_factory is None:
        def model_factory(fold):  # noqa: F811 - default factory from config
            return build_model(
                config.model_name, config.weights_for(fold), config.num_classes
            )

    entries = []
    by_fold: dict[int, list[str]] = {f: [] for f in range(fold_count)}
    for image_id in scored_ids:
        by_fold[fold_map[image_id]].append(image_id)

    for fold in range(fold_count):
        held_out = by_fold[fold]
        model = model_factory(fold)
        if fine_tune is not None:
            train_ids = [i for i in sorted(records) if i not in set(held_out)]
            fine_tune(fold, train_ids, model)
        for image_id in held_out:
            rec = records[image_id]
            mask = _load_mask(config.resolve(rec.label_path), config.num_classes)
            h, w = mask.shape
            expected = (h, w, config.num_classes)
            raw = model.predict(
                image_id, str(config.resolve(rec.image_path)), expected
            )
            raw = np.asarray(raw)
            if raw.shape != expected:
                raise ExportShapeError(
                    f"{image_id}: model output shape {raw.shape}, "
                    f"expected {expected}"
                )
            probs = _normalize(raw, config.activation, image_id)
            tensor_path = tensors_dir / f"{image_id}.npy"
            with open(tensor_path, "wb") as fh:
                npy_format.write_array(
                    fh, np.ascontiguousarray(probs, dtype="<f4"), version=(1, 0)
                )
            Image.fromarray(mask.astype(np.uint8), mode="L").save(
                masks_dir / f"{image_id}.png", format="PNG"
            )
            entries.append(
                {
                    "image_id": image_id,
                    "prob_path": f"tensors/{image_id}.npy",
                    "label_path": f"masks/{image_id}.png",
                    "height": h,
                    "width": w,
                }
            )

    entries.sort(key=lambda e: e["image_id"])
    manifest = {
        "num_classes": config.num_classes,
        "unlabeled_class": 0,
        "entries": entries,
        "metadata": {
            "mode": config.mode,
            "model": config.model_name,
            "folds": {image_id: fold_map[image_id] for image_id in scored_ids},
        },
    }
    (out_dir / "manifest.json").write_text(
        json.dumps(manifest, indent=2) + "\n", encoding="utf-8"
    )
    return manifest
