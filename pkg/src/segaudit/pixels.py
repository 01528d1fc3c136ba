"""Per-pixel objects that every image-level score builds on.

Given out-of-sample predicted class probabilities for one image and its
annotated mask, derive the predicted mask (argmax over the class axis) and
the self-confidence map: the predicted probability of the class the
annotator actually chose, per pixel.
"""

from __future__ import annotations

import numpy as np

from .errors import ShapeError, ValidationError


def check_probability_map(probs: np.ndarray) -> np.ndarray:
    """Validate an (h, w, K) probability grid and return it as float64."""
    probs = np.asarray(probs, dtype=np.float64)
    if probs.ndim != 3:
        raise ShapeError(f"probability map must be h x w x K, got shape {probs.shape}")
    if probs.shape[0] < 1 or probs.shape[1] < 1 or probs.shape[2] < 2:
        raise ShapeError(f"degenerate probability map shape {probs.shape}")
    return probs


def check_mask(labels: np.ndarray, num_classes: int) -> np.ndarray:
    """Validate an integer label grid with entries in [0, num_classes)."""
    labels = np.asarray(labels)
    if labels.ndim != 2:
        raise ShapeError(f"label mask must be 2-D, got shape {labels.shape}")
    if labels.size and (labels.min() < 0 or labels.max() >= num_classes):
        raise ValidationError(
            f"mask values must lie in [0, {num_classes}), got range "
            f"[{labels.min()}, {labels.max()}]"
        )
    return labels.astype(np.int64)


def predicted_mask(probs: np.ndarray) -> np.ndarray:
    """Most probable class per pixel; ties resolve to the lowest class index."""
    probs = check_probability_map(probs)
    return np.argmax(probs, axis=2).astype(np.int64)


def self_confidence(probs: np.ndarray, labels: np.ndarray) -> np.ndarray:
    """Predicted probability of the annotated class at each pixel."""
    probs = check_probability_map(probs)
    labels = check_mask(labels, probs.shape[2])
    if labels.shape != probs.shape[:2]:
        raise ShapeError(
            f"mask shape {labels.shape} does not match probability grid "
            f"{probs.shape[:2]}"
        )
    picked = np.take_along_axis(probs, labels[..., None], axis=2)
    return picked[..., 0]
