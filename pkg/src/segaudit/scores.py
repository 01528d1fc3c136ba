"""Per-image label quality scores.

All scores map one image to a value in [0, 1] where lower means the
annotation is more likely wrong:

* ``ccp``      -- fraction of pixels whose annotated class equals the
                  predicted class.
* ``tccp``     -- per-class accuracy under the best of a set of probability
                  thresholds, averaged over classes.
* ``cil``      -- mean of the per-pixel self-confidence map.
* ``softmin``  -- exponentially weighted mean of the self-confidence map
                  that interpolates between its minimum (tau -> 0) and its
                  mean (tau -> inf).
* ``iou``      -- mean per-class Jaccard index between predicted and
                  annotated masks over classes present in either.
"""

from __future__ import annotations

from typing import Sequence

import numpy as np

from .errors import ShapeError, ValidationError
from .pixels import check_mask, check_probability_map

DEFAULT_SOFTMIN_TAU = 0.1
DEFAULT_TCCP_THRESHOLDS: tuple[float, ...] = tuple(
    round(k * 0.05, 2) for k in range(1, 20)
)


def _check_same_grid(a: np.ndarray, b: np.ndarray) -> None:
    if a.shape[:2] != b.shape[:2]:
        raise ShapeError(f"grids differ: {a.shape[:2]} vs {b.shape[:2]}")


def check_tccp_thresholds(thresholds: Sequence[float]) -> tuple[float, ...]:
    """Thresholds must be nonempty, strictly increasing, and inside (0, 1)."""
    out = tuple(float(t) for t in thresholds)
    if not out:
        raise ValidationError("threshold set is empty")
    if any(not 0.0 < t < 1.0 for t in out):
        raise ValidationError(f"thresholds must lie in (0, 1), got {out}")
    if any(b <= a for a, b in zip(out, out[1:])):
        raise ValidationError(f"thresholds must be strictly increasing, got {out}")
    return out


def ccp(pred: np.ndarray, labels: np.ndarray) -> float:
    """Proportion of pixels where the annotated class equals the prediction."""
    pred = np.asarray(pred)
    labels = np.asarray(labels)
    _check_same_grid(pred, labels)
    return float(np.count_nonzero(pred == labels) / pred.size)


def tccp(
    probs: np.ndarray,
    labels: np.ndarray,
    thresholds: Sequence[float] = DEFAULT_TCCP_THRESHOLDS,
    mode: str = "agreement",
) -> float:
    """Mean over classes of accuracy at the best per-class threshold.

    ``mode="agreement"`` (default) scores a pixel as correct for class k when
    membership in the annotation (l == k) matches membership under the
    threshold (p_k > t).  ``mode="literal"`` counts only pixels with l == k
    and p_k > t over the whole grid; under that reading the best threshold is
    always the smallest one, so the adaptive selection is vacuous.  Both
    variants pick the smallest threshold on ties.
    """
    probs = check_probability_map(probs)
    num_classes = probs.shape[2]
    labels = check_mask(labels, num_classes)
    _check_same_grid(probs, labels)
    thresholds = check_tccp_thresholds(thresholds)
    if mode not in ("agreement", "literal"):
        raise ValidationError(f"unknown tccp mode {mode!r}")

    total = labels.size
    per_class = []
    for k in range(num_classes):
        member = labels == k
        p_k = probs[:, :, k]
        best = -1.0
        for t in thresholds:
            above = p_k > t
            if mode == "agreement":
                acc = np.count_nonzero(member == above) / total
            else:
                acc = np.count_nonzero(member & above) / total
            if acc > best:
                best = acc
        per_class.append(best)
    return float(sum(per_class) / num_classes)


def cil(score_map: np.ndarray) -> float:
    """Mean of the per-pixel self-confidence scores."""
    score_map = np.asarray(score_map, dtype=np.float64)
    if score_map.size == 0:
        raise ShapeError("empty score map")
    return float(score_map.mean())


def softmin(score_map: np.ndarray, tau: float = DEFAULT_SOFTMIN_TAU) -> float:
    """Soft minimum of per-pixel scores with temperature ``tau``.

    Each pixel is weighted by exp((1 - s) / tau), so low-confidence pixels
    dominate for small tau.  Exponents are shifted by their maximum before
    exponentiation so the weights never overflow, and the result is clamped
    into [min(s), max(s)], the mathematical range of a weighted mean.
    """
    if tau <= 0:
        raise ValidationError(f"softmin temperature must be positive, got {tau}")
    s = np.asarray(score_map, dtype=np.float64).ravel()
    if s.size == 0:
        raise ShapeError("empty score map")
    z = (1.0 - s) / tau
    z -= z.max()
    w = np.exp(z)
    value = float(np.dot(s, w) / w.sum())
    lo, hi = float(s.min()), float(s.max())
    return min(max(value, lo), hi)


def iou(pred: np.ndarray, labels: np.ndarray) -> float:
    """Mean per-class Jaccard index over classes present in either mask."""
    pred = np.asarray(pred)
    labels = np.asarray(labels)
    _check_same_grid(pred, labels)
    present = np.union1d(np.unique(pred), np.unique(labels))
    ratios = []
    for k in present:
        in_pred = pred == k
        in_labels = labels == k
        inter = np.count_nonzero(in_pred & in_labels)
        union = np.count_nonzero(in_pred | in_labels)
        ratios.append(inter / union)
    return float(sum(ratios) / len(ratios))
