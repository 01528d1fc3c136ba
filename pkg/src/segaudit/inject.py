"""Synthetic annotation errors for benchmarking label-quality scores.

Three error models, applied to clean masks:

* ``drop``  -- all pixels of one class are relabeled as the unlabeled class,
               as if annotators overlooked the object.
* ``swap``  -- two classes exchange labels everywhere, as if annotators chose
               the wrong category.
* ``shift`` -- one class's region is eroded or dilated with a disc, as if the
               boundary was drawn sloppily.

``corrupt_dataset`` applies one error type to a seeded random subset of a
dataset and records ground truth for every image.
"""

from __future__ import annotations

from dataclasses import dataclass, field
from typing import Callable, Mapping

import numpy as np
from scipy.ndimage import distance_transform_edt

from .errors import (
    ClassNotPresentError,
    DegenerateShiftError,
    InfeasiblePlanError,
    ValidationError,
)

ERROR_TYPES = ("drop", "swap", "shift")
RNG_ALGORITHM = "pcg64"  # numpy default_rng; recorded so corrupted sets are portable

# Attempts at re-sampling (class, op, radius) before an image is deemed
# unshiftable and another image is drawn instead.
_SHIFT_ATTEMPTS = 16

_NEIGHBOR_SHIFTS = [
    (-1, -1), (-1, 0), (-1, 1),
    (0, -1), (0, 1),
    (1, -1), (1, 0), (1, 1),
]


@dataclass
class ErrorLog:
    """Ground-truth record of what was done to one image's mask."""

    image_id: str
    error_type: str  # one of ERROR_TYPES or "none"
    params: dict = field(default_factory=dict)
    pixels_changed: int = 0


@dataclass
class CorruptionPlan:
    """How much of a dataset to corrupt, with which error type."""

    error_type: str
    proportion: float
    seed: int
    shift_radius_range: tuple[int, int] = (3, 25)

    def __post_init__(self):
        if self.error_type not in ERROR_TYPES:
            raise ValidationError(f"unknown error type {self.error_type!r}")
        if not 0.0 < self.proportion <= 1.0:
            raise ValidationError(
                f"proportion must be in (0, 1], got {self.proportion}"
            )
        lo, hi = self.shift_radius_range
        if lo < 1 or hi < lo:
            raise ValidationError(
                f"bad shift radius range {self.shift_radius_range}"
            )


def _require_present(labels: np.ndarray, class_k: int) -> int:
    count = int(np.count_nonzero(labels == class_k))
    if count == 0:
        raise ClassNotPresentError(f"class {class_k} has no pixels")
    return count


def _as_label_grid(labels: np.ndarray) -> np.ndarray:
    # Signed dtype so the fill sentinel (-1) cannot wrap.
    labels = np.asarray(labels)
    if labels.ndim != 2:
        raise ValidationError(f"label mask must be 2-D, got shape {labels.shape}")
    return labels.astype(np.int64)


def inject_drop(
    labels: np.ndarray, class_k: int, unlabeled_class: int
) -> tuple[np.ndarray, ErrorLog]:
    """Relabel every pixel of ``class_k`` as the unlabeled class."""
    labels = _as_label_grid(labels)
    if class_k == unlabeled_class:
        raise ValidationError("cannot drop the unlabeled class onto itself")
    count = _require_present(labels, class_k)
    out = labels.copy()
    out[labels == class_k] = unlabeled_class
    log = ErrorLog(
        image_id="",
        error_type="drop",
        params={"dropped_class": int(class_k), "unlabeled_class": int(unlabeled_class)},
        pixels_changed=count,
    )
    return out, log


def inject_swap(
    labels: np.ndarray, class_a: int, class_b: int
) -> tuple[np.ndarray, ErrorLog]:
    """Interchange the labels of two classes everywhere (an involution)."""
    labels = _as_label_grid(labels)
    if class_a == class_b:
        raise ValidationError("swap needs two distinct classes")
    count_a = _require_present(labels, class_a)
    count_b = _require_present(labels, class_b)
    out = labels.copy()
    out[labels == class_a] = class_b
    out[labels == class_b] = class_a
    log = ErrorLog(
        image_id="",
        error_type="swap",
        params={"class_a": int(class_a), "class_b": int(class_b)},
        pixels_changed=count_a + count_b,
    )
    return out, log


def _disc_erode(mask: np.ndarray, radius: int) -> np.ndarray:
    if not (~mask).any():
        return mask.copy()  # no boundary anywhere; the disc fits trivially
    return distance_transform_edt(mask) > radius


def _disc_dilate(mask: np.ndarray, radius: int) -> np.ndarray:
    if mask.all():
        return mask.copy()
    return mask | (distance_transform_edt(~mask) <= radius)


def _fill_exposed(labels: np.ndarray, exposed: np.ndarray, class_k: int) -> np.ndarray:
    """Assign exposed pixels the majority class of their nearest non-class_k
    neighbors, growing inward ring by ring (8-neighborhood, synchronous), so
    the result is independent of scan order.  Ties go to the lowest class."""
    num_classes = int(labels.max()) + 1
    values = labels.copy()
    values[exposed] = -1
    # Remaining class_k pixels never vote; the hole is filled from outside.
    h, w = labels.shape
    guard = h + w + 2
    for _ in range(guard):
        unfilled = values == -1
        if not unfilled.any():
            return values
        votes = np.zeros((num_classes, h, w), dtype=np.int64)
        for di, dj in _NEIGHBOR_SHIFTS:
            shifted = np.full((h, w), -1, dtype=np.int64)
            src = values[
                max(0, -di): h - max(0, di),
                max(0, -dj): w - max(0, dj),
            ]
            shifted[
                max(0, di): h - max(0, -di),
                max(0, dj): w - max(0, -dj),
            ] = src
            for k in range(num_classes):
                if k == class_k:
                    continue
                votes[k] += shifted == k
        total = votes.sum(axis=0)
        ready = unfilled & (total > 0)
        if not ready.any():
            break
        winner = votes.argmax(axis=0)
        values[ready] = winner[ready]
    if (values == -1).any():
        raise RuntimeError("exposed region not reachable from any other class")
    return values


def inject_shift(
    labels: np.ndarray, class_k: int, op: str, radius: int
) -> tuple[np.ndarray, ErrorLog]:
    """Erode or dilate one class's region with a disc of the given radius.

    Dilation overwrites neighboring classes; erosion exposes pixels, which
    take the majority class of their nearest non-``class_k`` neighbors.
    Raises DegenerateShiftError when the perturbation changes nothing, so the
    caller can re-sample the radius or operation.
    """
    if op not in ("erode", "dilate"):
        raise ValidationError(f"shift op must be erode or dilate, got {op!r}")
    if radius < 1:
        raise ValidationError(f"shift radius must be >= 1, got {radius}")
    labels = _as_label_grid(labels)
    _require_present(labels, class_k)

    region = labels == class_k
    if op == "dilate":
        grown = _disc_dilate(region, radius)
        changed = grown & ~region
        out = labels.copy()
        out[changed] = class_k
    else:
        kept = _disc_erode(region, radius)
        exposed = region & ~kept
        out = _fill_exposed(labels, exposed, class_k)
        changed = exposed

    count = int(np.count_nonzero(changed))
    if count == 0:
        raise DegenerateShiftError(
            f"{op} with radius {radius} left class {class_k} unchanged"
        )
    log = ErrorLog(
        image_id="",
        error_type="shift",
        params={"class": int(class_k), "op": op, "radius": int(radius)},
        pixels_changed=count,
    )
    return out, log


def _round_half_up(x: float) -> int:
    return int(np.floor(x + 0.5))


def _eligible_classes(labels: np.ndarray, unlabeled_class: int) -> np.ndarray:
    present = np.unique(labels)
    return present[present != unlabeled_class]


def _inject_one(
    labels: np.ndarray,
    plan: CorruptionPlan,
    unlabeled_class: int,
    rng: np.random.Generator,
) -> tuple[np.ndarray, ErrorLog] | None:
    """Apply the plan's error to one mask, or return None if the image is
    ineligible (the generator state still advances deterministically)."""
    eligible = _eligible_classes(labels, unlabeled_class)
    if plan.error_type == "drop":
        if eligible.size == 0:
            return None
        class_k = int(rng.choice(eligible))
        return inject_drop(labels, class_k, unlabeled_class)
    if plan.error_type == "swap":
        if eligible.size < 2:
            return None
        a, b = rng.choice(eligible, size=2, replace=False)
        return inject_swap(labels, int(a), int(b))
    # shift
    if eligible.size == 0:
        return None
    lo, hi = plan.shift_radius_range
    for _ in range(_SHIFT_ATTEMPTS):
        class_k = int(rng.choice(eligible))
        op = "erode" if rng.integers(2) == 0 else "dilate"
        radius = int(rng.integers(lo, hi + 1))
        try:
            return inject_shift(labels, class_k, op, radius)
        except DegenerateShiftError:
            continue
    return None


def corrupt_dataset(
    image_ids: list[str],
    load_mask: Callable[[str], np.ndarray],
    plan: CorruptionPlan,
    unlabeled_class: int,
) -> tuple[dict[str, np.ndarray], list[ErrorLog]]:
    """Corrupt a seeded random subset of a dataset.

    Exactly round(proportion * N) distinct images receive an error; images
    that cannot take the requested error are skipped and replaced by later
    draws.  Returns the corrupted masks keyed by image id plus one ErrorLog
    per image (in input order), so the result is a pure function of the
    inputs and the plan.
    """
    n = len(image_ids)
    if n == 0:
        raise ValidationError("empty dataset")
    if len(set(image_ids)) != n:
        raise ValidationError("image ids must be unique")
    target = _round_half_up(plan.proportion * n)
    if target < 1:
        raise ValidationError(
            f"proportion {plan.proportion} of {n} images rounds to zero"
        )

    rng = np.random.default_rng(plan.seed)
    order = rng.permutation(n)
    corrupted: dict[str, np.ndarray] = {}
    logs_by_id: dict[str, ErrorLog] = {}
    done = 0
    for idx in order:
        if done == target:
            break
        image_id = image_ids[int(idx)]
        result = _inject_one(load_mask(image_id), plan, unlabeled_class, rng)
        if result is None:
            continue
        mask, log = result
        log.image_id = image_id
        corrupted[image_id] = mask
        logs_by_id[image_id] = log
        done += 1
    if done < target:
        raise InfeasiblePlanError(
            f"only {done} of {target} images can take a {plan.error_type} error"
        )

    logs = [
        logs_by_id.get(image_id, ErrorLog(image_id=image_id, error_type="none"))
        for image_id in image_ids
    ]
    return corrupted, logs


def log_header(plan: CorruptionPlan, num_images: int) -> Mapping:
    """First line of the serialized error log: provenance of the randomness."""
    return {
        "generator": RNG_ALGORITHM,
        "seed": int(plan.seed),
        "error_type": plan.error_type,
        "proportion": plan.proportion,
        "shift_radius_range": list(plan.shift_radius_range),
        "num_images": num_images,
    }
