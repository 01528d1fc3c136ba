"""Confident-learning flags over pooled maps and the resulting image score.

Pipeline: downsample each image's probabilities (mean pool) and annotations
(majority vote) over factor x factor windows, pool per-class self-confidence
means across the whole dataset into class thresholds, flag pixels whose
confident class disagrees with the annotation, and score each image by the
fraction of unflagged pixels.
"""

from __future__ import annotations

from dataclasses import dataclass
from typing import Iterable

import numpy as np

from .errors import ShapeError, ValidationError
from .pixels import check_mask, check_probability_map


@dataclass
class ClassThresholds:
    """Per-class mean self-confidence over a pooled pixel population.

    ``defined[k]`` is False when no pooled pixel is annotated k; such classes
    never enter the confident set.
    """

    values: np.ndarray
    defined: np.ndarray

    def __post_init__(self):
        self.values = np.asarray(self.values, dtype=np.float64)
        self.defined = np.asarray(self.defined, dtype=bool)
        if self.values.shape != self.defined.shape or self.values.ndim != 1:
            raise ShapeError("thresholds and defined flags must be 1-D and aligned")


def downsample(
    probs: np.ndarray, labels: np.ndarray, factor: int = 4
) -> tuple[np.ndarray, np.ndarray]:
    """Pool an image to ceil(h/factor) x ceil(w/factor).

    Probabilities are averaged over each window (partial edge windows average
    over the pixels that exist) and renormalized per pixel; labels take the
    window's majority class, ties to the lowest class index.
    """
    probs = check_probability_map(probs)
    num_classes = probs.shape[2]
    labels = check_mask(labels, num_classes)
    if labels.shape != probs.shape[:2]:
        raise ShapeError(f"mask shape {labels.shape} != grid {probs.shape[:2]}")
    factor = int(factor)
    if factor < 1:
        raise ValidationError(f"downsample factor must be >= 1, got {factor}")
    if factor == 1:
        return probs.copy(), labels.copy()

    h, w, _ = probs.shape
    out_h = -(-h // factor)
    out_w = -(-w // factor)
    pad_h = out_h * factor - h
    pad_w = out_w * factor - w

    padded = np.pad(probs, ((0, pad_h), (0, pad_w), (0, 0)))
    weight = np.pad(np.ones((h, w)), ((0, pad_h), (0, pad_w)))
    # Padded-out slots contribute exact zeros, so accumulation order over the
    # factor*factor slots matches a plain row-major loop over real pixels.
    acc = np.zeros((out_h, out_w, num_classes))
    count = np.zeros((out_h, out_w))
    votes = np.zeros((out_h, out_w, num_classes), dtype=np.int64)
    labels_padded = np.pad(labels, ((0, pad_h), (0, pad_w)), constant_values=-1)
    for di in range(factor):
        for dj in range(factor):
            acc += padded[di::factor, dj::factor, :]
            count += weight[di::factor, dj::factor]
            window_labels = labels_padded[di::factor, dj::factor]
            for k in range(num_classes):
                votes[:, :, k] += window_labels == k

    pooled = acc / count[:, :, None]
    pooled /= pooled.sum(axis=2, keepdims=True)
    pooled_labels = votes.argmax(axis=2).astype(np.int64)
    return pooled, pooled_labels


def threshold_partials(
    probs: np.ndarray, labels: np.ndarray, num_classes: int
) -> tuple[np.ndarray, np.ndarray]:
    """One image's contribution to the class thresholds: per-class
    (sum of self-confidence, pixel count)."""
    sums = np.zeros(num_classes)
    counts = np.zeros(num_classes, dtype=np.int64)
    for k in range(num_classes):
        member = labels == k
        counts[k] = np.count_nonzero(member)
        if counts[k]:
            sums[k] = probs[:, :, k][member].sum()
    return sums, counts


def class_thresholds(
    pooled_pairs: Iterable[tuple[np.ndarray, np.ndarray]], num_classes: int
) -> ClassThresholds:
    """Mean self-confidence per annotated class over all pooled pixels."""
    sums = np.zeros(num_classes)
    counts = np.zeros(num_classes, dtype=np.int64)
    empty = True
    for probs, labels in pooled_pairs:
        empty = False
        s, c = threshold_partials(probs, labels, num_classes)
        sums += s
        counts += c
    if empty:
        raise ValidationError("cannot pool thresholds over an empty dataset")
    defined = counts > 0
    values = np.divide(sums, counts, out=np.zeros(num_classes), where=defined)
    return ClassThresholds(values=values, defined=defined)


def flag_mask(
    probs: np.ndarray, labels: np.ndarray, thresholds: ClassThresholds
) -> np.ndarray:
    """Binary grid; 0 marks pixels whose confident class differs from the
    annotation.

    A pixel's confident set holds every defined class whose predicted
    probability reaches that class's threshold; the pixel is flagged when the
    set is nonempty and its highest-probability member (ties to the lowest
    index) is not the annotated class.
    """
    probs = check_probability_map(probs)
    num_classes = probs.shape[2]
    labels = check_mask(labels, num_classes)
    if labels.shape != probs.shape[:2]:
        raise ShapeError(f"mask shape {labels.shape} != grid {probs.shape[:2]}")
    if thresholds.values.shape[0] != num_classes:
        raise ShapeError(
            f"{thresholds.values.shape[0]} thresholds for {num_classes} classes"
        )

    cutoff = np.where(thresholds.defined, thresholds.values, np.inf)
    confident = probs >= cutoff
    any_confident = confident.any(axis=2)
    confident_probs = np.where(confident, probs, -1.0)
    confident_class = confident_probs.argmax(axis=2)
    flags = np.ones(labels.shape, dtype=np.uint8)
    flags[any_confident & (confident_class != labels)] = 0
    return flags


def clc_score(flags: np.ndarray) -> float:
    """Fraction of pixels not flagged as mislabeled."""
    flags = np.asarray(flags)
    if flags.size == 0:
        raise ShapeError("empty flag mask")
    return float(np.count_nonzero(flags) / flags.size)
