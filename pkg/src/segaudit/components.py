"""Connected-component label quality score.

Pixels are grouped into maximal 4-connected regions over which both the
predicted and the annotated class are constant.  Each component is scored by
the mean predicted probability of its annotated class, and the image score
averages the component scores.  Inputs are expected to be the same pooled
maps the confident-learning pipeline uses.
"""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np
from scipy.sparse import coo_matrix
from scipy.sparse.csgraph import connected_components as _graph_components

from .errors import ShapeError, ValidationError
from .pixels import check_mask, check_probability_map


@dataclass
class Component:
    """One maximal region of constant (predicted, annotated) class pair."""

    pixels: list[tuple[int, int]]
    annotated_class: int
    predicted_class: int


def component_grid(pred: np.ndarray, labels: np.ndarray, connectivity: int = 4):
    """Label maximal connected regions of constant (pred, labels) pairs.

    Returns ``(ids, count)`` where ids is an int grid numbering components by
    first raster-order occurrence, which makes the labeling reproducible.
    """
    pred = np.asarray(pred)
    labels = np.asarray(labels)
    if pred.shape != labels.shape or pred.ndim != 2:
        raise ShapeError(f"mask shapes differ: {pred.shape} vs {labels.shape}")
    if connectivity not in (4, 8):
        raise ValidationError(f"connectivity must be 4 or 8, got {connectivity}")

    h, w = pred.shape
    n = h * w
    flat = np.arange(n).reshape(h, w)
    pair = pred.astype(np.int64) * (int(labels.max()) + 1) + labels.astype(np.int64)

    rows = []
    cols = []
    right = pair[:, :-1] == pair[:, 1:]
    rows.append(flat[:, :-1][right])
    cols.append(flat[:, 1:][right])
    down = pair[:-1, :] == pair[1:, :]
    rows.append(flat[:-1, :][down])
    cols.append(flat[1:, :][down])
    if connectivity == 8:
        diag = pair[:-1, :-1] == pair[1:, 1:]
        rows.append(flat[:-1, :-1][diag])
        cols.append(flat[1:, 1:][diag])
        anti = pair[:-1, 1:] == pair[1:, :-1]
        rows.append(flat[:-1, 1:][anti])
        cols.append(flat[1:, :-1][anti])

    row = np.concatenate(rows)
    col = np.concatenate(cols)
    graph = coo_matrix((np.ones(row.size, dtype=np.int8), (row, col)), shape=(n, n))
    count, raw = _graph_components(graph, directed=False)

    # Renumber so component ids follow first occurrence in raster order.
    _, first_index, inverse = np.unique(raw, return_index=True, return_inverse=True)
    order = np.argsort(np.argsort(first_index))
    ids = order[inverse].reshape(h, w)
    return ids, count


def extract_components(
    pred: np.ndarray, labels: np.ndarray, connectivity: int = 4
) -> list[Component]:
    """Materialize the component partition as a list of pixel sets."""
    ids, count = component_grid(pred, labels, connectivity)
    components: list[Component] = []
    for c in range(count):
        ii, jj = np.nonzero(ids == c)
        components.append(
            Component(
                pixels=list(zip(ii.tolist(), jj.tolist())),
                annotated_class=int(labels[ii[0], jj[0]]),
                predicted_class=int(pred[ii[0], jj[0]]),
            )
        )
    return components


def coco_score(
    probs: np.ndarray,
    pred: np.ndarray,
    labels: np.ndarray,
    connectivity: int = 4,
    per_class: bool = False,
) -> float:
    """Mean over components of the component's annotated-class likelihood.

    Each component's class probability vector is the mean of its pixels'
    predicted probabilities; the component score picks out the annotated
    class.  ``per_class=True`` first averages components that share an
    annotated class, then averages the class means.
    """
    probs = check_probability_map(probs)
    num_classes = probs.shape[2]
    labels = check_mask(labels, num_classes)
    if probs.shape[:2] != labels.shape:
        raise ShapeError(f"grid {probs.shape[:2]} != mask {labels.shape}")
    ids, count = component_grid(pred, labels, connectivity)

    flat_ids = ids.ravel()
    sizes = np.bincount(flat_ids, minlength=count)
    mean_probs = np.empty((count, num_classes))
    for k in range(num_classes):
        sums = np.bincount(flat_ids, weights=probs[:, :, k].ravel(), minlength=count)
        mean_probs[:, k] = sums / sizes

    # The annotated class is constant within a component, so any member works.
    member = np.zeros(count, dtype=np.int64)
    member[flat_ids] = np.arange(flat_ids.size)
    component_class = labels.ravel()[member]

    scores = mean_probs[np.arange(count), component_class]
    if not per_class:
        return float(scores.mean())
    class_means = [
        scores[component_class == k].mean()
        for k in np.unique(component_class)
    ]
    return float(np.mean(class_means))
