"""Detection-quality metrics for label-quality scores.

Lower scores are supposed to mark mislabeled images, so every metric treats
the error items as the positives ranked toward the low end.  Score ties are
ordered by image id before any top-T cut; AUROC instead gives ties half
credit through the rank statistic.
"""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np
from scipy.stats import rankdata

from .errors import UndefinedMetricError, ValidationError


@dataclass
class LabeledScore:
    """One image's score joined with its injection ground truth."""

    image_id: str
    score: float
    is_error: bool


def _split(items: list[LabeledScore]) -> tuple[np.ndarray, np.ndarray]:
    if not items:
        raise ValidationError("no items to evaluate")
    scores = np.array([it.score for it in items], dtype=np.float64)
    if not np.isfinite(scores).all():
        raise ValidationError("scores must be finite")
    errors = np.array([bool(it.is_error) for it in items])
    return scores, errors


def _sorted_error_flags(items: list[LabeledScore]) -> list[bool]:
    _split(items)  # validation only
    return [it.is_error for it in sorted(items, key=lambda it: (it.score, it.image_id))]


def auroc(items: list[LabeledScore]) -> float:
    """Probability that a random error item scores strictly below a random
    clean item, ties counting one half (the normalized Mann-Whitney U)."""
    scores, errors = _split(items)
    n_err = int(errors.sum())
    n_clean = errors.size - n_err
    if n_err == 0 or n_clean == 0:
        raise UndefinedMetricError("AUROC needs at least one error and one clean item")
    ranks = rankdata(scores)  # ascending, ties averaged
    u_clean = ranks[~errors].sum() - n_clean * (n_clean + 1) / 2
    return float(u_clean / (n_err * n_clean))


def auprc(items: list[LabeledScore]) -> float:
    """Average precision over error items in ascending-score order."""
    flags = _sorted_error_flags(items)
    total_errors = sum(flags)
    if total_errors == 0:
        raise UndefinedMetricError("AUPRC needs at least one error item")
    hits = 0
    acc = 0.0
    for position, is_error in enumerate(flags, start=1):
        if is_error:
            hits += 1
            acc += hits / position
    return acc / total_errors


def errors_in_bottom(items: list[LabeledScore], top_t: int) -> int:
    """How many error items sit among the ``top_t`` lowest scores."""
    if not 1 <= top_t <= len(items):
        raise ValidationError(f"T must be in [1, {len(items)}], got {top_t}")
    flags = _sorted_error_flags(items)
    return sum(flags[:top_t])


def precision_at_t(items: list[LabeledScore], top_t: int) -> float:
    """Fraction of the ``top_t`` lowest-scoring items that are errors."""
    return errors_in_bottom(items, top_t) / top_t


def lift_at_t(items: list[LabeledScore], top_t: int) -> float:
    """Error prevalence in the bottom ``top_t`` relative to overall prevalence.

    Computed as one division of exact integer products, so the value is the
    correctly rounded image of the exact rational (hits * N) / (T * E); at
    that rational level lift * (E / N) equals precision identically.
    """
    hits = errors_in_bottom(items, top_t)
    total_errors = sum(1 for it in items if it.is_error)
    if total_errors == 0:
        raise UndefinedMetricError("lift needs at least one error item")
    return (hits * len(items)) / (top_t * total_errors)


def summarize(items: list[LabeledScore], fixed_t: int = 100) -> dict[str, float]:
    """The six-number evaluation row for one method.

    ``*_at_E`` uses T equal to the true number of errors; ``*_at_{fixed_t}``
    clamps T to the dataset size when the dataset is smaller.
    """
    n = len(items)
    total_errors = sum(1 for it in items if it.is_error)
    if total_errors == 0 or total_errors == n:
        raise UndefinedMetricError("evaluation needs both error and clean items")
    t_fixed = min(fixed_t, n)
    return {
        "auroc": auroc(items),
        "auprc": auprc(items),
        f"lift_at_{fixed_t}": lift_at_t(items, t_fixed),
        "lift_at_E": lift_at_t(items, total_errors),
        f"precision_at_{fixed_t}": precision_at_t(items, t_fixed),
        "precision_at_E": precision_at_t(items, total_errors),
    }
