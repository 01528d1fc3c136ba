"""Synthetic dataset generator for the end-to-end detection benchmark.

Builds seeded blob segmentation masks and simulates a mostly-right model:
the true one-hot mask mixed with random simplex noise, spatially smoothed so
class boundaries carry genuine uncertainty, plus occasional confusion
regions where the model favors a wrong class the way an imperfectly trained
model would.  Parameters below were validated once against the detection
targets and are frozen; change them and the benchmark expectations no longer
apply.
"""

import numpy as np
from scipy.ndimage import gaussian_filter

from segaudit.inject import CorruptionPlan, corrupt_dataset
from segaudit.metrics import LabeledScore, auroc
from segaudit.pixels import self_confidence
from segaudit.scores import softmin

BASE_SEED = 20240501
INJECT_SEED = 909
NUM_IMAGES = 500
SIDE = 64
NUM_CLASSES = 5
BLOB_SIGMA = 4.0
MODEL_MIX = (0.7, 0.9)
MODEL_BLUR = 2.5
CONFUSION_RATE = 0.3
CONFUSION_WEIGHT = 0.72
SHIFT_RADIUS_RANGE = (3, 7)


def blob_mask(rng, h, w, num_classes, sigma=BLOB_SIGMA):
    """Contiguous random regions: argmax over smoothed noise fields."""
    fields = rng.normal(size=(num_classes, h, w))
    fields = gaussian_filter(fields, sigma=(0, sigma, sigma))
    return np.argmax(fields, axis=0)


def calibrated_probs(rng, labels, num_classes):
    """Simulated out-of-sample predictions for one image."""
    mix = rng.uniform(*MODEL_MIX)
    onehot = np.eye(num_classes)[labels]
    noise = rng.dirichlet(np.ones(num_classes), size=labels.shape)
    probs = mix * onehot + (1.0 - mix) * noise
    if rng.random() < CONFUSION_RATE:
        region = blob_mask(rng, *labels.shape, 2, sigma=5.0).astype(bool)
        wrong = int(rng.integers(0, num_classes))
        probs[region] = (
            (1.0 - CONFUSION_WEIGHT) * probs[region]
            + CONFUSION_WEIGHT * np.eye(num_classes)[wrong]
        )
    probs = gaussian_filter(probs, sigma=(MODEL_BLUR, MODEL_BLUR, 0))
    probs = np.clip(probs, 1e-9, None)
    return probs / probs.sum(axis=2, keepdims=True)


def build_clean_dataset(seed=BASE_SEED, n_images=NUM_IMAGES, side=SIDE,
                        num_classes=NUM_CLASSES):
    rng = np.random.default_rng(seed)
    masks = {}
    probs = {}
    for i in range(n_images):
        image_id = f"im{i:04d}"
        labels = blob_mask(rng, side, side, num_classes)
        masks[image_id] = labels
        probs[image_id] = calibrated_probs(rng, labels, num_classes)
    return masks, probs


def softmin_detection_auroc(masks, probs, error_type, proportion,
                            seed=INJECT_SEED, tau=0.1):
    """Corrupt, score softmin against the corrupted labels, return AUROC."""
    plan = CorruptionPlan(
        error_type=error_type, proportion=proportion, seed=seed,
        shift_radius_range=SHIFT_RADIUS_RANGE,
    )
    ids = sorted(masks)
    corrupted, logs = corrupt_dataset(ids, masks.__getitem__, plan,
                                      unlabeled_class=0)
    truth = {log.image_id: log.error_type != "none" for log in logs}
    items = []
    for image_id in ids:
        labels = corrupted.get(image_id, masks[image_id])
        score = softmin(self_confidence(probs[image_id], labels), tau)
        items.append(LabeledScore(image_id, score, truth[image_id]))
    return auroc(items)
