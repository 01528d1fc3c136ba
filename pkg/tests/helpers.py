"""Shared random-instance generators for the test suite."""

from pathlib import Path

import numpy as np

from segaudit import io as _io


def random_probs(rng, h, w, num_classes):
    """Random probability grid with rows on the simplex."""
    raw = rng.random((h, w, num_classes)) + 1e-6
    return raw / raw.sum(axis=2, keepdims=True)


def random_labels(rng, h, w, num_classes):
    return rng.integers(0, num_classes, size=(h, w))


def random_instance(rng, min_side=8, max_side=32, min_classes=2, max_classes=6):
    h = int(rng.integers(min_side, max_side + 1))
    w = int(rng.integers(min_side, max_side + 1))
    num_classes = int(rng.integers(min_classes, max_classes + 1))
    return random_probs(rng, h, w, num_classes), random_labels(rng, h, w, num_classes)


def quantized_score_map(rng, h, w, step=0.05):
    """Score maps on a coarse grid so ties are exact and gaps are wide."""
    levels = int(round(1.0 / step)) + 1
    return rng.integers(0, levels, size=(h, w)) * step


def build_disk_dataset(root: Path, n_images=3, h=16, w=12, num_classes=3, seed=0):
    """Write a small synthetic manifest + tensors + masks; returns the
    manifest path."""
    rng = np.random.default_rng(seed)
    root.mkdir(parents=True, exist_ok=True)
    entries = []
    for i in range(n_images):
        image_id = f"img{i:03d}"
        probs = random_probs(rng, h, w, num_classes)
        labels = random_labels(rng, h, w, num_classes)
        labels[0, 0], labels[0, 1] = 1, 2  # keep swap feasible
        _io.write_tensor(probs, root / f"{image_id}.npy")
        _io.write_mask(labels, root / f"{image_id}.png")
        entries.append(
            _io.ManifestEntry(image_id, f"{image_id}.npy", f"{image_id}.png", h, w)
        )
    manifest = _io.DatasetManifest(
        num_classes=num_classes, unlabeled_class=0, entries=entries, base_dir=root
    )
    _io.write_manifest(manifest, root / "manifest.json")
    return root / "manifest.json"


def read_tree(root: Path) -> dict[str, bytes]:
    """All files under root keyed by relative path, for byte comparisons."""
    return {
        str(p.relative_to(root)): p.read_bytes()
        for p in sorted(root.rglob("*"))
        if p.is_file()
    }
