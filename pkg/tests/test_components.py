import numpy as np
import pytest

from segaudit.components import coco_score, component_grid, extract_components
from segaudit.errors import ShapeError

from helpers import random_probs, random_labels
from naive import naive_coco, naive_components


class TestExtraction:
    def test_constant_masks_single_component(self):
        pred = np.full((3, 4), 2)
        labels = np.full((3, 4), 1)
        comps = extract_components(pred, labels)
        assert len(comps) == 1
        assert len(comps[0].pixels) == 12
        assert comps[0].annotated_class == 1
        assert comps[0].predicted_class == 2

    def test_diagonal_pixels_do_not_touch(self):
        # both value pairs occur on a diagonal, so no 4-adjacent pixels share
        # a pair: four singleton components
        labels = np.zeros((2, 2), int)
        pred = np.array([[0, 1], [1, 0]])
        comps = extract_components(pred, labels)
        assert len(comps) == 4
        ref_ids, ref_comps = naive_components(pred.tolist(), labels.tolist())
        assert len(ref_comps) == 4

    def test_checkerboard_is_all_singletons(self):
        labels = np.array([[0, 1], [1, 0]])
        pred = np.zeros((2, 2), int)
        comps = extract_components(pred, labels)
        assert len(comps) == 4
        assert all(len(c.pixels) == 1 for c in comps)

    def test_eight_connectivity_merges_diagonals(self):
        labels = np.zeros((2, 2), int)
        pred = np.array([[0, 1], [1, 0]])
        _, count = component_grid(pred, labels, connectivity=8)
        assert count == 2

    def test_partition_covers_every_pixel_once(self):
        rng = np.random.default_rng(1)
        pred = random_labels(rng, 9, 7, 3)
        labels = random_labels(rng, 9, 7, 3)
        comps = extract_components(pred, labels)
        seen = set()
        for comp in comps:
            for px in comp.pixels:
                assert px not in seen
                seen.add(px)
        assert len(seen) == 63

    def test_components_are_maximal(self):
        rng = np.random.default_rng(2)
        pred = random_labels(rng, 8, 8, 2)
        labels = random_labels(rng, 8, 8, 2)
        ids, count = component_grid(pred, labels)
        # any 4-adjacent pixels with equal pairs share a component id
        same_right = (pred[:, :-1] == pred[:, 1:]) & (labels[:, :-1] == labels[:, 1:])
        assert np.all(ids[:, :-1][same_right] == ids[:, 1:][same_right])
        same_down = (pred[:-1] == pred[1:]) & (labels[:-1] == labels[1:])
        assert np.all(ids[:-1][same_down] == ids[1:][same_down])

    def test_shape_mismatch(self):
        with pytest.raises(ShapeError):
            component_grid(np.zeros((2, 2), int), np.zeros((2, 3), int))


class TestCocoScore:
    def test_onehot_agreement_scores_one(self):
        rng = np.random.default_rng(3)
        labels = random_labels(rng, 6, 6, 3)
        probs = np.eye(3)[labels]
        pred = random_labels(rng, 6, 6, 3)  # any partition refinement
        assert coco_score(probs, pred, labels) == 1.0

    def test_single_component_mean(self):
        labels = np.zeros((1, 2), int)
        pred = np.zeros((1, 2), int)
        probs = np.array([[[0.2, 0.8], [0.4, 0.6]]])
        assert coco_score(probs, pred, labels) == pytest.approx(0.3)

    def test_components_weighted_equally(self):
        # a 1-pixel component and a 3-pixel component average 0.5 each way
        labels = np.array([[0, 1, 1, 1]])
        pred = np.zeros((1, 4), int)
        probs = np.zeros((1, 4, 2))
        probs[0, 0] = [1.0, 0.0]  # component of class 0: score 1.0
        probs[0, 1:] = [1.0, 0.0]  # component of class 1: score 0.0
        assert coco_score(probs, pred, labels) == pytest.approx(0.5)

    def test_enumeration_order_invariance(self):
        rng = np.random.default_rng(4)
        pred = random_labels(rng, 8, 8, 3)
        labels = random_labels(rng, 8, 8, 3)
        probs = random_probs(rng, 8, 8, 3)
        base = coco_score(probs, pred, labels)
        flipped = coco_score(
            probs[::-1, ::-1].copy(), pred[::-1, ::-1].copy(),
            labels[::-1, ::-1].copy(),
        )
        assert flipped == pytest.approx(base, abs=1e-12)

    def test_matches_flood_fill_reference(self):
        rng = np.random.default_rng(5)
        for _ in range(25):
            num_classes = int(rng.integers(2, 5))
            pred = random_labels(rng, 8, 8, num_classes)
            labels = random_labels(rng, 8, 8, num_classes)
            probs = random_probs(rng, 8, 8, num_classes)
            ref_ids, _ = naive_components(pred.tolist(), labels.tolist())
            ids, _ = component_grid(pred, labels)
            # identical partitions (ids may differ only by naming; both use
            # raster-first-occurrence numbering so they match exactly)
            assert ids.tolist() == ref_ids
            assert coco_score(probs, pred, labels) == pytest.approx(
                naive_coco(probs.tolist(), pred.tolist(), labels.tolist()),
                abs=1e-12,
            )

    def test_per_class_mode(self):
        labels = np.array([[0, 0, 1, 2]])
        pred = np.zeros((1, 4), int)
        probs = np.zeros((1, 4, 3))
        probs[0, 0] = probs[0, 1] = [0.5, 0.25, 0.25]
        probs[0, 2] = [0.1, 0.7, 0.2]
        probs[0, 3] = [0.1, 0.1, 0.8]
        flat = coco_score(probs, pred, labels)
        grouped = coco_score(probs, pred, labels, per_class=True)
        assert flat == pytest.approx((0.5 + 0.7 + 0.8) / 3)
        assert grouped == pytest.approx((0.5 + 0.7 + 0.8) / 3)
