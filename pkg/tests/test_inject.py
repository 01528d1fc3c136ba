import numpy as np
import pytest

from segaudit.errors import (
    ClassNotPresentError,
    DegenerateShiftError,
    InfeasiblePlanError,
    ValidationError,
)
from segaudit.inject import (
    CorruptionPlan,
    corrupt_dataset,
    inject_drop,
    inject_shift,
    inject_swap,
)

from helpers import random_labels


class TestDrop:
    def test_substitution(self):
        labels = np.array([[1, 1], [0, 2]])
        out, log = inject_drop(labels, 1, 0)
        assert out.tolist() == [[0, 0], [0, 2]]
        assert log.pixels_changed == 2
        assert log.params["dropped_class"] == 1

    def test_whole_image(self):
        labels = np.full((3, 3), 2)
        out, log = inject_drop(labels, 2, 0)
        assert np.all(out == 0)
        assert log.pixels_changed == 9

    def test_absent_class(self):
        with pytest.raises(ClassNotPresentError):
            inject_drop(np.zeros((2, 2), int), 5, 0)

    def test_only_unlabeled_introduced(self):
        rng = np.random.default_rng(0)
        labels = random_labels(rng, 10, 10, 4)
        out, _ = inject_drop(labels, 2, 0)
        assert set(np.unique(out)) <= set(np.unique(labels)) - {2} | {0}

    def test_input_untouched(self):
        labels = np.array([[1, 0]])
        snapshot = labels.copy()
        inject_drop(labels, 1, 0)
        assert np.array_equal(labels, snapshot)


class TestSwap:
    def test_interchange(self):
        labels = np.array([[1, 2], [2, 1]])
        out, log = inject_swap(labels, 1, 2)
        assert out.tolist() == [[2, 1], [1, 2]]
        assert log.pixels_changed == 4

    def test_involution(self):
        rng = np.random.default_rng(1)
        labels = random_labels(rng, 8, 8, 4) + 0  # classes 0..3
        labels[0, 0], labels[0, 1] = 1, 3
        once, _ = inject_swap(labels, 1, 3)
        twice, _ = inject_swap(once, 1, 3)
        assert np.array_equal(twice, labels)

    def test_preserves_label_multiset(self):
        rng = np.random.default_rng(2)
        labels = random_labels(rng, 9, 9, 5)
        labels[0, :2] = [1, 3]
        out, _ = inject_swap(labels, 1, 3)
        assert sorted(out.ravel()) == sorted(labels.ravel())

    def test_absent_class(self):
        with pytest.raises(ClassNotPresentError):
            inject_swap(np.array([[1, 2]]), 1, 3)


class TestShift:
    def test_dilate_single_pixel_radius_one_is_plus(self):
        labels = np.zeros((3, 3), int)
        labels[1, 1] = 1
        out, log = inject_shift(labels, 1, "dilate", 1)
        assert np.count_nonzero(out == 1) == 5
        assert log.pixels_changed == 4
        assert out[1, 1] == 1 and out[0, 1] == 1 and out[2, 1] == 1
        assert out[0, 0] == 0 and out[2, 2] == 0

    def test_erode_thin_stripe_vanishes(self):
        labels = np.zeros((5, 6), int)
        labels[2, :] = 1
        out, log = inject_shift(labels, 1, "erode", 1)
        assert np.count_nonzero(out == 1) == 0
        assert log.pixels_changed == 6
        # exposed pixels took the surrounding class
        assert np.all(out == 0)

    def test_erode_fill_takes_nearest_majority(self):
        # class 1 block sits between class 0 (above) and class 2 (below);
        # eroded rows take the class on their side
        labels = np.zeros((6, 4), int)
        labels[2:4, :] = 1
        labels[4:, :] = 2
        out, _ = inject_shift(labels, 1, "erode", 1)
        assert np.all(out[2, :] == 0)
        assert np.all(out[3, :] == 2)

    def test_fill_never_reintroduces_shifted_class(self):
        rng = np.random.default_rng(3)
        for _ in range(20):
            labels = random_labels(rng, 12, 12, 3)
            klass = int(rng.integers(0, 3))
            if not (labels == klass).any() or (labels == klass).all():
                continue
            try:
                out, log = inject_shift(labels, klass, "erode", 2)
            except DegenerateShiftError:
                continue
            before = labels == klass
            after = out == klass
            assert not (after & ~before).any()
            assert log.pixels_changed > 0

    def test_radius_zero_rejected(self):
        with pytest.raises(ValidationError):
            inject_shift(np.array([[1, 0]]), 1, "erode", 0)

    def test_degenerate_raises(self):
        labels = np.full((4, 4), 1)  # nothing to dilate into, nothing exposes
        with pytest.raises(DegenerateShiftError):
            inject_shift(labels, 1, "dilate", 2)
        with pytest.raises(DegenerateShiftError):
            inject_shift(labels, 1, "erode", 2)

    def test_absent_class(self):
        with pytest.raises(ClassNotPresentError):
            inject_shift(np.zeros((3, 3), int), 2, "erode", 1)


def _toy_dataset(rng, n, num_classes=4, side=8):
    masks = {}
    for i in range(n):
        labels = random_labels(rng, side, side, num_classes)
        labels[0, 0] = 1  # guarantee two non-unlabeled classes
        labels[0, 1] = 2
        masks[f"img{i:03d}"] = labels
    return masks


class TestCorruptDataset:
    def test_rounding_is_half_up(self):
        rng = np.random.default_rng(5)
        masks = _toy_dataset(rng, 1112, side=4)
        plan = CorruptionPlan(error_type="drop", proportion=0.2, seed=7)
        corrupted, logs = corrupt_dataset(
            sorted(masks), masks.__getitem__, plan, unlabeled_class=0
        )
        assert len(corrupted) == 222  # round(222.4)
        assert len(logs) == 1112
        assert sum(log.error_type != "none" for log in logs) == 222

    def test_deterministic_for_fixed_seed(self):
        rng = np.random.default_rng(6)
        masks = _toy_dataset(rng, 20)
        plan = CorruptionPlan(error_type="swap", proportion=0.5, seed=123)
        ids = sorted(masks)
        first = corrupt_dataset(ids, masks.__getitem__, plan, 0)
        second = corrupt_dataset(ids, masks.__getitem__, plan, 0)
        assert sorted(first[0]) == sorted(second[0])
        for image_id in first[0]:
            assert np.array_equal(first[0][image_id], second[0][image_id])
        assert [vars(a) for a in first[1]] == [vars(b) for b in second[1]]

    def test_full_proportion(self):
        rng = np.random.default_rng(7)
        masks = _toy_dataset(rng, 10)
        plan = CorruptionPlan(error_type="shift", proportion=1.0, seed=3,
                              shift_radius_range=(1, 3))
        corrupted, logs = corrupt_dataset(sorted(masks), masks.__getitem__, plan, 0)
        assert len(corrupted) == 10
        assert all(log.error_type == "shift" for log in logs)
        assert all(log.pixels_changed > 0 for log in logs)

    def test_swap_skips_single_class_images(self):
        masks = {
            "only": np.full((4, 4), 1),  # one non-unlabeled class: ineligible
            "rich": np.array([[1, 2], [1, 2]]),
        }
        plan = CorruptionPlan(error_type="swap", proportion=0.5, seed=1)
        corrupted, _ = corrupt_dataset(sorted(masks), masks.__getitem__, plan, 0)
        assert list(corrupted) == ["rich"]

    def test_infeasible_plan(self):
        masks = {"a": np.full((4, 4), 1), "b": np.full((4, 4), 2)}
        plan = CorruptionPlan(error_type="swap", proportion=1.0, seed=1)
        with pytest.raises(InfeasiblePlanError):
            corrupt_dataset(sorted(masks), masks.__getitem__, plan, 0)

    def test_never_targets_unlabeled(self):
        rng = np.random.default_rng(8)
        masks = _toy_dataset(rng, 30)
        for error_type in ("drop", "swap", "shift"):
            plan = CorruptionPlan(error_type=error_type, proportion=1.0, seed=9,
                                  shift_radius_range=(1, 4))
            _, logs = corrupt_dataset(sorted(masks), masks.__getitem__, plan, 0)
            for log in logs:
                params = log.params
                if log.error_type == "drop":
                    assert params["dropped_class"] != 0
                elif log.error_type == "swap":
                    assert 0 not in (params["class_a"], params["class_b"])
                elif log.error_type == "shift":
                    assert params["class"] != 0

    def test_bad_plans(self):
        with pytest.raises(ValidationError):
            CorruptionPlan(error_type="drop", proportion=0.0, seed=1)
        with pytest.raises(ValidationError):
            CorruptionPlan(error_type="drop", proportion=1.5, seed=1)
        with pytest.raises(ValidationError):
            CorruptionPlan(error_type="typo", proportion=0.5, seed=1)
        with pytest.raises(ValidationError):
            CorruptionPlan(error_type="shift", proportion=0.5, seed=1,
                           shift_radius_range=(0, 3))
