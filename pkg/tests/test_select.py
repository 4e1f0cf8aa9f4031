# 伪标签选择测试 - 测试比例调度、类别阈值、类别平衡选择和穷举参考实现
import math

import numpy as np
import pytest

from hcrpl.schemas.run import PortionSchedule
from hcrpl.services.selection_service import (
    NO_SELECTION,
    PseudoLabelSet,
    cbst_select,
    class_thresholds,
    portion_at_round,
    selection_rank,
)
from hcrpl.utils.errors import InvalidArgument, LabelOutOfRange


def exhaustive_select(ids, z, thresholds):
    """Evaluate every one-hot candidate and keep the best feasible one.

    Choosing ``y`` for sample ``i`` gains ``z_ic / t_c - 1`` (scaled score
    minus the cost of labeling); leaving it unlabeled gains 0. Ties between
    classes go to the lowest index, ties with "unlabeled" go to labeling.
    """
    selected = {}
    for i, row in zip(ids, z):
        best_gain, best_class = None, None
        for c, (value, threshold) in enumerate(zip(row, thresholds)):
            gain = (value / threshold if math.isfinite(threshold) else 0.0) - 1.0
            if best_gain is None or gain > best_gain:
                best_gain, best_class = gain, c
        if best_gain >= 0.0:
            selected[int(i)] = best_class
    return selected


def reference_thresholds(z, portion):
    thresholds = []
    for c in range(z.shape[1]):
        values = sorted((row.max() for row in z if int(np.argmax(row)) == c), reverse=True)
        if not values:
            thresholds.append(math.inf)
            continue
        rank = max(1, math.ceil(round(portion * len(values) / 100.0, 9)))
        thresholds.append(values[min(rank, len(values)) - 1])
    return np.array(thresholds)


class TestPortionSchedule:
    """Test the selection percentage schedule."""

    @pytest.mark.parametrize("r,expected", [(1, 15), (2, 20), (15, 85), (16, 90), (30, 90)])
    def test_default_schedule(self, r, expected):
        assert portion_at_round(r) == expected

    def test_custom_schedule(self):
        assert portion_at_round(3, PortionSchedule(slope=10, intercept=0, cap=50)) == 30

    def test_round_zero_rejected(self):
        with pytest.raises(InvalidArgument):
            portion_at_round(0)

    @pytest.mark.parametrize("portion,n,expected", [(50, 4, 2), (15, 10, 2), (100, 7, 7), (1, 3, 1), (90, 10, 9)])
    def test_selection_rank(self, portion, n, expected):
        assert selection_rank(portion, n) == expected


class TestClassThresholds:
    """Test per-class confidence thresholds."""

    def test_rank_example(self):
        z = np.array([[0.9, 0.05, 0.05], [0.8, 0.1, 0.1], [0.6, 0.2, 0.2], [0.4, 0.3, 0.3]])
        assert class_thresholds(z, 50)[0] == 0.8

    def test_full_portion_takes_minimum(self):
        z = np.array([[0.9, 0.1], [0.7, 0.3], [0.2, 0.8], [0.4, 0.6]])
        thresholds = class_thresholds(z, 100)
        assert thresholds.tolist() == [0.7, 0.6]

    def test_class_without_winners(self):
        z = np.array([[0.9, 0.05, 0.05], [0.2, 0.7, 0.1]])
        thresholds = class_thresholds(z, 50)
        assert thresholds[2] == NO_SELECTION
        selected = cbst_select([1, 2], z, thresholds)
        assert 2 not in selected.entries.values()

    @pytest.mark.parametrize("portion", [0, -5, 101])
    def test_invalid_portion(self, portion):
        with pytest.raises(InvalidArgument):
            class_thresholds(np.array([[0.5, 0.5]]), portion)


class TestCbstSelect:
    """Test class-balanced selection on scaled scores."""

    def test_unit_thresholds_select_one_hot_only(self):
        z = np.array([[1.0, 0.0], [0.9, 0.1], [0.0, 1.0]])
        selected = cbst_select([1, 2, 3], z, [1.0, 1.0])
        assert selected.entries == {1: 0, 3: 1}

    def test_hand_example(self):
        z = np.array([[0.9, 0.1], [0.8, 0.2], [0.6, 0.4]])
        selected = cbst_select([1, 2, 3], z, [0.8, NO_SELECTION])
        assert selected.entries == {1: 0, 2: 0}

    def test_scaled_argmax_flip_below_one(self):
        selected = cbst_select([1], np.array([[0.55, 0.45]]), [0.9, 0.5])
        assert selected.entries == {}

    def test_scaled_argmax_flip_selected(self):
        # raw argmax is class 0, the scaled winner is class 1
        selected = cbst_select([1], np.array([[0.55, 0.45]]), [0.9, 0.4])
        assert selected.entries == {1: 1}

    def test_selection_counts_follow_portion(self, rng):
        z = rng.dirichlet(np.ones(3), size=200)
        thresholds = class_thresholds(z, 40)
        selected = cbst_select(np.arange(200), z, thresholds)
        winners = np.argmax(z, axis=1)
        for c in range(3):
            n_c = int(np.sum(winners == c))
            confident = int(np.sum(z[winners == c, c] >= thresholds[c]))
            assert confident == selection_rank(40, n_c)
        scaled = z / thresholds
        for i, label in selected.entries.items():
            assert label == int(np.argmax(scaled[i]))
            assert scaled[i, label] >= 1.0

    def test_matches_exhaustive_oracle(self, rng):
        for _ in range(200):
            n = int(rng.integers(1, 21))
            c = int(rng.integers(2, 5))
            z = rng.dirichlet(np.ones(c), size=n)
            portion = float(rng.choice([15, 35, 50, 90]))
            thresholds = class_thresholds(z, portion)
            np.testing.assert_array_equal(thresholds, reference_thresholds(z, portion))
            ids = rng.permutation(1000)[:n]
            assert cbst_select(ids, z, thresholds).entries == exhaustive_select(ids, z, thresholds)

    def test_monotone_in_portion(self, rng):
        z = rng.dirichlet(np.ones(4), size=60)
        small = class_thresholds(z, 20)
        large = class_thresholds(z, 60)
        assert np.all(large <= small)
        before = cbst_select(np.arange(60), z, small).entries
        after = cbst_select(np.arange(60), z, large).entries
        assert set(before) <= set(after)

    def test_shape_mismatch(self):
        with pytest.raises(InvalidArgument):
            cbst_select([1, 2], np.array([[0.5, 0.5]]), [0.5, 0.5])


class TestPseudoLabelSet:
    """Test the pseudo-labeled set container."""

    def test_class_counts(self):
        assert PseudoLabelSet(round=1, entries={1: 0, 2: 2, 3: 2}).class_counts(3) == [1, 0, 2]

    def test_class_counts_out_of_range(self):
        with pytest.raises(LabelOutOfRange):
            PseudoLabelSet(round=1, entries={1: 3}).class_counts(3)

    def test_merge_prefers_new_labels(self):
        old = PseudoLabelSet(round=1, entries={1: 0, 2: 1})
        new = PseudoLabelSet(round=2, entries={2: 0, 3: 1})
        merged = new.merged_with(old)
        assert merged.round == 2
        assert merged.entries == {1: 0, 2: 0, 3: 1}
