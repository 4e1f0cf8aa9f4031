# 自适应预测校准测试 - 测试难度比、校准算例、不动点性质和退化类别
import numpy as np
import pytest

from hcrpl.services.apc_service import (
    PROPORTION_FLOOR,
    calibrate,
    difficulty_ratio,
    predictive_distribution,
)
from hcrpl.utils.errors import DegenerateClass, DimensionMismatch, EmptyPredictions


class TestDifficultyRatio:
    """Test R = q / p(y)."""

    def test_matched_uniform(self):
        preds = np.array([[0.7, 0.1, 0.2], [0.1, 0.5, 0.4], [0.2, 0.4, 0.4]])
        np.testing.assert_allclose(difficulty_ratio([1 / 3] * 3, preds), [1.0, 1.0, 1.0], atol=1e-12)

    def test_hand_arithmetic(self):
        ratio = difficulty_ratio([0.5, 0.5], [[0.9, 0.1], [0.7, 0.3]])
        np.testing.assert_allclose(predictive_distribution([[0.9, 0.1], [0.7, 0.3]]), [0.8, 0.2], atol=1e-15)
        np.testing.assert_allclose(ratio, [0.625, 2.5], atol=1e-12)

    def test_exact_match(self):
        preds = np.tile([0.75, 0.25], (5, 1))
        np.testing.assert_allclose(difficulty_ratio([0.75, 0.25], preds), [1.0, 1.0], atol=1e-12)

    def test_empty_predictions(self):
        with pytest.raises(EmptyPredictions):
            difficulty_ratio([0.5, 0.5], np.zeros((0, 2)))

    def test_dimension_mismatch(self):
        with pytest.raises(DimensionMismatch):
            difficulty_ratio([0.5, 0.5], [[0.2, 0.3, 0.5]])

    def test_zero_prior_entry(self):
        with pytest.raises(DegenerateClass):
            difficulty_ratio([1.0, 0.0], [[0.5, 0.5]])

    def test_collapsed_class_is_clamped(self):
        preds = [[0.5, 0.5, 0.0], [0.4, 0.6, 0.0]]
        ratio = difficulty_ratio([0.4, 0.4, 0.2], preds)
        assert np.all(np.isfinite(ratio))
        assert ratio[2] == pytest.approx(0.2 / PROPORTION_FLOOR)

    def test_total_collapse(self):
        with pytest.raises(DegenerateClass):
            difficulty_ratio([0.5, 0.5], [[1.0, 0.0], [1.0, 0.0]])


class TestCalibrate:
    """Test Normalization(R * p)."""

    def test_identity_ratio(self, rng):
        p = rng.dirichlet(np.ones(4), size=10)
        np.testing.assert_allclose(calibrate(p, np.ones(4)), p, atol=1e-12)

    def test_first_example(self):
        out = calibrate([0.9, 0.1], [0.625, 2.5])
        np.testing.assert_allclose(out, [0.5625 / 0.8125, 0.25 / 0.8125], atol=1e-12)
        assert out[0] == pytest.approx(0.692307, abs=1e-6)

    def test_second_example(self):
        out = calibrate([0.7, 0.3], [0.625, 2.5])
        np.testing.assert_allclose(out, [0.4375 / 1.1875, 0.75 / 1.1875], atol=1e-12)
        assert out[1] == pytest.approx(0.631578, abs=1e-6)

    def test_dimension_mismatch(self):
        with pytest.raises(DimensionMismatch):
            calibrate([0.5, 0.5], [1.0, 1.0, 1.0])

    def test_fixed_point(self, rng):
        for _ in range(1000):
            c = int(rng.integers(2, 11))
            q = rng.dirichlet(np.ones(c))
            p = rng.dirichlet(np.ones(c))
            preds = np.tile(p, (int(rng.integers(1, 6)), 1))
            ratio = difficulty_ratio(q, preds)
            np.testing.assert_allclose(calibrate(preds, ratio), np.tile(q, (preds.shape[0], 1)), atol=1e-12)

    def test_output_is_distribution(self, rng):
        for _ in range(1000):
            c = int(rng.integers(2, 11))
            q = rng.dirichlet(np.ones(c))
            preds = rng.dirichlet(np.ones(c), size=int(rng.integers(1, 20)))
            out = calibrate(preds, difficulty_ratio(q, preds))
            assert np.all(out >= 0)
            np.testing.assert_allclose(out.sum(axis=1), 1.0, atol=1e-12)

    def test_moves_balanced_batch_toward_prior(self):
        # under-predicted class 1 gains mass after calibration
        preds = np.array([[0.9, 0.1], [0.8, 0.2], [0.6, 0.4], [0.3, 0.7]])
        q = np.array([0.5, 0.5])
        before = preds.mean(axis=0)
        after = calibrate(preds, difficulty_ratio(q, preds)).mean(axis=0)
        assert np.abs(after - q).sum() < np.abs(before - q).sum()
