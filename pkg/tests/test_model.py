# 模型服务测试 - 测试初始化、softmax 预测、数据增强、梯度检查、SGD 训练和检查点
import math

import numpy as np
import pytest

from hcrpl.schemas.model import TrainConfig
from hcrpl.services.dataset_service import TrainingSet
from hcrpl.services.model_service import (
    ModelParams,
    accuracy,
    augment,
    init_params,
    load_checkpoint,
    loss_and_grad,
    mixed_loss,
    predict_proba,
    save_checkpoint,
    sgd_epoch,
)
from hcrpl.utils.errors import (
    DimensionMismatch,
    EmptyTrainingSet,
    LabelOutOfRange,
    NonFiniteParams,
    SchemaError,
)
from hcrpl.utils.random import STREAM_TRAIN, derive_rng


def training_set(x, y, start_id=0) -> TrainingSet:
    x = np.asarray(x, dtype=np.float64)
    return TrainingSet(ids=np.arange(start_id, start_id + len(x)), features=x, labels=y)


def separable_blobs(n_per_class=50, seed=0) -> TrainingSet:
    rng = np.random.default_rng(seed)
    x = np.vstack([rng.normal([-3, 0], 1.0, (n_per_class, 2)), rng.normal([3, 0], 1.0, (n_per_class, 2))])
    y = np.repeat([0, 1], n_per_class)
    return training_set(x, y)


class TestInitAndPredict:
    """Test parameter initialization and softmax predictions."""

    def test_init_shape_and_bias(self):
        params = init_params(3, 5, seed=11)
        assert params.weights.shape == (3, 5)
        assert params.bias.tolist() == [0.0, 0.0, 0.0]

    def test_init_deterministic(self):
        assert init_params(3, 5, seed=11).equals(init_params(3, 5, seed=11))
        assert not init_params(3, 5, seed=11).equals(init_params(3, 5, seed=12))

    def test_zero_params_uniform(self):
        params = ModelParams(weights=np.zeros((4, 3)), bias=np.zeros(4))
        np.testing.assert_allclose(predict_proba(params, [1.0, -2.0, 3.0]), [0.25] * 4, atol=1e-15)

    def test_bias_log_two(self):
        params = ModelParams(weights=np.zeros((2, 1)), bias=[math.log(2), 0.0])
        np.testing.assert_allclose(predict_proba(params, [0.7]), [2 / 3, 1 / 3], atol=1e-12)

    def test_shift_invariance(self, rng):
        params = ModelParams(weights=rng.normal(size=(3, 4)), bias=rng.normal(size=3))
        shifted = ModelParams(weights=params.weights, bias=params.bias + 123.0)
        x = rng.normal(size=(10, 4))
        np.testing.assert_allclose(predict_proba(params, x), predict_proba(shifted, x), atol=1e-12)

    def test_dimension_mismatch(self):
        with pytest.raises(DimensionMismatch):
            predict_proba(init_params(2, 3, seed=0), [1.0, 2.0])

    def test_non_finite_params_rejected(self):
        with pytest.raises(NonFiniteParams) as exc:
            ModelParams(weights=[[np.nan, 0.0], [0.0, 0.0]], bias=[0.0, 0.0])
        assert exc.value.exit_code == 1
        assert exc.value.to_report().error_code == "NON_FINITE_PARAMS"

    def test_params_read_only(self):
        params = init_params(2, 2, seed=0)
        with pytest.raises(ValueError):
            params.weights[0, 0] = 1.0


class TestAugment:
    """Test Gaussian feature augmentation."""

    def test_zero_std_identity(self):
        x = np.array([[1.0, 2.0]])
        rng = np.random.default_rng(0)
        state = rng.bit_generator.state
        assert np.array_equal(augment(x, rng, 0.0), x)
        assert rng.bit_generator.state == state

    def test_deterministic(self):
        x = np.ones((3, 2))
        a = augment(x, np.random.default_rng(5), 0.5)
        b = augment(x, np.random.default_rng(5), 0.5)
        assert np.array_equal(a, b)

    def test_empirical_std(self):
        x = np.zeros((10_000, 1))
        noise = augment(x, np.random.default_rng(1), 0.5) - x
        assert abs(noise.std() - 0.5) <= 0.05 * 0.5


class TestLoss:
    """Test the pooled cross-entropy objective and its gradient."""

    def test_perfect_predictions(self):
        params = ModelParams(weights=np.array([[100.0], [-100.0]]), bias=np.zeros(2))
        loss = mixed_loss(params, training_set([[1.0], [-1.0]], [0, 1]))
        assert 0.0 <= loss <= 1.2e-11

    def test_uniform_predictions(self):
        params = ModelParams(weights=np.zeros((3, 2)), bias=np.zeros(3))
        loss = mixed_loss(params, training_set([[1.0, 2.0], [3.0, 4.0]], [0, 2]))
        assert loss == pytest.approx(math.log(3), abs=1e-12)

    def test_pooled_average(self):
        params = ModelParams(weights=np.zeros((2, 1)), bias=np.zeros(2))
        one_hot = ModelParams(weights=np.array([[100.0], [-100.0]]), bias=np.zeros(2))
        # per-sample losses 0 and ln 2
        x = [[1.0], [0.0]]
        loss = mixed_loss(one_hot, training_set(x, [0, 0]))
        assert loss == pytest.approx(math.log(2) / 2, abs=1e-11)
        assert mixed_loss(params, training_set(x, [0, 1])) == pytest.approx(math.log(2), abs=1e-12)

    def test_pseudo_rows_pool_with_source(self):
        params = ModelParams(weights=np.zeros((2, 1)), bias=[math.log(3), 0.0])
        source = training_set([[0.0]], [0])
        pseudo = training_set([[0.0]], [1], start_id=10)
        expected = (-math.log(0.75) - math.log(0.25)) / 2
        assert mixed_loss(params, source, pseudo) == pytest.approx(expected, abs=1e-12)

    def test_loss_matches_mixed_loss(self, rng):
        params = ModelParams(weights=rng.normal(size=(3, 4)), bias=rng.normal(size=3))
        ts = training_set(rng.normal(size=(6, 4)), rng.integers(0, 3, 6))
        loss, _, _ = loss_and_grad(params, ts.features, ts.labels)
        assert loss == pytest.approx(mixed_loss(params, ts), abs=1e-12)

    def test_label_out_of_range(self):
        params = init_params(2, 1, seed=0)
        with pytest.raises(LabelOutOfRange):
            loss_and_grad(params, [[1.0]], [2])

    def test_gradient_check(self, rng):
        h = 1e-5
        for _ in range(20):
            c, d = int(rng.integers(2, 5)), int(rng.integers(1, 5))
            params = ModelParams(weights=rng.normal(size=(c, d)), bias=rng.normal(size=c))
            x = rng.normal(size=(1, d))
            y = rng.integers(0, c, 1)
            _, grad_w, grad_b = loss_and_grad(params, x, y)

            def f(w, b):
                return mixed_loss(ModelParams(weights=w, bias=b), training_set(x, y))

            for i in range(c):
                for j in range(d):
                    plus = params.weights.copy()
                    minus = params.weights.copy()
                    plus[i, j] += h
                    minus[i, j] -= h
                    numeric = (f(plus, params.bias) - f(minus, params.bias)) / (2 * h)
                    assert abs(numeric - grad_w[i, j]) <= max(1e-6 * abs(numeric), 1e-8)
                plus_b = params.bias.copy()
                minus_b = params.bias.copy()
                plus_b[i] += h
                minus_b[i] -= h
                numeric = (f(params.weights, plus_b) - f(params.weights, minus_b)) / (2 * h)
                assert abs(numeric - grad_b[i]) <= max(1e-6 * abs(numeric), 1e-8)

    def test_weight_decay_gradient(self, rng):
        params = ModelParams(weights=rng.normal(size=(2, 3)), bias=np.zeros(2))
        x, y = rng.normal(size=(4, 3)), np.array([0, 1, 1, 0])
        _, plain, _ = loss_and_grad(params, x, y)
        _, decayed, _ = loss_and_grad(params, x, y, weight_decay=0.1)
        np.testing.assert_allclose(decayed - plain, 0.1 * params.weights, atol=1e-12)


class TestSgdEpoch:
    """Test one epoch of minibatch SGD with momentum."""

    def test_zero_learning_rate(self):
        params = init_params(2, 2, seed=0)
        cfg = TrainConfig(learning_rate=0.0)
        out = sgd_epoch(params, separable_blobs(), cfg, np.random.default_rng(0))
        assert out.equals(params)

    def test_override_learning_rate(self):
        params = init_params(2, 2, seed=0)
        out = sgd_epoch(params, separable_blobs(), TrainConfig(learning_rate=0.05), np.random.default_rng(0), 0.0)
        assert out.equals(params)

    def test_empty_training_set(self):
        with pytest.raises(EmptyTrainingSet):
            sgd_epoch(init_params(2, 2, seed=0), TrainingSet.empty(2), TrainConfig(), np.random.default_rng(0))

    def test_loss_decreases(self):
        data = separable_blobs()
        cfg = TrainConfig(learning_rate=0.05, momentum=0.0, weight_decay=0.0, augment_std=0.0, batch_size=10)
        params = init_params(2, 2, seed=0)
        losses = [mixed_loss(params, data)]
        for epoch in range(5):
            params = sgd_epoch(params, data, cfg, derive_rng(0, 2, epoch))
            losses.append(mixed_loss(params, data))
        assert all(b < a for a, b in zip(losses, losses[1:]))

    def test_deterministic(self):
        data = separable_blobs()
        cfg = TrainConfig()
        a = b = init_params(2, 2, seed=1)
        for epoch in range(3):
            a = sgd_epoch(a, data, cfg, derive_rng(1, 2, epoch))
            b = sgd_epoch(b, data, cfg, derive_rng(1, 2, epoch))
        assert a.equals(b)

    def test_seed_stream_without_rng(self):
        data = separable_blobs()
        params = init_params(2, 2, seed=0)
        implicit = sgd_epoch(params, data, TrainConfig(seed=4))
        explicit = sgd_epoch(params, data, TrainConfig(seed=4), derive_rng(4, STREAM_TRAIN))
        assert implicit.equals(explicit)
        assert not implicit.equals(sgd_epoch(params, data, TrainConfig(seed=5)))

    def test_input_params_untouched(self):
        params = init_params(2, 2, seed=0)
        before = params.weights.copy()
        sgd_epoch(params, separable_blobs(), TrainConfig(), np.random.default_rng(0))
        assert np.array_equal(params.weights, before)


class TestCheckpoint:
    """Test checkpoint persistence."""

    def test_round_trip(self, tmp_path, rng):
        params = ModelParams(weights=rng.normal(size=(3, 2)), bias=rng.normal(size=3))
        path = tmp_path / "model.json"
        save_checkpoint(params, path)
        assert load_checkpoint(path).equals(params)

    def test_shape_mismatch(self, tmp_path):
        path = tmp_path / "model.json"
        path.write_text('{"C": 3, "D": 1, "weights": [[0.0], [0.0]], "bias": [0.0, 0.0]}', encoding="utf-8")
        with pytest.raises(SchemaError):
            load_checkpoint(path)

    def test_missing_field(self, tmp_path):
        path = tmp_path / "model.json"
        path.write_text('{"C": 2, "D": 1, "weights": [[0.0], [0.0]]}', encoding="utf-8")
        with pytest.raises(SchemaError):
            load_checkpoint(path)

    def test_malformed_json(self, tmp_path):
        path = tmp_path / "model.json"
        path.write_text('{"C": 2, "D": 1, "weights": [[0.0]', encoding="utf-8")
        with pytest.raises(SchemaError) as exc:
            load_checkpoint(path)
        assert exc.value.details == {"path": str(path)}

    def test_invalid_utf8(self, tmp_path):
        path = tmp_path / "model.json"
        path.write_bytes(b'{"C": "\xff"}')
        with pytest.raises(SchemaError):
            load_checkpoint(path)

    def test_nan_weights(self, tmp_path):
        path = tmp_path / "model.json"
        path.write_text('{"C": 2, "D": 1, "weights": [[NaN], [0.0]], "bias": [0.0, 0.0]}', encoding="utf-8")
        with pytest.raises(NonFiniteParams):
            load_checkpoint(path)


def test_accuracy_on_source(small_pair):
    source, target = small_pair
    params = init_params(3, 4, seed=0)
    data = TrainingSet.from_dataset(source)
    for epoch in range(10):
        params = sgd_epoch(params, data, TrainConfig(), derive_rng(0, 1, epoch))
    assert accuracy(params, source) >= 0.98
    assert 0.0 <= accuracy(params, target) <= 1.0
