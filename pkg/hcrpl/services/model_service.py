# 模型服务模块 - 线性 softmax 分类器、数据增强和小批量 SGD 训练
from dataclasses import dataclass
from typing import Optional, Tuple

import numpy as np
from pydantic import ValidationError

from hcrpl.schemas.model import Checkpoint, TrainConfig
from hcrpl.services.dataset_service import ABSENT, DomainDataset, TrainingSet
from hcrpl.utils.errors import (
    DimensionMismatch,
    EmptyTrainingSet,
    LabelOutOfRange,
    NonFiniteParams,
    SchemaError,
)
from hcrpl.utils.logging import get_logger
from hcrpl.utils.random import STREAM_INIT, STREAM_TRAIN, derive_rng
from hcrpl.utils.serialization import PathLike, read_json, write_json


logger = get_logger(__name__)

PROB_CLAMP = 1e-12
INIT_STD = 0.01


@dataclass(frozen=True, eq=False)
class ModelParams:
    """Weights ``(C, D)`` and bias ``(C,)`` of the linear softmax classifier."""

    weights: np.ndarray
    bias: np.ndarray

    def __post_init__(self) -> None:
        weights = np.array(self.weights, dtype=np.float64)
        bias = np.array(self.bias, dtype=np.float64).reshape(-1)
        if weights.ndim != 2 or weights.shape[0] != bias.shape[0]:
            raise DimensionMismatch(
                f"weights {weights.shape} and bias {bias.shape} disagree on the class count"
            )
        if not (np.all(np.isfinite(weights)) and np.all(np.isfinite(bias))):
            raise NonFiniteParams("model parameters must be finite")
        weights.setflags(write=False)
        bias.setflags(write=False)
        object.__setattr__(self, "weights", weights)
        object.__setattr__(self, "bias", bias)

    @property
    def n_classes(self) -> int:
        return int(self.weights.shape[0])

    @property
    def dim(self) -> int:
        return int(self.weights.shape[1])

    def equals(self, other: "ModelParams") -> bool:
        """Bit-for-bit equality."""
        return bool(
            np.array_equal(self.weights, other.weights) and np.array_equal(self.bias, other.bias)
        )

    def to_checkpoint(self) -> Checkpoint:
        return Checkpoint(
            C=self.n_classes,
            D=self.dim,
            weights=self.weights.tolist(),
            bias=self.bias.tolist(),
        )

    @classmethod
    def from_checkpoint(cls, checkpoint: Checkpoint) -> "ModelParams":
        params = cls(weights=checkpoint.weights, bias=checkpoint.bias)
        if params.n_classes != checkpoint.C or params.dim != checkpoint.D:
            raise SchemaError("checkpoint shape does not match its declared C and D")
        return params


def init_params(n_classes: int, dim: int, seed: int) -> ModelParams:
    """Small Gaussian weights, zero bias."""
    if n_classes < 2 or dim < 1:
        raise DimensionMismatch(f"need C >= 2 and D >= 1, got C={n_classes}, D={dim}")
    rng = derive_rng(seed, STREAM_INIT)
    return ModelParams(
        weights=INIT_STD * rng.standard_normal((n_classes, dim)),
        bias=np.zeros(n_classes),
    )


def _check_dim(params: ModelParams, x: np.ndarray) -> None:
    if x.shape[-1] != params.dim:
        raise DimensionMismatch(
            f"expected {params.dim} features, got {x.shape[-1]}",
            {"expected": params.dim, "actual": int(x.shape[-1])},
        )


def softmax(logits: np.ndarray) -> np.ndarray:
    """Row-wise softmax, shifted by the row maximum."""
    shifted = logits - logits.max(axis=-1, keepdims=True)
    exp = np.exp(shifted)
    return exp / exp.sum(axis=-1, keepdims=True)


def predict_proba(params: ModelParams, x: np.ndarray) -> np.ndarray:
    """``softmax(W x + b)`` for one sample ``(D,)`` or a batch ``(N, D)``."""
    x = np.asarray(x, dtype=np.float64)
    _check_dim(params, x)
    return softmax(x @ params.weights.T + params.bias)


def predict_labels(params: ModelParams, x: np.ndarray) -> np.ndarray:
    """Argmax class per row (lowest index on ties)."""
    return np.argmax(predict_proba(params, x), axis=-1)


def augment(x: np.ndarray, rng: np.random.Generator, augment_std: float) -> np.ndarray:
    """Add iid Gaussian noise; ``augment_std == 0`` draws nothing and returns a copy."""
    x = np.array(x, dtype=np.float64)
    if augment_std == 0:
        return x
    return x + augment_std * rng.standard_normal(x.shape)


def _cross_entropy(probs: np.ndarray, labels: np.ndarray) -> np.ndarray:
    picked = probs[np.arange(labels.shape[0]), labels]
    return -np.log(np.clip(picked, PROB_CLAMP, 1.0))


def _check_labels(params: ModelParams, labels: np.ndarray) -> None:
    if labels.size and (labels.min() < 0 or labels.max() >= params.n_classes):
        raise LabelOutOfRange(f"training labels must lie in [0, {params.n_classes})")


def loss_and_grad(
    params: ModelParams,
    x: np.ndarray,
    labels: np.ndarray,
    weight_decay: float = 0.0,
) -> Tuple[float, np.ndarray, np.ndarray]:
    """Mean cross-entropy plus ``weight_decay / 2 * ||W||^2`` and its gradient."""
    x = np.asarray(x, dtype=np.float64)
    labels = np.asarray(labels, dtype=np.int64)
    _check_dim(params, x)
    _check_labels(params, labels)
    n = labels.shape[0]
    probs = predict_proba(params, x)
    loss = float(_cross_entropy(probs, labels).mean())
    loss += 0.5 * weight_decay * float(np.sum(params.weights ** 2))

    dlogits = probs.copy()
    dlogits[np.arange(n), labels] -= 1.0
    dlogits /= n
    grad_w = dlogits.T @ x + weight_decay * params.weights
    grad_b = dlogits.sum(axis=0)
    return loss, grad_w, grad_b


def sgd_epoch(
    params: ModelParams,
    train_set: TrainingSet,
    cfg: TrainConfig,
    rng: Optional[np.random.Generator] = None,
    learning_rate: Optional[float] = None,
) -> ModelParams:
    """One shuffled pass over ``train_set`` with heavy-ball momentum.

    Every row is augmented once per visit. Velocity starts at zero for each
    call; ``params`` is left untouched. Without ``rng`` the pass draws from
    the ``cfg.seed`` training stream.
    """
    n = len(train_set)
    if n == 0:
        raise EmptyTrainingSet("cannot train on an empty training set")
    _check_dim(params, train_set.features)
    lr = cfg.learning_rate if learning_rate is None else learning_rate
    if rng is None:
        rng = derive_rng(cfg.seed, STREAM_TRAIN)

    order = rng.permutation(n)
    x = augment(train_set.features[order], rng, cfg.augment_std)
    labels = train_set.labels[order]

    weights = params.weights.copy()
    bias = params.bias.copy()
    vel_w = np.zeros_like(weights)
    vel_b = np.zeros_like(bias)
    for start in range(0, n, cfg.batch_size):
        batch = slice(start, start + cfg.batch_size)
        _, grad_w, grad_b = loss_and_grad(
            ModelParams(weights=weights, bias=bias), x[batch], labels[batch], cfg.weight_decay
        )
        vel_w = cfg.momentum * vel_w + grad_w
        vel_b = cfg.momentum * vel_b + grad_b
        weights = weights - lr * vel_w
        bias = bias - lr * vel_b
    return ModelParams(weights=weights, bias=bias)


def mixed_loss(
    params: ModelParams,
    source_set: TrainingSet,
    pseudo_set: Optional[TrainingSet] = None,
) -> float:
    """Pooled mean cross-entropy over the source and pseudo-labeled rows."""
    combined = source_set if pseudo_set is None else source_set.union(pseudo_set)
    if len(combined) == 0:
        return 0.0
    _check_dim(params, combined.features)
    _check_labels(params, combined.labels)
    probs = predict_proba(params, combined.features)
    return float(_cross_entropy(probs, combined.labels).mean())


def accuracy(params: ModelParams, ds: DomainDataset) -> float:
    """Accuracy against source labels, or hidden labels for a target set."""
    truth = ds.labels if ds.hidden_labels is None else ds.hidden_labels
    if len(ds) == 0 or np.any(truth == ABSENT):
        raise LabelOutOfRange("accuracy needs a label for every sample")
    return float(np.mean(predict_labels(params, ds.features) == truth))


def save_checkpoint(params: ModelParams, path: PathLike) -> None:
    """Write the JSON checkpoint ``{"C", "D", "weights", "bias"}``."""
    write_json(path, params.to_checkpoint().model_dump())


def load_checkpoint(path: PathLike) -> ModelParams:
    """Read a checkpoint written by :func:`save_checkpoint`."""
    try:
        checkpoint = Checkpoint.model_validate(read_json(path))
    except ValidationError as e:
        raise SchemaError(f"{path}: invalid checkpoint: {e.errors()[0]['msg']}") from e
    return ModelParams.from_checkpoint(checkpoint)
