# 集成预测服务模块 - 自集成(两次增强、校准、平均、锐化)与时序集成(EMA)
from dataclasses import dataclass, replace
from typing import Dict, Optional

import numpy as np

from hcrpl.services.apc_service import calibrate, difficulty_ratio
from hcrpl.services.dataset_service import DomainDataset
from hcrpl.services.model_service import ModelParams, augment, predict_proba
from hcrpl.services.prob_core import ArrayLike, argmax_stable, prob_vector, sharpen
from hcrpl.utils.errors import EmptyPredictions, InvalidArgument, UnknownId
from hcrpl.utils.logging import get_logger, summarize_vector


logger = get_logger(__name__)


@dataclass(frozen=True)
class PredictionPass:
    """Output of one predicting phase."""

    probs: np.ndarray
    ratio: Optional[np.ndarray] = None


def se_predict(
    params: ModelParams,
    targets: DomainDataset,
    q: ArrayLike,
    temperature: float,
    rng: np.random.Generator,
    augment_std: float = 0.0,
    use_apc: bool = True,
    use_se: bool = True,
) -> PredictionPass:
    """Predicting phase over every target sample, in target order.

    With ``use_se`` the targets are augmented twice, ``p(y)`` is taken over
    both passes, both are calibrated by the same ratio, then averaged. Without
    it a single un-augmented pass is used. Sharpening is applied last in both
    cases.
    """
    if len(targets) == 0:
        raise EmptyPredictions("no target samples to predict")

    if use_se:
        first = predict_proba(params, augment(targets.features, rng, augment_std))
        second = predict_proba(params, augment(targets.features, rng, augment_std))
        ratio = difficulty_ratio(q, np.vstack([first, second])) if use_apc else None
        if ratio is not None:
            first = calibrate(first, ratio)
            second = calibrate(second, ratio)
        averaged = (first + second) / 2.0
    else:
        averaged = predict_proba(params, targets.features)
        ratio = difficulty_ratio(q, averaged) if use_apc else None
        if ratio is not None:
            averaged = calibrate(averaged, ratio)

    if ratio is not None:
        logger.debug("Difficulty ratio", ratio=summarize_vector(ratio))
    return PredictionPass(probs=sharpen(averaged, temperature), ratio=ratio)


@dataclass(frozen=True, eq=False)
class EnsembleStore:
    """EMA table ``Z`` of per-target predictions, rows aligned with ``ids``."""

    alpha: float
    ids: np.ndarray = None
    values: np.ndarray = None

    def __post_init__(self) -> None:
        if not 0.0 <= self.alpha < 1.0:
            raise InvalidArgument(f"EMA momentum must lie in [0, 1), got {self.alpha}")

    @property
    def initialized(self) -> bool:
        return self.values is not None

    def index_of(self) -> Dict[int, int]:
        return {int(i): row for row, i in enumerate(self.ids)}

    def proportion(self) -> np.ndarray:
        """Predictive class proportion of the stored predictions."""
        counts = np.bincount(argmax_stable(self.values), minlength=self.values.shape[1])
        return counts / self.values.shape[0]


def te_update(
    store: EnsembleStore,
    ids: ArrayLike,
    fresh: ArrayLike,
    alpha: Optional[float] = None,
) -> EnsembleStore:
    """``Z[id] <- α Z[id] + (1 - α) fresh[id]``; the first call stores ``fresh`` as is.

    ``alpha`` overrides the store momentum for this update (0 disables the
    temporal average). Returns a new store.
    """
    ids = np.asarray(ids, dtype=np.int64).reshape(-1)
    fresh = np.asarray(fresh, dtype=np.float64)
    if fresh.ndim != 2 or fresh.shape[0] != ids.shape[0]:
        raise InvalidArgument("fresh predictions must have one row per id")
    fresh = prob_vector(fresh, store.values.shape[1] if store.initialized else None)

    if not store.initialized:
        if len(np.unique(ids)) != ids.shape[0]:
            raise InvalidArgument("ensemble ids must be unique")
        return replace(store, ids=ids.copy(), values=fresh.copy())

    momentum = store.alpha if alpha is None else alpha
    index = store.index_of()
    missing = [int(i) for i in ids if int(i) not in index]
    if missing:
        raise UnknownId(f"ids not in the ensemble store: {missing[:5]}", {"missing": len(missing)})
    rows = np.array([index[int(i)] for i in ids], dtype=np.int64)
    values = store.values.copy()
    values[rows] = momentum * values[rows] + (1.0 - momentum) * fresh
    return replace(store, values=values)
