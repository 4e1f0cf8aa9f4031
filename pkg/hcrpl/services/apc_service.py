# 自适应预测校准服务模块 - 计算难度比 R 并按类别重新缩放目标域预测
import numpy as np

from hcrpl.services.prob_core import ArrayLike, ClassProportion, ProbVector, normalize
from hcrpl.utils.errors import DegenerateClass, DimensionMismatch, EmptyPredictions
from hcrpl.utils.logging import get_logger


logger = get_logger(__name__)

# p(y) entries are clamped here before dividing
PROPORTION_FLOOR = 1e-8

DifficultyRatio = np.ndarray


def difficulty_ratio(q: ArrayLike, predictions: ArrayLike) -> DifficultyRatio:
    """``R = q ⊘ p(y)`` where ``p(y)`` is the mean prediction.

    Pass every prediction set that should count toward ``p(y)`` stacked into
    one ``(N, C)`` array (both augmented passes when self-ensembling).
    """
    q = np.asarray(q, dtype=np.float64)
    preds = np.asarray(predictions, dtype=np.float64)
    if preds.ndim != 2 or preds.shape[0] == 0:
        raise EmptyPredictions("difficulty ratio needs at least one prediction")
    if preds.shape[1] != q.shape[0]:
        raise DimensionMismatch(
            f"prior has {q.shape[0]} classes, predictions have {preds.shape[1]}"
        )
    if np.any(q <= 0):
        raise DegenerateClass(
            "prior class proportion assigns no mass to some class",
            {"classes": np.flatnonzero(q <= 0).tolist()},
        )

    mean = predictive_distribution(preds)
    if not np.all(np.isfinite(mean)):
        raise DegenerateClass("predictive class distribution is not finite")
    collapsed = np.flatnonzero(mean < PROPORTION_FLOOR)
    if collapsed.size >= q.shape[0] - 1:
        raise DegenerateClass(
            "predictions collapsed onto a single class",
            {"collapsed": collapsed.tolist()},
        )
    if collapsed.size:
        logger.warning("Clamping collapsed classes", classes=collapsed.tolist())
    return q / np.maximum(mean, PROPORTION_FLOOR)


def calibrate(p: ArrayLike, ratio: ArrayLike) -> ProbVector:
    """``Normalization(R ⊙ p)`` for one vector or a batch of rows."""
    p = np.asarray(p, dtype=np.float64)
    ratio = np.asarray(ratio, dtype=np.float64)
    if p.shape[-1] != ratio.shape[0]:
        raise DimensionMismatch(
            f"ratio has {ratio.shape[0]} classes, predictions have {p.shape[-1]}"
        )
    return normalize(p * ratio)


def predictive_distribution(predictions: ArrayLike) -> ClassProportion:
    """Mean prediction ``p(y)``."""
    preds = np.asarray(predictions, dtype=np.float64)
    if preds.ndim != 2 or preds.shape[0] == 0:
        raise EmptyPredictions("predictive distribution of no predictions")
    return preds.mean(axis=0)
