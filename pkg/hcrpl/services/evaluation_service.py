# 评估服务模块 - 混淆矩阵、逐类精确率/召回率/F1、伪标签错误率和预测类别比例
from dataclasses import dataclass
from typing import Mapping, Tuple

import numpy as np
from sklearn.metrics import confusion_matrix

from hcrpl.schemas.report import ClassReport
from hcrpl.services.prob_core import ArrayLike, ClassProportion, argmax_stable
from hcrpl.services.selection_service import PseudoLabelSet
from hcrpl.utils.errors import EmptyPredictions, InvalidArgument, LabelOutOfRange, MissingTruth
from hcrpl.utils.logging import get_logger


logger = get_logger(__name__)


@dataclass(frozen=True)
class ClassMetrics:
    """Per-class precision, recall and F1 (0/0 cells resolve to 0)."""

    precision: np.ndarray
    recall: np.ndarray
    f1: np.ndarray

    @property
    def macro_precision(self) -> float:
        return float(self.precision.mean())

    @property
    def macro_recall(self) -> float:
        return float(self.recall.mean())

    @property
    def macro_f1(self) -> float:
        return float(self.f1.mean())

    @property
    def worst_f1(self) -> float:
        return float(self.f1.min())


def confusion(true_labels: ArrayLike, predicted_labels: ArrayLike, n_classes: int) -> np.ndarray:
    """``C x C`` counts, rows true class, columns predicted class."""
    true_labels = np.asarray(true_labels, dtype=np.int64).reshape(-1)
    predicted_labels = np.asarray(predicted_labels, dtype=np.int64).reshape(-1)
    if true_labels.shape != predicted_labels.shape:
        raise InvalidArgument("true and predicted labels must have the same length")
    for name, labels in (("true", true_labels), ("predicted", predicted_labels)):
        if labels.size and (labels.min() < 0 or labels.max() >= n_classes):
            raise LabelOutOfRange(f"{name} labels must lie in [0, {n_classes})")
    if true_labels.size == 0:
        return np.zeros((n_classes, n_classes), dtype=np.int64)
    return confusion_matrix(true_labels, predicted_labels, labels=list(range(n_classes))).astype(np.int64)


def _safe_ratio(numerator: np.ndarray, denominator: np.ndarray) -> np.ndarray:
    out = np.zeros_like(numerator, dtype=np.float64)
    np.divide(numerator, denominator, out=out, where=denominator > 0)
    return out


def precision_recall_f1(cm: ArrayLike) -> ClassMetrics:
    """Per-class metrics read off a confusion matrix."""
    cm = np.asarray(cm, dtype=np.float64)
    tp = np.diag(cm)
    precision = _safe_ratio(tp, cm.sum(axis=0))
    recall = _safe_ratio(tp, cm.sum(axis=1))
    f1 = _safe_ratio(2.0 * precision * recall, precision + recall)
    return ClassMetrics(precision=precision, recall=recall, f1=f1)


def accuracy(true_labels: ArrayLike, predicted_labels: ArrayLike) -> float:
    """Micro accuracy; 0 for empty input."""
    true_labels = np.asarray(true_labels)
    predicted_labels = np.asarray(predicted_labels)
    if true_labels.size == 0:
        return 0.0
    return float(np.mean(true_labels == predicted_labels))


def false_pseudo_label_ratio(
    pseudo: PseudoLabelSet,
    hidden_truth: Mapping[int, int],
) -> Tuple[float, bool]:
    """Share of pseudo labels that disagree with the truth, and an empty-set flag."""
    if not pseudo.entries:
        return 0.0, True
    missing = [i for i in pseudo.entries if i not in hidden_truth]
    if missing:
        raise MissingTruth(f"no hidden truth for ids {missing[:5]}", {"missing": len(missing)})
    wrong = sum(1 for i, label in pseudo.entries.items() if hidden_truth[i] != label)
    return wrong / len(pseudo.entries), False


def predictive_class_proportion(predictions: ArrayLike) -> ClassProportion:
    """Histogram of argmax classes, normalized."""
    preds = np.asarray(predictions, dtype=np.float64)
    if preds.ndim != 2 or preds.shape[0] == 0:
        raise EmptyPredictions("predictive class proportion of no predictions")
    counts = np.bincount(argmax_stable(preds), minlength=preds.shape[1])
    return counts / preds.shape[0]


def class_report(true_labels: ArrayLike, predictions: ArrayLike) -> ClassReport:
    """Evaluate probability rows against ground truth."""
    preds = np.asarray(predictions, dtype=np.float64)
    n_classes = preds.shape[1]
    predicted = argmax_stable(preds)
    cm = confusion(true_labels, predicted, n_classes)
    metrics = precision_recall_f1(cm)
    return ClassReport(
        test_accuracy=accuracy(true_labels, predicted),
        precision=metrics.precision.tolist(),
        recall=metrics.recall.tolist(),
        f1=metrics.f1.tolist(),
        macro_precision=metrics.macro_precision,
        macro_recall=metrics.macro_recall,
        macro_f1=metrics.macro_f1,
        worst_class_f1=metrics.worst_f1,
        confusion=cm.tolist(),
        predictive_proportion=predictive_class_proportion(preds).tolist(),
    )
