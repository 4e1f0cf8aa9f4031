# 评估报告数据模式 - 每轮指标、预训练指标和汇总
from typing import List, Optional

from pydantic import BaseModel, Field


class ClassReport(BaseModel):
    """Per-class precision/recall/F1 of target predictions against hidden truth."""

    test_accuracy: float = Field(..., ge=0.0, le=1.0, description="Micro accuracy on the target set")
    precision: List[float] = Field(..., description="Per-class precision")
    recall: List[float] = Field(..., description="Per-class recall")
    f1: List[float] = Field(..., description="Per-class F1")
    macro_precision: float = Field(..., description="Mean precision over classes")
    macro_recall: float = Field(..., description="Mean recall over classes")
    macro_f1: float = Field(..., description="Mean F1 over classes")
    worst_class_f1: float = Field(..., description="Lowest per-class F1")
    confusion: List[List[int]] = Field(..., description="Rows true class, columns predicted class")
    predictive_proportion: List[float] = Field(..., description="Share of targets predicted per class")


class RoundReport(ClassReport):
    """Everything measured at the end of a pseudo-labeling round."""

    round: int = Field(..., ge=1, description="Round index (1-based)")
    portion: float = Field(..., description="Selection percentage used this round")
    epoch_test_accuracy: List[float] = Field(default_factory=list, description="Target accuracy after each epoch")
    pseudo_count: int = Field(..., ge=0, description="Size of the pseudo-labeled set")
    pseudo_accuracy: float = Field(..., ge=0.0, le=1.0, description="Share of correct pseudo labels")
    false_ratio: float = Field(..., ge=0.0, le=1.0, description="Share of wrong pseudo labels")
    pseudo_empty: bool = Field(..., description="True when nothing was selected")
    pseudo_class_counts: List[int] = Field(..., description="Pseudo labels per class")
    ensemble_proportion: List[float] = Field(..., description="Predictive class proportion of Z")
    difficulty_ratio: Optional[List[float]] = Field(default=None, description="Last APC ratio (null without APC)")
    training_size: int = Field(..., ge=0, description="Rows in the training set for the next round")


class PretrainReport(ClassReport):
    """Metrics right after source-only pretraining."""

    source_accuracy: float = Field(..., ge=0.0, le=1.0, description="Accuracy on the training source")
