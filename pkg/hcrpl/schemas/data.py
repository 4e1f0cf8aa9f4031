# 数据集相关数据模式 - 定义合成域偏移基准的生成参数
import math
from typing import List, Optional

from pydantic import Field, model_validator, validator

from .base import StrictModel


class HardClassSpec(StrictModel):
    """Pull the target blob of ``victim`` toward the source blob of ``confusable``."""

    victim: int = Field(..., ge=0, description="Hard class index h")
    confusable: int = Field(..., ge=0, description="Class index e that absorbs h")
    pull_fraction: float = Field(..., ge=0.0, le=1.0, description="Interpolation λ in [0, 1]")

    @model_validator(mode="after")
    def validate_distinct(self) -> "HardClassSpec":
        if self.victim == self.confusable:
            raise ValueError("victim and confusable classes must differ")
        return self


class ShiftSpec(StrictModel):
    """Parameters of a synthetic source/target pair with covariate shift."""

    n_classes: int = Field(default=5, ge=2, description="Class count C")
    dim: int = Field(default=8, ge=2, description="Feature dimension D")
    n_source_per_class: int = Field(default=200, ge=1, description="Source samples per class")
    n_target_per_class: int = Field(default=200, ge=1, description="Target samples per class")
    class_centers: Optional[List[List[float]]] = Field(
        default=None, description="C points in R^D; derived from center_separation when omitted"
    )
    center_separation: float = Field(
        default=6.0, gt=0.0, description="Pairwise center distance used when class_centers is omitted"
    )
    within_class_std: float = Field(default=1.0, gt=0.0, description="Isotropic blob std")
    target_translation: Optional[List[float]] = Field(
        default=None, description="Target translation in R^D (zeros when omitted)"
    )
    target_rotation_angle: float = Field(
        default=0.0, description="Rotation in radians applied to the first two coordinates"
    )
    hard_class: Optional[HardClassSpec] = Field(default=None, description="Hard-class injection")
    source_class_weights: Optional[List[float]] = Field(
        default=None, description="Relative class weights of the source domain"
    )
    seed: int = Field(default=0, ge=0, lt=2**64, description="Generation seed")

    @validator("target_rotation_angle")
    def validate_angle(cls, v: float) -> float:
        """Reject non-finite angles."""
        if not math.isfinite(v):
            raise ValueError("rotation angle must be finite")
        return v

    @model_validator(mode="after")
    def resolve_geometry(self) -> "ShiftSpec":
        if self.class_centers is None:
            self.class_centers = default_class_centers(self.n_classes, self.dim, self.center_separation)
        if len(self.class_centers) != self.n_classes:
            raise ValueError(f"class_centers must have {self.n_classes} rows")
        if any(len(row) != self.dim for row in self.class_centers):
            raise ValueError(f"every class center must have {self.dim} coordinates")
        if self.target_translation is None:
            self.target_translation = [0.0] * self.dim
        if len(self.target_translation) != self.dim:
            raise ValueError(f"target_translation must have {self.dim} coordinates")
        if self.hard_class is not None:
            if max(self.hard_class.victim, self.hard_class.confusable) >= self.n_classes:
                raise ValueError("hard_class indices must be below n_classes")
        if self.source_class_weights is not None:
            weights = self.source_class_weights
            if len(weights) != self.n_classes:
                raise ValueError(f"source_class_weights must have {self.n_classes} entries")
            if any(w <= 0 or not math.isfinite(w) for w in weights):
                raise ValueError("source_class_weights must be positive")
            total = sum(weights)
            self.source_class_weights = [w / total for w in weights]
        return self


def default_class_centers(n_classes: int, dim: int, separation: float) -> List[List[float]]:
    """Centers on scaled coordinate axes, every pair at least ``separation`` apart.

    Classes beyond ``dim`` reuse the axes with a negative sign.
    """
    if n_classes > 2 * dim:
        raise ValueError("class_centers must be given explicitly when n_classes > 2 * dim")
    scale = separation / math.sqrt(2.0)
    centers = []
    for c in range(n_classes):
        row = [0.0] * dim
        row[c % dim] = scale if c < dim else -scale
        centers.append(row)
    return centers
