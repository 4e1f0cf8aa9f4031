# 运行配置数据模式 - 伪标签轮次、集成、消融开关和实验配置
from enum import Enum
from typing import List, Optional

from pydantic import Field, model_validator, validator

from .base import StrictModel
from .data import ShiftSpec
from .model import TrainConfig


class PortionSchedule(StrictModel):
    """Per-round selection percentage ``min(slope * r + intercept, cap)``."""

    slope: float = Field(default=5.0, ge=0.0, description="Percent added per round")
    intercept: float = Field(default=10.0, description="Percent at round 0")
    cap: float = Field(default=90.0, gt=0.0, le=100.0, description="Upper bound in percent")

    @model_validator(mode="after")
    def validate_positive(self) -> "PortionSchedule":
        if self.slope + self.intercept <= 0:
            raise ValueError("portion must be positive from round 1 on")
        return self


class PriorSource(str, Enum):
    """Where the prior class proportion q(y) comes from."""
    SOURCE = "source-proportion"
    EXPLICIT = "explicit"
    TARGET_ORACLE = "target-oracle"


class RunConfig(StrictModel):
    """Everything one self-training run needs besides the data."""

    rounds: int = Field(default=30, ge=1, description="Pseudo-labeling rounds Rs")
    epochs_per_round: int = Field(default=20, ge=1, description="Epochs per round Es")
    pretrain_epochs: int = Field(default=20, ge=0, description="Source-only epochs before round 1")
    alpha: float = Field(default=0.95, ge=0.0, lt=1.0, description="EMA momentum")
    temperature: float = Field(default=0.5, gt=0.0, description="Sharpening temperature T")
    portion: PortionSchedule = Field(default_factory=PortionSchedule, description="Portion schedule")
    first_round_lr: float = Field(default=0.05, ge=0.0, description="Pretrain and round-1 learning rate")
    later_round_lr: float = Field(default=0.015, ge=0.0, description="Learning rate from round 2 on")
    use_apc: bool = Field(default=True, description="Adaptive prediction calibration")
    use_se: bool = Field(default=True, description="Self-ensembling over two augmentations")
    use_te: bool = Field(default=True, description="Temporal ensembling (EMA)")
    select_pseudo_labels: bool = Field(default=True, description="False keeps training on the source only")
    accumulate_pseudo_labels: bool = Field(default=False, description="Merge selections across rounds")
    q_source: PriorSource = Field(default=PriorSource.SOURCE, description="Prior class proportion")
    q_explicit: Optional[List[float]] = Field(default=None, description="Prior used with q_source=explicit")
    ssda_shots: int = Field(default=0, ge=0, description="Labeled target samples per class (SSDA)")
    production: bool = Field(default=False, description="Refuse analysis-only options")
    train: TrainConfig = Field(default_factory=TrainConfig, description="SGD hyperparameters")
    seed: int = Field(default=0, ge=0, lt=2**64, description="Run seed")

    @validator("q_explicit")
    def validate_q_explicit(cls, v: Optional[List[float]]) -> Optional[List[float]]:
        """Explicit priors must be a strictly positive distribution."""
        if v is None:
            return v
        if len(v) < 2 or any(x <= 0 for x in v):
            raise ValueError("explicit prior needs at least 2 positive entries")
        if abs(sum(v) - 1.0) > 1e-9:
            raise ValueError("explicit prior must sum to 1")
        return v

    @model_validator(mode="after")
    def validate_prior(self) -> "RunConfig":
        if self.q_source is PriorSource.EXPLICIT and self.q_explicit is None:
            raise ValueError("q_source=explicit requires q_explicit")
        if self.q_source is PriorSource.TARGET_ORACLE and (self.ssda_shots > 0 or self.production):
            raise ValueError("q_source=target-oracle is analysis-only; not allowed with ssda or production")
        return self


class DataPaths(StrictModel):
    """CSV files produced by the generate command."""

    source: str = Field(..., description="Source CSV path")
    target: str = Field(..., description="Target CSV path")


class SweepSpec(StrictModel):
    """Hyperparameter grids; every combination becomes a run subdirectory."""

    alpha: Optional[List[float]] = Field(default=None, description="EMA momentum grid")
    temperature: Optional[List[float]] = Field(default=None, description="Sharpening temperature grid")

    @validator("alpha")
    def validate_alpha(cls, v: Optional[List[float]]) -> Optional[List[float]]:
        """Each momentum must lie in [0, 1)."""
        if v is not None and (not v or any(not 0.0 <= a < 1.0 for a in v)):
            raise ValueError("alpha grid entries must lie in [0, 1)")
        return v

    @validator("temperature")
    def validate_temperature(cls, v: Optional[List[float]]) -> Optional[List[float]]:
        """Each temperature must be positive."""
        if v is not None and (not v or any(t <= 0 for t in v)):
            raise ValueError("temperature grid entries must be positive")
        return v


class ExperimentConfig(StrictModel):
    """JSON experiment document read by the command line."""

    shift: ShiftSpec = Field(default_factory=ShiftSpec, description="Synthetic benchmark")
    run: RunConfig = Field(default_factory=RunConfig, description="Run configuration")
    data: Optional[DataPaths] = Field(default=None, description="Datasets to load instead of generating")
    output_dir: Optional[str] = Field(default=None, description="Run directory")
    sweep: Optional[SweepSpec] = Field(default=None, description="Hyperparameter sweep")
    seeds: Optional[List[int]] = Field(default=None, description="Repeat the run for each seed")

    @validator("seeds")
    def validate_seeds(cls, v: Optional[List[int]]) -> Optional[List[int]]:
        """Seeds must be nonnegative and distinct."""
        if v is not None and (not v or any(s < 0 for s in v) or len(set(v)) != len(v)):
            raise ValueError("seeds must be a nonempty list of distinct nonnegative integers")
        return v
