# 模型相关数据模式 - 训练超参数和模型检查点格式
from typing import List

from pydantic import BaseModel, Field

from .base import StrictModel


class TrainConfig(StrictModel):
    """SGD hyperparameters for the linear softmax classifier."""

    learning_rate: float = Field(default=0.05, ge=0.0, description="Step size")
    momentum: float = Field(default=0.9, ge=0.0, lt=1.0, description="Heavy-ball momentum")
    weight_decay: float = Field(default=5e-4, ge=0.0, description="L2 penalty on the weights")
    batch_size: int = Field(default=32, ge=1, description="Minibatch size")
    seed: int = Field(default=0, ge=0, lt=2**64, description="Training seed")
    augment_std: float = Field(default=0.5, ge=0.0, description="Gaussian augmentation std (feature units)")


class Checkpoint(BaseModel):
    """On-disk form of the classifier parameters."""

    C: int = Field(..., ge=2, description="Class count")
    D: int = Field(..., ge=1, description="Feature dimension")
    weights: List[List[float]] = Field(..., description="C x D weight matrix")
    bias: List[float] = Field(..., description="Length-C bias")
