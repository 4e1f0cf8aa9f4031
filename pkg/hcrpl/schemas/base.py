# 基础数据模式定义 - 包含命令结果和错误报告模式
from datetime import datetime, timezone
from typing import Any, Dict, Generic, Optional, TypeVar

from pydantic import BaseModel, ConfigDict, Field

T = TypeVar('T')


def _utcnow() -> datetime:
    return datetime.now(timezone.utc)


class StrictModel(BaseModel):
    """Base for configuration documents: unknown keys are rejected."""

    model_config = ConfigDict(extra="forbid")


class CommandResult(BaseModel, Generic[T]):
    """Result printed by every successful command."""

    success: bool = Field(default=True, description="Whether the command succeeded")
    message: str = Field(description="Result message")
    data: Optional[T] = Field(default=None, description="Result data")
    timestamp: datetime = Field(default_factory=_utcnow, description="Result timestamp")


class ErrorReport(BaseModel):
    """Error report printed when a command fails."""

    success: bool = Field(default=False, description="Always false for errors")
    message: str = Field(description="Error message")
    error_code: str = Field(description="Error code")
    details: Optional[Dict[str, Any]] = Field(default=None, description="Additional error details")
    timestamp: datetime = Field(default_factory=_utcnow, description="Error timestamp")
