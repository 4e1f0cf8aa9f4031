# 日志记录工具模块 - 提供结构化日志记录和训练阶段日志辅助函数
import sys
import logging
from typing import Any, Iterable, List

import structlog
from structlog.stdlib import LoggerFactory

from hcrpl.config.settings import settings


def summarize_vector(values: Iterable[float], digits: int = 4) -> List[float]:
    """Round a float vector for log output."""
    return [round(float(v), digits) for v in values]


def setup_logging(level: str = "") -> None:
    """Setup structured logging configuration."""
    level = (level or settings.log_level).upper()
    renderer = (
        structlog.dev.ConsoleRenderer()
        if settings.log_format == "console"
        else structlog.processors.JSONRenderer()
    )

    # Configure structlog
    structlog.configure(
        processors=[
            structlog.stdlib.filter_by_level,
            structlog.stdlib.add_logger_name,
            structlog.stdlib.add_log_level,
            structlog.stdlib.PositionalArgumentsFormatter(),
            structlog.processors.TimeStamper(fmt="iso"),
            structlog.processors.StackInfoRenderer(),
            structlog.processors.format_exc_info,
            structlog.processors.UnicodeDecoder(),
            renderer,
        ],
        context_class=dict,
        logger_factory=LoggerFactory(),
        wrapper_class=structlog.stdlib.BoundLogger,
        cache_logger_on_first_use=True,
    )

    # Configure standard library logging; stdout is reserved for command results
    logging.basicConfig(
        format="%(message)s",
        stream=sys.stderr,
        level=getattr(logging, level),
        force=True,
    )


def get_logger(name: str) -> structlog.stdlib.BoundLogger:
    """Get a structured logger instance."""
    return structlog.get_logger(name)


def log_phase(
    logger: structlog.stdlib.BoundLogger,
    phase: str,
    duration: float,
    **fields: Any
) -> None:
    """Log a completed pipeline phase with timing information."""
    log_data = {
        "phase": phase,
        "duration_ms": round(duration * 1000, 2),
        **fields
    }
    logger.debug("Phase completed", **log_data)


def log_round(logger: structlog.stdlib.BoundLogger, report: Any) -> None:
    """Log the headline numbers of a round report."""
    log_data = {
        "round": report.round,
        "portion": report.portion,
        "test_accuracy": round(report.test_accuracy, 4),
        "pseudo_count": report.pseudo_count,
        "pseudo_accuracy": round(report.pseudo_accuracy, 4),
        "macro_f1": round(report.macro_f1, 4),
        "worst_class_f1": round(report.worst_class_f1, 4),
    }
    logger.info("Round completed", **log_data)
