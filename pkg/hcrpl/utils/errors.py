# 异常定义模块 - 统一的领域错误和配置错误层次结构
from typing import Any, Dict, Optional

from hcrpl.schemas.base import ErrorReport


class HCRPLError(Exception):
    """Base class for every error raised by the engine.

    ``exit_code`` follows the command-line contract: 1 for runtime/domain
    failures, 2 for usage/config failures.
    """

    error_code = "HCRPL_ERROR"
    exit_code = 1

    def __init__(self, message: str, details: Optional[Dict[str, Any]] = None):
        super().__init__(message)
        self.message = message
        self.details = details or {}

    def to_report(self) -> ErrorReport:
        """Render the error as a structured report."""
        return ErrorReport(
            message=self.message,
            error_code=self.error_code,
            details=self.details or None,
        )


# Probability arithmetic

class ZeroMass(HCRPLError, ValueError):
    error_code = "ZERO_MASS"


class NegativeEntry(HCRPLError, ValueError):
    error_code = "NEGATIVE_ENTRY"


class InvalidTemperature(HCRPLError, ValueError):
    error_code = "INVALID_TEMPERATURE"


class InvalidProbVector(HCRPLError, ValueError):
    error_code = "INVALID_PROB_VECTOR"


class InvalidArgument(HCRPLError, ValueError):
    error_code = "INVALID_ARGUMENT"


# Datasets and IO

class InvalidSpec(HCRPLError, ValueError):
    error_code = "INVALID_SPEC"


class SchemaError(HCRPLError, ValueError):
    error_code = "SCHEMA_ERROR"


class IoError(HCRPLError, OSError):
    error_code = "IO_ERROR"


class InsufficientSamples(HCRPLError, ValueError):
    error_code = "INSUFFICIENT_SAMPLES"


class UnlabeledSample(HCRPLError, ValueError):
    error_code = "UNLABELED_SAMPLE"


class EmptyDataset(HCRPLError, ValueError):
    error_code = "EMPTY_DATASET"


# Model and calibration

class DimensionMismatch(HCRPLError, ValueError):
    error_code = "DIMENSION_MISMATCH"


class EmptyTrainingSet(HCRPLError, ValueError):
    error_code = "EMPTY_TRAINING_SET"


class NonFiniteParams(HCRPLError, ValueError):
    error_code = "NON_FINITE_PARAMS"


class EmptyPredictions(HCRPLError, ValueError):
    error_code = "EMPTY_PREDICTIONS"


class DegenerateClass(HCRPLError, ValueError):
    error_code = "DEGENERATE_CLASS"


class UnknownId(HCRPLError, KeyError):
    error_code = "UNKNOWN_ID"

    def __str__(self) -> str:
        return self.message


# Evaluation

class LabelOutOfRange(HCRPLError, ValueError):
    error_code = "LABEL_OUT_OF_RANGE"


class MissingTruth(HCRPLError, ValueError):
    error_code = "MISSING_TRUTH"


class MissingMetrics(HCRPLError):
    error_code = "MISSING_METRICS"


# Operator surface

class ConfigError(HCRPLError, ValueError):
    """Invalid configuration; ``pointer`` is the JSON pointer of the offending key."""

    error_code = "CONFIG_ERROR"
    exit_code = 2

    def __init__(self, message: str, pointer: str = "", details: Optional[Dict[str, Any]] = None):
        details = dict(details or {})
        if pointer:
            details.setdefault("pointer", pointer)
        super().__init__(message, details)
        self.pointer = pointer


class UsageError(HCRPLError):
    error_code = "USAGE_ERROR"
    exit_code = 2
