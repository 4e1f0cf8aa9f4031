# 概率向量运算核心模块 - 归一化、锐化、熵和稳定 argmax
"""Probability-vector kernels shared by every other service.

All functions operate along the last axis, so a single ``(C,)`` vector and a
``(N, C)`` batch of row vectors are handled by the same code path. Values are
always float64.
"""
from typing import Optional, Sequence, Union

import numpy as np
import numpy.typing as npt

from hcrpl.utils.errors import (
    InvalidProbVector,
    InvalidTemperature,
    NegativeEntry,
    ZeroMass,
)

ArrayLike = Union[Sequence[float], npt.NDArray[np.float64]]
ProbVector = npt.NDArray[np.float64]
ClassProportion = npt.NDArray[np.float64]

SUM_TOLERANCE = 1e-9
ZERO_MASS_FLOOR = 1e-300
# Below this distance from 1 the input is returned untouched, which keeps
# normalize idempotent bit-for-bit.
EXACT_SUM_TOLERANCE = 1e-15


def _as_float_array(values: ArrayLike) -> npt.NDArray[np.float64]:
    return np.array(values, dtype=np.float64)


def prob_vector(values: ArrayLike, n_classes: Optional[int] = None) -> ProbVector:
    """Validate ``values`` as probability vector(s).

    Rows within :data:`SUM_TOLERANCE` of 1 are renormalized; anything else is
    rejected.
    """
    arr = _as_float_array(values)
    if arr.ndim not in (1, 2) or arr.shape[-1] < 2:
        raise InvalidProbVector(f"expected at least 2 classes, got shape {arr.shape}")
    if n_classes is not None and arr.shape[-1] != n_classes:
        raise InvalidProbVector(
            f"expected {n_classes} classes, got {arr.shape[-1]}",
            {"expected": n_classes, "actual": int(arr.shape[-1])},
        )
    if not np.all(np.isfinite(arr)):
        raise InvalidProbVector("probabilities must be finite")
    if np.any(arr < 0):
        raise InvalidProbVector("probabilities must be nonnegative")
    sums = arr.sum(axis=-1)
    if np.any(np.abs(sums - 1.0) > SUM_TOLERANCE):
        raise InvalidProbVector(
            "probabilities must sum to 1",
            {"max_deviation": float(np.max(np.abs(sums - 1.0)))},
        )
    return normalize(arr)


def normalize(values: ArrayLike) -> ProbVector:
    """Divide by the sum along the last axis."""
    arr = _as_float_array(values)
    if np.any(arr < 0):
        raise NegativeEntry("cannot normalize a vector with negative entries")
    sums = arr.sum(axis=-1, keepdims=True)
    if np.any(sums <= ZERO_MASS_FLOOR):
        raise ZeroMass("cannot normalize a vector with zero total mass")
    exact = np.abs(sums - 1.0) <= EXACT_SUM_TOLERANCE
    if np.all(exact):
        return arr
    return np.where(exact, arr, arr / sums)


def sharpen(p: ArrayLike, temperature: float) -> ProbVector:
    """Raise to the power ``1/T`` and renormalize.

    The vector is scaled by its maximum first, which leaves the result
    unchanged but keeps the power from underflowing for small ``T``.
    """
    if not temperature > 0:
        raise InvalidTemperature(
            f"temperature must be positive, got {temperature}",
            {"temperature": temperature},
        )
    arr = _as_float_array(p)
    if temperature == 1.0:
        return normalize(arr)
    peak = arr.max(axis=-1, keepdims=True)
    if np.any(peak <= 0):
        raise ZeroMass("cannot sharpen a vector with zero total mass")
    return normalize((arr / peak) ** (1.0 / temperature))


def entropy(p: ArrayLike) -> Union[float, npt.NDArray[np.float64]]:
    """Shannon entropy in nats, with ``0 * ln 0 = 0``."""
    arr = _as_float_array(p)
    safe = np.where(arr > 0, arr, 1.0)
    terms = np.where(arr > 0, -arr * np.log(safe), 0.0)
    result = terms.sum(axis=-1)
    return float(result) if np.ndim(result) == 0 else result


def argmax_stable(values: ArrayLike) -> Union[int, npt.NDArray[np.int64]]:
    """Index of the maximum; ties go to the lowest index."""
    arr = _as_float_array(values)
    if arr.shape[-1] < 1:
        raise InvalidProbVector("argmax of an empty vector")
    # np.argmax returns the first occurrence of the maximum
    result = np.argmax(arr, axis=-1)
    return int(result) if np.ndim(result) == 0 else result.astype(np.int64)
