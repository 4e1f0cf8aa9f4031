# 伪标签选择服务模块 - 比例调度和类别平衡自训练求解器
import math
from dataclasses import dataclass, field
from typing import Dict, Optional

import numpy as np

from hcrpl.schemas.run import PortionSchedule
from hcrpl.services.prob_core import ArrayLike, argmax_stable
from hcrpl.utils.errors import InvalidArgument, LabelOutOfRange
from hcrpl.utils.logging import get_logger


logger = get_logger(__name__)

# Threshold for a class with no argmax winners; nothing can reach it
NO_SELECTION = math.inf


@dataclass
class PseudoLabelSet:
    """Target id -> pseudo label for one round."""

    round: int
    entries: Dict[int, int] = field(default_factory=dict)

    def __len__(self) -> int:
        return len(self.entries)

    def class_counts(self, n_classes: int) -> list:
        counts = [0] * n_classes
        for label in self.entries.values():
            if not 0 <= label < n_classes:
                raise LabelOutOfRange(f"pseudo label {label} outside [0, {n_classes})")
            counts[label] += 1
        return counts

    def merged_with(self, previous: Optional["PseudoLabelSet"]) -> "PseudoLabelSet":
        """Keep earlier selections; labels from this round win on overlap."""
        if previous is None:
            return self
        return PseudoLabelSet(round=self.round, entries={**previous.entries, **self.entries})


def portion_at_round(r: int, schedule: Optional[PortionSchedule] = None) -> float:
    """Percentage of each class selected in round ``r`` (rounds start at 1)."""
    if r < 1:
        raise InvalidArgument(f"rounds start at 1, got {r}")
    schedule = schedule or PortionSchedule()
    return min(schedule.slope * r + schedule.intercept, schedule.cap)


def selection_rank(portion: float, n_class: int) -> int:
    """1-indexed rank ``ceil(portion / 100 * n_class)``, at least 1."""
    # products of small integers are exact; the epsilon absorbs fractional portions
    return max(1, min(n_class, math.ceil(portion * n_class / 100.0 - 1e-9)))


def class_thresholds(z: ArrayLike, portion: float) -> np.ndarray:
    """Per-class confidence thresholds ``exp(-k_c)``.

    For class ``c`` the max-probabilities of samples whose argmax is ``c`` are
    sorted in descending order and the threshold is the value at rank
    ``ceil(portion / 100 * N_c)``. A class that wins no sample gets
    :data:`NO_SELECTION`.
    """
    if not 0 < portion <= 100:
        raise InvalidArgument(f"portion must lie in (0, 100], got {portion}")
    z = np.asarray(z, dtype=np.float64)
    winners = argmax_stable(z)
    confidence = z.max(axis=1)
    thresholds = np.full(z.shape[1], NO_SELECTION)
    for c in range(z.shape[1]):
        values = np.sort(confidence[winners == c])[::-1]
        if values.size:
            thresholds[c] = values[selection_rank(portion, values.size) - 1]
    return thresholds


def cbst_select(
    ids: ArrayLike,
    z: ArrayLike,
    thresholds: ArrayLike,
    round_index: int = 0,
) -> PseudoLabelSet:
    """Class-balanced selection on threshold-scaled scores.

    A sample is labeled with the argmax of ``z / threshold`` when that
    winning scaled score is at least 1, and left out otherwise.
    """
    ids = np.asarray(ids, dtype=np.int64).reshape(-1)
    z = np.asarray(z, dtype=np.float64)
    thresholds = np.asarray(thresholds, dtype=np.float64)
    if z.shape != (ids.shape[0], thresholds.shape[0]):
        raise InvalidArgument("z must have one row per id and one column per threshold")

    # z / inf == 0, so classes without winners never score
    scaled = z / thresholds
    labels = argmax_stable(scaled)
    best = scaled[np.arange(ids.shape[0]), labels]
    chosen = best >= 1.0
    entries = {int(i): int(c) for i, c in zip(ids[chosen], labels[chosen])}
    logger.debug("Selected pseudo labels", round=round_index, count=len(entries))
    return PseudoLabelSet(round=round_index, entries=entries)
