# 指标收集工具模块 - 每次运行独立的 Prometheus 注册表和文本文件导出
from pathlib import Path
from typing import Union

from prometheus_client import (
    CollectorRegistry, Counter, Gauge, Histogram, write_to_textfile
)

from hcrpl.utils.logging import get_logger


logger = get_logger(__name__)


class RunMetrics:
    """Counters and gauges for one run, kept out of the global registry."""

    def __init__(self) -> None:
        self.registry = CollectorRegistry()
        self.epochs = Counter(
            'hcrpl_epochs_total',
            'Training epochs completed',
            ['phase'],
            registry=self.registry,
        )
        self.rounds = Counter(
            'hcrpl_rounds_total',
            'Pseudo-labeling rounds completed',
            registry=self.registry,
        )
        self.pseudo_labels = Gauge(
            'hcrpl_pseudo_labels',
            'Size of the current pseudo-labeled set',
            registry=self.registry,
        )
        self.test_accuracy = Gauge(
            'hcrpl_test_accuracy',
            'Target test accuracy after the last round',
            registry=self.registry,
        )
        self.worst_class_f1 = Gauge(
            'hcrpl_worst_class_f1',
            'Lowest per-class F1 after the last round',
            registry=self.registry,
        )
        self.phase_duration = Histogram(
            'hcrpl_phase_duration_seconds',
            'Wall time of pipeline phases',
            ['phase'],
            registry=self.registry,
        )

    def record_epoch(self, phase: str) -> None:
        """Count a finished epoch (``pretrain`` or ``round``)."""
        self.epochs.labels(phase=phase).inc()

    def record_phase(self, phase: str, duration: float) -> None:
        """Observe the duration of a ``train``, ``predict`` or ``select`` phase."""
        self.phase_duration.labels(phase=phase).observe(duration)

    def record_round(self, pseudo_count: int, test_accuracy: float, worst_class_f1: float) -> None:
        """Update the per-round gauges."""
        self.rounds.inc()
        self.pseudo_labels.set(pseudo_count)
        self.test_accuracy.set(test_accuracy)
        self.worst_class_f1.set(worst_class_f1)

    def write(self, path: Union[str, Path]) -> None:
        """Dump the registry in the Prometheus text format."""
        try:
            write_to_textfile(str(path), self.registry)
        except OSError as e:
            logger.warning("Failed to write metrics file", path=str(path), error=str(e))
