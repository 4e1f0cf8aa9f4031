# 测试配置和夹具 - 提供小规模偏移数据集、运行配置和实验配置文件等共享夹具
import json
from pathlib import Path
from typing import Any, Dict, Tuple

import numpy as np
import pytest

from hcrpl.schemas.data import ShiftSpec
from hcrpl.schemas.model import TrainConfig
from hcrpl.schemas.run import RunConfig
from hcrpl.services.dataset_service import DomainDataset, generate_shifted_pair


@pytest.fixture
def rng() -> np.random.Generator:
    """Seeded generator for property loops."""
    return np.random.default_rng(20240531)


@pytest.fixture
def small_spec() -> ShiftSpec:
    """Three well-separated classes in four dimensions, mild target shift."""
    return ShiftSpec(
        n_classes=3,
        dim=4,
        n_source_per_class=40,
        n_target_per_class=30,
        center_separation=6.0,
        target_rotation_angle=0.1,
        target_translation=[0.3, -0.2, 0.0, 0.1],
        seed=7,
    )


@pytest.fixture
def small_pair(small_spec: ShiftSpec) -> Tuple[DomainDataset, DomainDataset]:
    return generate_shifted_pair(small_spec)


@pytest.fixture
def tiny_run_config() -> RunConfig:
    """Two short rounds; enough to exercise every phase quickly."""
    return RunConfig(
        rounds=2,
        epochs_per_round=2,
        pretrain_epochs=3,
        train=TrainConfig(batch_size=16),
        seed=3,
    )


@pytest.fixture
def experiment_payload(small_spec: ShiftSpec, tiny_run_config: RunConfig) -> Dict[str, Any]:
    return {
        "shift": small_spec.model_dump(mode="json"),
        "run": tiny_run_config.model_dump(mode="json"),
    }


@pytest.fixture
def experiment_file(tmp_path: Path, experiment_payload: Dict[str, Any]) -> Path:
    """Experiment config written to a temporary directory."""
    path = tmp_path / "experiment.json"
    path.write_text(json.dumps(experiment_payload), encoding="utf-8")
    return path


def write_experiment(tmp_path: Path, payload: Dict[str, Any], name: str = "experiment.json") -> Path:
    path = tmp_path / name
    path.write_text(json.dumps(payload), encoding="utf-8")
    return path
