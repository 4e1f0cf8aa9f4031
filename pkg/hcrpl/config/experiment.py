# 实验配置加载模块 - 读取 JSON 实验文档并把校验错误映射为带 JSON 指针的配置错误
import json
from pathlib import Path
from typing import Any, Sequence, Tuple, Union

from pydantic import ValidationError

from hcrpl.schemas.run import ExperimentConfig
from hcrpl.utils.errors import ConfigError, IoError
from hcrpl.utils.logging import get_logger


logger = get_logger(__name__)


def json_pointer(loc: Sequence[Union[str, int]]) -> str:
    """RFC 6901 pointer for a pydantic error location."""
    parts = [str(p).replace("~", "~0").replace("/", "~1") for p in loc]
    return "/" + "/".join(parts) if parts else ""


def dotted_path(loc: Sequence[Union[str, int]]) -> str:
    return ".".join(str(p) for p in loc)


def config_error(error: ValidationError, prefix: Tuple[Union[str, int], ...] = ()) -> ConfigError:
    """First validation failure as a ConfigError naming the offending key."""
    first = error.errors()[0]
    loc = prefix + tuple(first["loc"])
    path = dotted_path(loc)
    return ConfigError(
        f"{path or '<root>'}: {first['msg']}",
        pointer=json_pointer(loc),
        details={"path": path, "errors": len(error.errors())},
    )


def parse_experiment(payload: Any) -> ExperimentConfig:
    """Validate a decoded experiment document."""
    try:
        return ExperimentConfig.model_validate(payload)
    except ValidationError as e:
        raise config_error(e) from e


def load_experiment(path: Union[str, Path]) -> ExperimentConfig:
    """Read and validate an experiment JSON file.

    Relative dataset paths are resolved against the directory of the file, so
    an echoed ``config.json`` reproduces the run from anywhere.
    """
    path = Path(path)
    try:
        text = path.read_text(encoding="utf-8")
    except OSError as e:
        raise IoError(f"Failed to read {path}: {e}", {"path": str(path)}) from e
    try:
        payload = json.loads(text)
    except json.JSONDecodeError as e:
        raise ConfigError(f"{path}: invalid JSON: {e.msg}", details={"line": e.lineno}) from e

    config = parse_experiment(payload)
    if config.data is not None:
        base = path.parent
        config = config.model_copy(
            update={
                "data": config.data.model_copy(
                    update={
                        "source": str((base / config.data.source).resolve()),
                        "target": str((base / config.data.target).resolve()),
                    }
                )
            }
        )
    logger.debug("Loaded experiment config", path=str(path))
    return config


def override(config: ExperimentConfig, section: str, **values: Any) -> ExperimentConfig:
    """Copy of ``config`` with keys of one section replaced and revalidated."""
    payload = config.model_dump(mode="json")
    payload[section] = {**(payload.get(section) or {}), **values}
    return parse_experiment(payload)
