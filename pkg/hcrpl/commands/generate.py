# 数据生成命令模块 - 根据实验配置生成合成源域/目标域 CSV 和清单文件
import argparse
from pathlib import Path
from typing import Any, Dict, Optional

from hcrpl.config.experiment import load_experiment, override
from hcrpl.config.settings import settings
from hcrpl.schemas.base import CommandResult
from hcrpl.services.dataset_service import generate_shifted_pair, save_csv
from hcrpl.utils.errors import IoError
from hcrpl.utils.logging import get_logger
from hcrpl.utils.serialization import write_json


logger = get_logger(__name__)

SOURCE_FILE = "source.csv"
TARGET_FILE = "target.csv"
MANIFEST_FILE = "manifest.json"


def cmd_generate(
    config_path: str,
    out_dir: Optional[str] = None,
    seed: Optional[int] = None,
) -> CommandResult[Dict[str, Any]]:
    """Write ``source.csv``, ``target.csv`` and ``manifest.json``.

    The target file keeps its ground truth in the ``hidden_label`` column;
    its ``label`` column is always -1.
    """
    config = load_experiment(config_path)
    if seed is not None:
        config = override(config, "shift", seed=seed)
    spec = config.shift

    out = Path(out_dir or config.output_dir or settings.runs_dir)
    try:
        out.mkdir(parents=True, exist_ok=True)
    except OSError as e:
        raise IoError(f"Failed to create {out}: {e}", {"path": str(out)}) from e

    source, target = generate_shifted_pair(spec)
    save_csv(source, out / SOURCE_FILE)
    save_csv(target, out / TARGET_FILE)
    manifest = {
        "shift": spec.model_dump(mode="json"),
        "files": {"source": SOURCE_FILE, "target": TARGET_FILE},
        "n_source": len(source),
        "n_target": len(target),
    }
    write_json(out / MANIFEST_FILE, manifest)

    logger.info("Datasets written", out_dir=str(out), n_source=len(source), n_target=len(target))
    return CommandResult(
        message="Datasets generated",
        data={"out_dir": str(out), **manifest},
    )


def register(subparsers: argparse._SubParsersAction) -> None:
    parser = subparsers.add_parser("generate", help="Generate a synthetic source/target pair")
    parser.add_argument("config", help="Experiment config JSON")
    parser.add_argument("--out", help="Output directory (defaults to output_dir, then runs_dir)")
    parser.add_argument("--seed", type=int, help="Override shift.seed")
    parser.set_defaults(func=lambda args: cmd_generate(args.config, args.out, args.seed))
