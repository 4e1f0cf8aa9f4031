# 实验运行命令模块 - 执行单次运行、预设、超参数扫描和多种子重复
import argparse
import itertools
from pathlib import Path
from typing import Any, Dict, List, Optional, Tuple

from hcrpl.config.experiment import load_experiment, override
from hcrpl.config.settings import settings
from hcrpl.presets import apply_preset, preset_names
from hcrpl.schemas.base import CommandResult
from hcrpl.schemas.run import ExperimentConfig
from hcrpl.services.dataset_service import DomainDataset, DomainTag, generate_shifted_pair, load_csv
from hcrpl.services.pipeline_service import run_full
from hcrpl.utils.logging import get_logger


logger = get_logger(__name__)


def sweep_value(value: float) -> str:
    return f"{value:g}"


def expand_runs(config: ExperimentConfig) -> List[Tuple[str, ExperimentConfig]]:
    """Cartesian product of the sweep grids and the seed list.

    Each entry is ``(relative run directory, single-run config)``; the
    single-run config has no sweep and no seed list of its own.
    """
    grids: List[List[Tuple[str, float]]] = []
    if config.sweep is not None:
        if config.sweep.alpha is not None:
            grids.append([("alpha", v) for v in config.sweep.alpha])
        if config.sweep.temperature is not None:
            grids.append([("temperature", v) for v in config.sweep.temperature])
    seeds = config.seeds or [None]

    base = config.model_copy(update={"sweep": None, "seeds": None, "output_dir": None})
    runs: List[Tuple[str, ExperimentConfig]] = []
    for combo in itertools.product(*grids):
        for seed in seeds:
            values: Dict[str, Any] = dict(combo)
            parts = [f"{name}_{sweep_value(v)}" for name, v in combo]
            if seed is not None:
                values["seed"] = seed
            entry = override(base, "run", **values) if values else base
            name = "__".join(parts)
            if seed is not None:
                name = f"{name}/seed_{seed}" if name else f"seed_{seed}"
            runs.append((name, entry))
    return runs


def load_datasets(config: ExperimentConfig) -> Tuple[DomainDataset, DomainDataset]:
    """CSV files named in ``data``, or a freshly generated pair from ``shift``."""
    if config.data is None:
        return generate_shifted_pair(config.shift)
    n_classes = config.shift.n_classes
    source = load_csv(config.data.source, n_classes, DomainTag.SOURCE)
    target = load_csv(config.data.target, n_classes, DomainTag.TARGET)
    return source, target


def cmd_run(
    config_path: str,
    out_dir: Optional[str] = None,
    preset: Optional[str] = None,
    seed: Optional[int] = None,
) -> CommandResult[Dict[str, Any]]:
    """Execute every run the config describes and fill the run directories."""
    config = load_experiment(config_path)
    if preset is not None:
        config = config.model_copy(update={"run": apply_preset(config.run, preset)})
    if seed is not None:
        config = override(config, "run", seed=seed)

    root = Path(out_dir or config.output_dir or settings.runs_dir)
    source, target = load_datasets(config)
    runs = expand_runs(config)
    logger.info("Starting experiment", runs=len(runs), out_dir=str(root), preset=preset)

    summaries = []
    for name, entry in runs:
        run_dir = root / name if name else root
        result = run_full(
            source,
            target,
            entry.run,
            out_dir=run_dir,
            config_echo=entry.model_dump(mode="json"),
        )
        final = result.reports[-1]
        summaries.append(
            {
                "run_dir": str(run_dir),
                "final_test_accuracy": final.test_accuracy,
                "final_worst_class_f1": final.worst_class_f1,
                "pretrain_test_accuracy": result.pretrain_report.test_accuracy,
            }
        )

    return CommandResult(
        message=f"Completed {len(runs)} run(s)",
        data={"out_dir": str(root), "runs": summaries},
    )


def register(subparsers: argparse._SubParsersAction) -> None:
    parser = subparsers.add_parser("run", help="Run a self-training experiment")
    parser.add_argument("config", help="Experiment config JSON")
    parser.add_argument("--out", help="Run directory (defaults to output_dir, then runs_dir)")
    parser.add_argument("--preset", choices=preset_names(), help="Apply a named flag bundle")
    parser.add_argument("--seed", type=int, help="Override run.seed")
    parser.set_defaults(func=lambda args: cmd_run(args.config, args.out, args.preset, args.seed))
