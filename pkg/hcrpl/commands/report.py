# 报告汇总命令模块 - 合并多个运行目录的 metrics.csv 并计算跨种子统计
import argparse
import re
from pathlib import Path
from typing import Any, Dict, List, Optional, Sequence

import numpy as np

from hcrpl.config.settings import settings
from hcrpl.schemas.base import CommandResult
from hcrpl.utils.errors import MissingMetrics, SchemaError, UsageError
from hcrpl.utils.logging import get_logger
from hcrpl.utils.serialization import read_csv, write_csv, write_json


logger = get_logger(__name__)

METRICS_FILE = "metrics.csv"
SUMMARY_FIELDS = ["final_test_accuracy", "final_worst_class_f1", "final_macro_f1"]
SEED_DIR = re.compile(r"seed_\d+")


def read_metrics(run_dir: Path) -> List[Dict[str, str]]:
    """Rows of ``run_dir/metrics.csv`` keyed by column name."""
    path = run_dir / METRICS_FILE
    if not path.is_file():
        raise MissingMetrics(f"{run_dir}: no {METRICS_FILE}", {"run_dir": str(run_dir)})
    rows = read_csv(path)
    if len(rows) < 2:
        raise MissingMetrics(f"{run_dir}: {METRICS_FILE} has no rounds", {"run_dir": str(run_dir)})
    header = rows[0]
    return [dict(zip(header, row)) for row in rows[1:]]


def config_group(run_dir: Path) -> str:
    """Run path without its ``seed_<s>`` component; runs sharing it differ only by seed."""
    parts = [p for p in run_dir.parts if not SEED_DIR.fullmatch(p)]
    return Path(*parts).as_posix() if parts else "."


def seed_statistics(runs: List[Dict[str, Any]]) -> Dict[str, Any]:
    return {
        "count": len(runs),
        "mean": {f: float(np.mean([r[f] for r in runs])) for f in SUMMARY_FIELDS},
        "std": {f: float(np.std([r[f] for r in runs], ddof=0)) for f in SUMMARY_FIELDS},
    }


def run_summary(run_id: str, group: str, rows: List[Dict[str, str]]) -> Dict[str, Any]:
    final = rows[-1]
    return {
        "run_id": run_id,
        "group": group,
        "rounds": len(rows),
        "final_test_accuracy": float(final["test_accuracy"]),
        "final_worst_class_f1": float(final["worst_class_f1"]),
        "final_macro_f1": float(final["macro_f1"]),
    }


def cmd_report(run_dirs: Sequence[str], out_dir: Optional[str] = None) -> CommandResult[Dict[str, Any]]:
    """Join runs into ``report.csv`` and write ``summary.json``.

    Runs are grouped by configuration (see :func:`config_group`) and mean/std
    are taken over the seeds of each group. Standard deviations are
    population values (ddof=0), so identical runs give exactly 0.
    """
    if not run_dirs:
        raise UsageError("report needs at least one run directory")

    header: Optional[List[str]] = None
    table: List[List[Any]] = []
    runs: List[Dict[str, Any]] = []
    for run_dir in run_dirs:
        path = Path(run_dir)
        run_id = path.as_posix()
        rows = read_metrics(path)
        columns = list(rows[0].keys())
        if header is None:
            header = columns
        elif columns != header:
            raise SchemaError(
                f"{run_dir}: metrics.csv columns differ from {run_dirs[0]}",
                {"run_dir": str(run_dir)},
            )
        table.extend([run_id] + [row[c] for c in header] for row in rows)
        runs.append(run_summary(run_id, config_group(path), rows))

    out = Path(out_dir or settings.runs_dir)
    out.mkdir(parents=True, exist_ok=True)
    write_csv(out / "report.csv", ["run_id"] + header, table)

    grouped: Dict[str, List[Dict[str, Any]]] = {}
    for run in runs:
        grouped.setdefault(run["group"], []).append(run)
    summary = {
        "runs": runs,
        "count": len(runs),
        "groups": {group: seed_statistics(members) for group, members in grouped.items()},
    }
    write_json(out / "summary.json", summary)

    logger.info("Report written", runs=len(runs), groups=len(grouped), out_dir=str(out))
    return CommandResult(message=f"Aggregated {len(runs)} run(s)", data={"out_dir": str(out), **summary})


def register(subparsers: argparse._SubParsersAction) -> None:
    parser = subparsers.add_parser("report", help="Aggregate metrics of finished runs")
    parser.add_argument("run_dirs", nargs="*", help="Run directories containing metrics.csv")
    parser.add_argument("--out", help="Directory for report.csv and summary.json")
    parser.set_defaults(func=lambda args: cmd_report(args.run_dirs, args.out))
