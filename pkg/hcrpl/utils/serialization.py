# 序列化工具模块 - 生成可逐字节复现的 JSON 和 CSV 文件
import csv
import json
from pathlib import Path
from typing import Any, Iterable, List, Sequence, Union

from hcrpl.utils.errors import IoError, SchemaError

PathLike = Union[str, Path]


def format_float(value: float) -> str:
    """17 significant digits: enough to round-trip any double."""
    return format(float(value), ".17g")


def dumps_json(payload: Any) -> str:
    """Serialize with stable key ordering."""
    return json.dumps(payload, sort_keys=True, indent=2, ensure_ascii=False) + "\n"


def write_json(path: PathLike, payload: Any) -> None:
    """Write ``payload`` as deterministic UTF-8 JSON."""
    try:
        Path(path).write_text(dumps_json(payload), encoding="utf-8", newline="\n")
    except OSError as e:
        raise IoError(f"Failed to write {path}: {e}", {"path": str(path)}) from e


def read_json(path: PathLike) -> Any:
    """Read a JSON document."""
    try:
        return json.loads(Path(path).read_text(encoding="utf-8"))
    except OSError as e:
        raise IoError(f"Failed to read {path}: {e}", {"path": str(path)}) from e
    except (UnicodeDecodeError, json.JSONDecodeError) as e:
        raise SchemaError(f"{path} is not valid UTF-8 JSON: {e}", {"path": str(path)}) from e


def write_csv(path: PathLike, header: Sequence[str], rows: Iterable[Sequence[Any]]) -> None:
    """Write rows with LF line endings; floats use :func:`format_float`."""
    try:
        with open(path, "w", encoding="utf-8", newline="") as fh:
            writer = csv.writer(fh, lineterminator="\n")
            writer.writerow(header)
            for row in rows:
                writer.writerow([format_float(v) if isinstance(v, float) else v for v in row])
    except OSError as e:
        raise IoError(f"Failed to write {path}: {e}", {"path": str(path)}) from e


def read_csv(path: PathLike) -> List[List[str]]:
    """Read all rows (header included)."""
    try:
        with open(path, "r", encoding="utf-8", newline="") as fh:
            return [row for row in csv.reader(fh)]
    except OSError as e:
        raise IoError(f"Failed to read {path}: {e}", {"path": str(path)}) from e
    except (UnicodeDecodeError, csv.Error) as e:
        raise SchemaError(f"{path} is not a readable UTF-8 CSV file: {e}", {"path": str(path)}) from e
