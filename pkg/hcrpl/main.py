# HCRPL 命令行主入口 - 解析子命令、配置日志并输出结构化结果和错误报告
import argparse
import sys
from typing import List, Optional

from hcrpl import __version__
from hcrpl.commands import generate, report, run
from hcrpl.config.settings import settings
from hcrpl.schemas.base import ErrorReport
from hcrpl.utils.errors import HCRPLError
from hcrpl.utils.logging import get_logger, setup_logging


logger = get_logger(__name__)


def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(
        prog=settings.app_name,
        description="Self-training domain adaptation with calibrated, ensembled pseudo labels",
    )
    parser.add_argument("--version", action="version", version=f"%(prog)s {__version__}")
    parser.add_argument(
        "--log-level",
        choices=["DEBUG", "INFO", "WARNING", "ERROR", "CRITICAL"],
        type=str.upper,
        help="Override HCRPL_LOG_LEVEL",
    )
    subparsers = parser.add_subparsers(dest="command", required=True)
    generate.register(subparsers)
    run.register(subparsers)
    report.register(subparsers)
    return parser


def main(argv: Optional[List[str]] = None) -> int:
    """Run one command; returns 0 on success, 1 on runtime errors, 2 on usage errors."""
    parser = build_parser()
    try:
        args = parser.parse_args(argv)
    except SystemExit as e:
        return int(e.code or 0)

    setup_logging(args.log_level or "")
    try:
        result = args.func(args)
    except HCRPLError as e:
        logger.error("Command failed", command=args.command, error_code=e.error_code, error=e.message)
        print(e.to_report().model_dump_json(indent=2))
        return e.exit_code
    except Exception as e:
        logger.exception("Unexpected error", command=args.command)
        print(ErrorReport(message=str(e), error_code="INTERNAL_ERROR").model_dump_json(indent=2))
        return 1

    print(result.model_dump_json(indent=2))
    return 0


if __name__ == "__main__":
    sys.exit(main())
