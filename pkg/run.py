#!/usr/bin/env python3
# 命令行启动脚本 - 在源码目录中直接运行 hcrpl 命令
import os
import sys

# Add the project root to Python path
sys.path.insert(0, os.path.dirname(os.path.abspath(__file__)))

from hcrpl.main import main  # noqa: E402

if __name__ == "__main__":
    sys.exit(main())
