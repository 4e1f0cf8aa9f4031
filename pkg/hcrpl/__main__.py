# 模块执行入口 - 支持 python -m hcrpl
import sys

from hcrpl.main import main

sys.exit(main())
