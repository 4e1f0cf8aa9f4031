# 随机数工具模块 - 由种子和流名称派生可复现的 numpy 生成器
import numpy as np

from hcrpl.utils.errors import InvalidArgument

# Stream keys
STREAM_INIT = 0
STREAM_PRETRAIN = 1
STREAM_TRAIN = 2
STREAM_PREDICT = 3
STREAM_SSDA = 4


def derive_rng(seed: int, *keys: int) -> np.random.Generator:
    """Return a PCG64 generator keyed by ``(seed, *keys)``."""
    if seed < 0:
        raise InvalidArgument(f"seed must be nonnegative, got {seed}")
    return np.random.default_rng([int(seed), *(int(k) for k in keys)])
