# HCRPL 包入口 - 困难类别校正伪标签自训练引擎
__version__ = "1.0.0"
