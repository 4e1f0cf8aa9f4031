# 命令行子命令包 - generate、run、report
