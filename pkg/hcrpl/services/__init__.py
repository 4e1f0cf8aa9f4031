# 服务包
