SEED = 0
WORKERS = 1
LOG_LEVEL = 3
INCLUDE_TIMING = False
