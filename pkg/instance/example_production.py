# Settings from config/default.py can be overwritten here

# OUTPUT_PATH = Path('/some/location/somewhere')
# WORKERS = 4
# LOG_LEVEL = 7
