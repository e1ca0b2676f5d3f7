# Don't edit this file. To override settings please use instance/production.py
# or a JSON run config (--config) with the same upper case keys.
from pathlib import Path

VERSION = '1.0.0'
MODEL_SCHEMA_VERSION = 1

# Syslog style priorities, an entry is emitted if its number <= LOG_LEVEL
LOG_LEVELS = {
    0: 'emergency',
    1: 'alert',
    2: 'critical',
    3: 'error',
    4: 'warn',
    5: 'notice',
    6: 'info',
    7: 'debug'}
LOG_LEVEL = 6
LOG_FILE: Path | None = None

# Paths are implemented operating system independent using pathlib.
# To override them (in instance/production.py) either use them like here
# or use absolute paths like e.g. pathlib.Path('/some/location/somewhere')
FILES_PATH = Path(__file__).parent.parent / 'files'
OUTPUT_PATH = Path(FILES_PATH) / 'output'

# Dataset
DATA: str | None = None
LABEL: str | int = -1  # Column name or index, -1 is the last column
HEADER = True
NORMALIZE = True  # z-score with training statistics

# Model, K and LAMBDA1 have no defaults and have to be set or tuned
K: int | None = None
LAMBDA1: float | None = None
LAMBDA2 = 1e-4
ETA = 3.0
OUTER_MAX = 20
OUTER_TOL = 1e-4
SEED = 0
FIXED_WEIGHTS = False  # Ablation: triplet weights frozen to 1

# Metric solver
RCGD_MAX_ITERS = 100
RCGD_GRAD_TOL = 1e-5
RCGD_ARMIJO_C = 1e-4
RCGD_BACKTRACK_FACTOR = 0.5
RCGD_MAX_BACKTRACKS = 30
RCGD_INITIAL_STEP = 1.0
RCGD_BETA_RULE = 'polak_ribiere_plus'  # or 'fletcher_reeves'
RCGD_FIXED_BETA: float | None = None
RCGD_TRANSPORT = 'reprojection'  # or 'airm'
# Start each line search from the last accepted step, doubled when it needed
# no backtracking
RCGD_STEP_MEMORY = True

# Anchor initialization
GMM_MAX_ITER = 100
GMM_TOL = 1e-6
GMM_REG_COVAR = 1e-6
GMM_MIN_WEIGHT = 1e-8
GMM_MAX_RESEEDS = 10

# Evaluation protocol
TRAIN_FRACTION = 0.7
TRIALS = 10
STRATIFIED = True
PER_ANCHOR_SIMILAR = 10
PER_ANCHOR_DISSIMILAR = 10
CROSS_PRODUCT_TRIPLETS = False
KNN_K = 3
TUNE = False  # Tune K and LAMBDA1 on the first trial, then freeze
K_GRID = [2, 4, 6, 8, 10, 15, 20, 25, 30, 40, 50]
LAMBDA1_GRID = [0.1, 1.0, 10.0, 100.0, 1000.0]
WORKERS = 0  # Size of the trial pool, 0 uses all available cores
INCLUDE_TIMING = False  # Timings break byte identical reruns
