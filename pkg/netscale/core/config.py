"""Global default parameters for netscale.

Run configurations and PipelineOptions override these per run.
"""

# Sparsification
SPARSIFY_MIDDLE_FRACTION = 0.95  # Share of pooled values zeroed around the median

# Positive-definite repair
PD_EPS = 1e-8

# EBICglasso path
GLASSO_GAMMA = 0.5
GLASSO_N_LAMBDA = 100
GLASSO_LAMBDA_MIN_RATIO = 0.1
GLASSO_MAX_ITER = 10_000
GLASSO_TOL = 1e-6

# Community detection
WALKTRAP_STEPS = 4

# Unique variable analysis
UVA_CUTOFF = 0.25

# Bootstrap stability
STABILITY_THRESHOLD = 0.75
N_BOOT = 100

# Pool floors
MIN_REDUCTION_POOL = 8  # Smallest pool run_reduction will reduce
MIN_STAGE_POOL = 4      # UVA / bootEGA never shrink a pool below this

# Item generation
MAX_GENERATION_FAILURES = 5  # Consecutive failed batches before giving up
BATCH_ITEMS_PER_ATTRIBUTE = 2

# Providers
MAX_IN_FLIGHT = 4
RETRY_MAX_ATTEMPTS = 5
RETRY_BACKOFF_BASE = 1.0  # seconds
RETRY_BACKOFF_MAX = 60.0
REQUEST_TIMEOUT = 60.0
EMBED_BATCH_SIZE = 256
ANTHROPIC_DEFAULT_MAX_TOKENS = 4096
DEFAULT_EMBEDDING_MODEL = "text-embedding-3-small"
DEFAULT_CHAT_MODEL = "gpt-4o"

# Seed derivation keys (stable across releases)
SEED_KEYS = {
    "ega": 1,
    "boot": 2,
    "boot_redundant": 3,
    "layout": 4,
    "generation": 5,
}
