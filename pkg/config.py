"""Run-time constants for SurfaceScope."""

import os

EXHAUSTIVE_BOUND = 20  # largest vertex count for the subset oracle
ENUMERATION_BUDGET = 18  # largest edge count for exhaustive superfaces
RIGIDITY_PRIME = 2**61 - 1
FAST_PRIME = 2**31 - 1  # fits int64 elimination
RANK_TRIALS = 3
DEFAULT_SEED = 0
REPAIR_MAX_MOVES = 10_000

WORKERS_ENV = "SURFACESCOPE_WORKERS"
LOG_LEVEL_ENV = "SURFACESCOPE_LOG_LEVEL"


def worker_count():
    """Number of worker threads for parallel library calls."""
    value = os.environ.get(WORKERS_ENV, "1")
    try:
        count = int(value)
    except ValueError as error:
        raise ValueError(f"{WORKERS_ENV} must be an integer: {value}") from error
    return max(1, count)
