# ============================================================
# settings.py
# Shared constants and logging setup for the SS toolkit
# ============================================================

import os
import sys
import time
from pathlib import Path

from loguru import logger

# ------------------------------------------------------------
# Paths
# ------------------------------------------------------------
OUT_DIR = Path("data_outputs")

# ------------------------------------------------------------
# Budgets
# ------------------------------------------------------------
DEFAULT_NODE_BUDGET = 1_000_000
DEFAULT_VERIFY_BUDGET = 20_000
GENERATION_RETRIES = 1000
DEFAULT_TIME_BUDGET_S = 30.0

# ------------------------------------------------------------
# Benchmark defaults
# ------------------------------------------------------------
N_JOBS = max(1, min(8, (os.cpu_count() or 2) - 1))
DEFAULT_M_RANGE = (2, 4)
DEFAULT_Q_MAX = 8
DEFAULT_K_VALUES = (1,)
DEFAULT_TRIALS = 20
DEFAULT_SEED = 42

LOG_FORMAT = "<green>{time:HH:mm:ss}</green> | <level>{level: <7}</level> | {message}"


def configure_logging(verbose=False, log_file=None):
    """Route loguru to stderr (stdout carries CLI results) and optionally to a file."""
    logger.remove()
    logger.add(sys.stderr, level="DEBUG" if verbose else "INFO", format=LOG_FORMAT)
    if log_file:
        log_path = Path(log_file)
        log_path.parent.mkdir(parents=True, exist_ok=True)
        logger.add(log_path, level="DEBUG", format=LOG_FORMAT, encoding="utf-8")


def deadline_after(seconds):
    """Monotonic timestamp `seconds` from now, or None for no limit."""
    if seconds is None:
        return None
    return time.monotonic() + seconds


def expired(deadline):
    return deadline is not None and time.monotonic() > deadline
