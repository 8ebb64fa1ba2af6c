#!/usr/bin/env python3
"""
Runtime Configuration for the Ratio CUSUM Toolkit

Settings come from environment variables, optionally loaded from a `.env`
file with python-dotenv. Simulation defaults (grid resolution, replication
counts, levels) are fixed constants so published tables stay reproducible.

Environment variables:
- RATIOCUSUM_WORKERS: processes used for Monte Carlo replications (default 1)
- RATIOCUSUM_BLOCK_ROWS: rows per block in the all-k CUSUM evaluation (default 256)
- RATIOCUSUM_LOG_LEVEL: logging level name (default INFO)
- RATIOCUSUM_TABLE_DIR: critical-value table repository (default ./critical_tables)
"""

import logging
import os
from typing import Optional

from dotenv import load_dotenv

from .exceptions import ConfigError

logger = logging.getLogger(__name__)

# ============================================
# SIMULATION DEFAULTS
# ============================================

DEFAULT_GRID = 5000
DEFAULT_TABLE_REPS = 100000
DEFAULT_CROSSCHECK_REPS = 2000
DEFAULT_EXPERIMENT_REPS = 2000
DEFAULT_LEVELS = (0.10, 0.05, 0.01)
DEFAULT_DELTA = 0.2
GARCH_BURN_IN = 500
RNG_NAME = "numpy.PCG64"


# ============================================
# RUNTIME SETTINGS
# ============================================

class SimulationConfig:
    """Runtime settings read from the environment"""

    def __init__(self):
        self.workers = _int_setting('RATIOCUSUM_WORKERS', 1, minimum=1)
        self.block_rows = _int_setting('RATIOCUSUM_BLOCK_ROWS', 256, minimum=1)
        self.table_dir = os.getenv('RATIOCUSUM_TABLE_DIR', 'critical_tables')

        level_name = os.getenv('RATIOCUSUM_LOG_LEVEL', 'INFO').upper()
        if not isinstance(logging.getLevelName(level_name), int):
            raise ConfigError(f"RATIOCUSUM_LOG_LEVEL: unknown level {level_name!r}")
        self.log_level = level_name

    def __repr__(self) -> str:
        return (
            f"SimulationConfig(workers={self.workers}, block_rows={self.block_rows}, "
            f"log_level='{self.log_level}', table_dir='{self.table_dir}')"
        )


def _int_setting(name: str, default: int, minimum: int) -> int:
    raw = os.getenv(name)
    if raw is None or raw.strip() == '':
        return default
    try:
        value = int(raw)
    except ValueError:
        raise ConfigError(f"{name}: expected an integer, got {raw!r}")
    if value < minimum:
        raise ConfigError(f"{name}: must be >= {minimum}, got {value}")
    return value


# ============================================
# GLOBAL CONFIG INSTANCE
# ============================================

_config: Optional[SimulationConfig] = None


def get_config() -> SimulationConfig:
    """
    Get or create the process-wide configuration

    The first call loads `.env` (without overriding variables that are
    already set) and reads the environment.

    Returns:
        SimulationConfig instance
    """
    global _config

    if _config is None:
        load_dotenv(override=False)
        _config = SimulationConfig()
        logger.debug(f"Configuration loaded: {_config}")

    return _config


def reset_config():
    """Drop the cached configuration so the next get_config() re-reads it"""
    global _config
    _config = None
