"""Configuration management for orbitlab."""

import os
import logging
from pathlib import Path
from dotenv import load_dotenv

# Load environment variables
load_dotenv()

class ConfigError(Exception):
    """Configuration validation error."""
    pass

class Config:
    """Configuration class for orbitlab with validation."""

    # Logging
    LOG_LEVEL: str = os.getenv("ORBITLAB_LOG_LEVEL", "INFO").upper()
    LOG_FILE: str = os.getenv("ORBITLAB_LOG_FILE", "orbitlab.log")

    # Outputs
    OUT_DIR: str = os.getenv("ORBITLAB_OUT_DIR", "runs")
    """Root directory for reports, plots and the run log."""
    RUN_LOG: str = os.getenv("ORBITLAB_RUN_LOG", "run_log.jsonl")
    """Append-only JSON-lines run log, relative to OUT_DIR."""

    # Concurrency
    WORKERS: int = int(os.getenv("ORBITLAB_WORKERS", "0"))
    """Worker cap for sample evaluation. 0 means available parallelism."""
    CHUNK_SIZE: int = int(os.getenv("ORBITLAB_CHUNK_SIZE", "64"))
    """Samples per executor job. Results depend on this, not on WORKERS."""
    DEFAULT_SEED: int = int(os.getenv("ORBITLAB_SEED", "20240611"))

    # Numerics
    POLE_EPSILON: float = float(os.getenv("POLE_EPSILON", "1e-300"))
    """|cz+d| below this signals a pole."""
    ARC_PRECISION_BITS: int = int(os.getenv("ARC_PRECISION_BITS", "128"))
    PRECISION_ALARM_TURNS: float = float(os.getenv("PRECISION_ALARM_TURNS", str(2.0 ** -32)))
    """Orbit error bound (turns) past which a trace is rejected."""
    CARDIOID_BOUNDARY_SAMPLES: int = int(os.getenv("CARDIOID_BOUNDARY_SAMPLES", "4096"))
    BOUNDARY_DISTANCE_RTOL: float = float(os.getenv("BOUNDARY_DISTANCE_RTOL", "1e-10"))
    MOBIUS_TOLERANCE: float = 1e-10

    # Walk on spheres
    WOS_SHELL_FRACTION: float = float(os.getenv("WOS_SHELL_FRACTION", "1e-6"))
    """Absorption shell as a fraction of the region diameter."""
    WOS_STEP_CAP: int = int(os.getenv("WOS_STEP_CAP", "100000"))
    WOS_MEAN_STEP_CAP: int = int(os.getenv("WOS_MEAN_STEP_CAP", "20000"))
    WOS_CHUNK_WALKS: int = int(os.getenv("WOS_CHUNK_WALKS", "10000"))

    # Experiment defaults
    DW_TOL: float = float(os.getenv("DW_TOL", "1e-3"))
    DEFAULT_HORIZON: int = int(os.getenv("DEFAULT_HORIZON", "100"))
    DEFAULT_SAMPLES: int = int(os.getenv("DEFAULT_SAMPLES", "1000"))
    DEFAULT_VISITS: int = int(os.getenv("DEFAULT_VISITS", "3"))

    @classmethod
    def validate_config(cls) -> None:
        """Validate that configured values are usable.

        Raises:
            ConfigError: If configuration is invalid.
        """
        if cls.WORKERS < 0:
            raise ConfigError(f"ORBITLAB_WORKERS must be >= 0, got {cls.WORKERS}")

        if not (1 <= cls.CHUNK_SIZE <= 100000):
            raise ConfigError(
                f"ORBITLAB_CHUNK_SIZE must be between 1-100000, got {cls.CHUNK_SIZE}"
            )

        if cls.ARC_PRECISION_BITS < 64:
            raise ConfigError(
                f"ARC_PRECISION_BITS must be at least 64, got {cls.ARC_PRECISION_BITS}"
            )

        if not (0 < cls.WOS_SHELL_FRACTION < 1e-2):
            raise ConfigError(
                f"WOS_SHELL_FRACTION must be in (0, 0.01), got {cls.WOS_SHELL_FRACTION}"
            )

        if cls.WOS_STEP_CAP < 100 or cls.WOS_MEAN_STEP_CAP < 100:
            raise ConfigError(
                f"Walk step caps must be at least 100, got {cls.WOS_STEP_CAP} / {cls.WOS_MEAN_STEP_CAP}"
            )

        if not (0 < cls.DW_TOL < 1):
            raise ConfigError(f"DW_TOL must be in (0, 1), got {cls.DW_TOL}")

    @classmethod
    def worker_count(cls) -> int:
        """Effective worker cap."""
        if cls.WORKERS > 0:
            return cls.WORKERS
        return os.cpu_count() or 1

    @classmethod
    def out_dir(cls) -> Path:
        return Path(cls.OUT_DIR)

    @classmethod
    def setup_logging(cls) -> None:
        """Setup logging configuration."""
        logging.basicConfig(
            level=getattr(logging, cls.LOG_LEVEL, logging.INFO),
            format='%(asctime)s - %(name)s - %(levelname)s - %(message)s',
            handlers=[
                logging.StreamHandler(),
                logging.FileHandler(cls.LOG_FILE, mode='a')
            ]
        )

        # matplotlib font discovery is chatty at DEBUG
        logging.getLogger('matplotlib').setLevel(logging.WARNING)

# Global config instance
config = Config()
