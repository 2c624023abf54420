"""
Runtime settings
Defaults come from environment variables, optionally loaded from a .env file
"""

import os
import logging
from dataclasses import dataclass
from dotenv import load_dotenv

# Load environment variables
load_dotenv()

logging.basicConfig(level=logging.INFO)
logger = logging.getLogger(__name__)


def _int_env(name: str, default: int) -> int:
    raw = os.getenv(name)
    if raw is None or not raw.strip():
        return default
    try:
        return int(raw)
    except ValueError:
        logger.warning(f"Ignoring non-integer {name}={raw!r}; using {default}")
        return default


@dataclass(frozen=True)
class Settings:
    """Process-wide defaults for simulation runs and logging"""

    n_jobs: int = 1
    seed: int = 20240101
    n_reps: int = 10000
    chunk_size: int = 250
    log_level: str = "INFO"

    @classmethod
    def from_env(cls) -> "Settings":
        """
        Build settings from SURVEFF_* environment variables

        Returns:
            Settings with unset variables falling back to class defaults
        """
        chunk_size = _int_env("SURVEFF_CHUNK_SIZE", cls.chunk_size)
        return cls(
            n_jobs=_int_env("SURVEFF_N_JOBS", cls.n_jobs),
            seed=_int_env("SURVEFF_SEED", cls.seed),
            n_reps=_int_env("SURVEFF_REPS", cls.n_reps),
            chunk_size=max(chunk_size, 1),
            log_level=os.getenv("SURVEFF_LOG_LEVEL", cls.log_level).upper(),
        )


def configure_logging(level: str) -> None:
    """Set the root logger level by name (e.g. 'DEBUG', 'WARNING')"""
    numeric = getattr(logging, level.upper(), None)
    if not isinstance(numeric, int):
        raise ValueError(f"Unknown log level: {level}")
    logging.getLogger().setLevel(numeric)
