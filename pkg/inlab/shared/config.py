"""Configuration utilities shared by every inlab module.

Environment-level settings only (log level, output directory, worker count).
Experiment knobs live in the JSON training config, see inlab.harness.config.
"""
import os
import logging
from pathlib import Path

from dotenv import load_dotenv

# Load environment variables from .env file (if present)
load_dotenv()

LOG_LEVELS = ("DEBUG", "INFO", "WARNING", "ERROR")


def get_log_level() -> str:
    """Get log level from environment."""
    return os.getenv("LOG_LEVEL", "INFO").upper()


def set_log_level(level: str) -> None:
    """Apply a level to the root logger, overriding LOG_LEVEL."""
    logging.getLogger().setLevel(level.upper())


# Configure logging
logging.basicConfig(
    level=get_log_level(),
    format='[%(name)s] %(asctime)s - %(levelname)s - %(message)s'
)


def get_out_dir() -> Path:
    """Get default output directory for logs, checkpoints and plot data."""
    return Path(os.getenv("INLAB_OUT_DIR", "runs"))


def get_workers() -> int:
    """Get default number of worker threads for stepping environment copies."""
    return int(os.getenv("INLAB_WORKERS", "1"))


def progress_enabled() -> bool:
    """Whether tqdm progress bars are shown."""
    return os.getenv("INLAB_PROGRESS", "1") not in ("0", "false", "False", "")
