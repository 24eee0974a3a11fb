"""
Configuration module for the directional diffusion toolkit.
"""

import logging
import os

from dotenv import load_dotenv
from rich.logging import RichHandler

# Load environment variables
load_dotenv()


class Config:
    """Environment-level settings shared by every command."""

    def __init__(self):
        # Seed override applied after config files and CLI flags
        seed = os.getenv("DDM_SEED", "").strip()
        self.seed_override = int(seed) if seed else None

        # Output root for out/<command>/<tag>/
        self.output_dir = os.getenv("DDM_OUTPUT_DIR", "out")

        # Logging
        self.log_level = os.getenv("DDM_LOG_LEVEL", "INFO").upper()

    def __repr__(self):
        return f"Config(seed_override={self.seed_override}, output_dir={self.output_dir}, log_level={self.log_level})"


def configure_logging(level: str = "INFO") -> None:
    """
    Route all toolkit loggers through a rich console handler

    Args:
        level: Logging level name (DEBUG, INFO, WARNING, ...)
    """
    root = logging.getLogger("src")
    root.handlers.clear()
    handler = RichHandler(show_path=False, rich_tracebacks=True)
    handler.setFormatter(logging.Formatter("%(message)s", datefmt="[%X]"))
    root.addHandler(handler)
    root.setLevel(level.upper())
    root.propagate = False
