# gulocal\logging_config.py

"""
# GU Local Models
# Copyright (c) 2025 Ali Kazemi
# Licensed under MPL 2.0
# This file is part of a derivative work and must retain this notice.

Configures logging for the command-line driver and the library modules.

Call `setup_logging` once at the beginning of a run. Library modules only
create their own `logging.getLogger(__name__)` and never attach handlers.

Key Features:
- **Parameterized Setup:** `setup_logging` configures the root logger at a
  given level ("DEBUG", "INFO", ...).
- **Console and File Output:** a `rich` console handler on stderr, so that
  stdout carries nothing but the emitted report, and a rotating log file in
  the user data folder.
- **Idempotent:** existing root handlers are cleared before new ones are added.
"""

# 1. IMPORTS ####################################################################################################
import logging
import os
from logging.handlers import RotatingFileHandler
from typing import Optional

from rich.console import Console
from rich.logging import RichHandler

from .config_manager import DATA_FOLDER

# 2. CONSTANTS & SETUP ##########################################################################################
LOG_DIR = os.path.join(DATA_FOLDER, "logs")

LOG_FILE = os.path.join(LOG_DIR, "gulocal.log")

LOG_LEVELS = {
    "DEBUG": logging.DEBUG,
    "INFO": logging.INFO,
    "WARNING": logging.WARNING,
    "ERROR": logging.ERROR,
    "CRITICAL": logging.CRITICAL,
}

DEFAULT_LOG_LEVEL = "WARNING"


# 3. LOGGING CONFIGURATION FUNCTION #############################################################################
def setup_logging(level: str = DEFAULT_LOG_LEVEL, log_file: Optional[str] = LOG_FILE):
    """
    Configures the root logger with a console handler and, unless `log_file` is
    None, a rotating file handler.

    Args:
        level (str): The desired logging level as a string (e.g., "DEBUG", "INFO").
        log_file (str | None): Path of the rotating log file.
    """
    log_level_str = level.upper()
    numeric_level = LOG_LEVELS.get(log_level_str, LOG_LEVELS[DEFAULT_LOG_LEVEL])

    log_formatter = logging.Formatter(
        '%(asctime)s - %(levelname)s - [%(name)s:%(funcName)s:%(lineno)d] - %(message)s',
        datefmt='%Y-%m-%d %H:%M:%S'
    )

    root_logger = logging.getLogger()
    if root_logger.hasHandlers():
        root_logger.handlers.clear()

    root_logger.setLevel(numeric_level)

    # --- Console Handler ---
    console_handler = RichHandler(console=Console(stderr=True), show_path=False, rich_tracebacks=True)
    console_handler.setLevel(numeric_level)
    root_logger.addHandler(console_handler)

    # --- Rotating File Handler ---
    if log_file:
        os.makedirs(os.path.dirname(log_file) or ".", exist_ok=True)
        file_handler = RotatingFileHandler(
            log_file,
            maxBytes=10 * 1024 * 1024,  # 10 MB
            backupCount=5,
            encoding='utf-8'
        )
        file_handler.setLevel(numeric_level)
        file_handler.setFormatter(log_formatter)
        root_logger.addHandler(file_handler)

    initial_logger = logging.getLogger(__name__)
    initial_logger.info(f"Logging configured successfully with {log_level_str} level verbosity.")
    if log_file and numeric_level == logging.DEBUG:
        initial_logger.debug(f"Log file location: {os.path.abspath(log_file)}")
