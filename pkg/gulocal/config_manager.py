# gulocal\config_manager.py

"""
# GU Local Models
# Copyright (c) 2025 Ali Kazemi
# Licensed under MPL 2.0
# This file is part of a derivative work and must retain this notice.

Manages run defaults for the command-line driver.

Settings are layered, lowest priority first:
-   **Defaults:** the `DEFAULT_CONFIG` dictionary below.
-   **Persisted Settings:** `gulocal.env` in the user data folder, written by
    `set_config` and cleared by `reset_to_defaults`.
-   **Config Files:** key=value files passed with `--config`, read by
    `load_config_file`.
-   **Environment:** variables named `GULOCAL_<KEY>` (upper case).

Every layer is parsed with python-dotenv, so values are plain strings until the
CLI validates the merged mapping into its `RunConfig` model.

Key Functions:
-   `get_config(key)`: Retrieves a setting, honouring all layers.
-   `set_config(key, value)`: Persists a setting in the user data folder.
-   `reset_to_defaults()`: Removes every persisted setting.
-   `merged_config(path)`: Defaults, persisted values, an optional file and the
    environment, merged in that order.
"""

# 1. IMPORTS ####################################################################################################
import logging
import os
from pathlib import Path
from typing import Any, Optional

from dotenv import dotenv_values, set_key, unset_key

# 2. CONSTANTS & DEFAULTS #######################################################################################
logger = logging.getLogger(__name__)

ENV_PREFIX = "GULOCAL_"


def get_user_data_dir() -> str:
    """
    Returns a writable directory for logs and persisted settings.

    - On Windows: %APPDATA%\\GULocal
    - Elsewhere: $XDG_CONFIG_HOME/GULocal or ~/.config/GULocal
    """
    if os.name == 'nt':
        app_data_path = os.getenv('APPDATA')
        if app_data_path:
            user_dir = os.path.join(app_data_path, "GULocal")
        else:
            user_dir = os.path.join(os.path.expanduser("~"), ".GULocal")
    else:
        xdg_config_home = os.getenv('XDG_CONFIG_HOME')
        if xdg_config_home:
            user_dir = os.path.join(xdg_config_home, "GULocal")
        else:
            user_dir = os.path.join(os.path.expanduser("~"), ".config", "GULocal")

    try:
        os.makedirs(user_dir, exist_ok=True)
    except OSError:
        logger.error(f"Could not create user data directory at {user_dir}. Falling back to a local folder.")
        user_dir = "user_data"
        os.makedirs(user_dir, exist_ok=True)

    return user_dir


DATA_FOLDER = get_user_data_dir()

SETTINGS_FILE = os.path.join(DATA_FOLDER, "gulocal.env")

DEFAULT_CONFIG = {
    "d": 2,
    "q": 3,
    "m": 0,
    "n": 1,
    "seed": 0,
    "budget": 2_000_000,
    "jobs": min(32, (os.cpu_count() or 1) + 4),
    "format": "json",
    "verify_generators": 4,
    "convolution_samples": 3,
    "trials": 100,
    "fixtures_dir": os.path.join("fixtures", "golden"),
    "log_level": "WARNING",
}


# 3. LAYERS #####################################################################################################
def _normalize(raw: dict) -> dict[str, str]:
    out = {}
    for key, value in raw.items():
        if value is None:
            continue
        key = key.strip().lower().replace("-", "_")
        if key.startswith(ENV_PREFIX.lower()):
            key = key[len(ENV_PREFIX):]
        out[key] = value
    return out


def load_config_file(path: str) -> dict[str, str]:
    """Reads a key=value file; unknown keys are kept and left for validation to reject."""
    if not Path(path).is_file():
        raise FileNotFoundError(f"Config file not found: {path}")
    values = _normalize(dotenv_values(path))
    logger.debug(f"Read {len(values)} setting(s) from {path}.")
    return values


def _persisted() -> dict[str, str]:
    if not os.path.isfile(SETTINGS_FILE):
        return {}
    return _normalize(dotenv_values(SETTINGS_FILE))


def _environment() -> dict[str, str]:
    return _normalize({k: v for k, v in os.environ.items() if k.startswith(ENV_PREFIX)})


def merged_config(path: Optional[str] = None) -> dict[str, Any]:
    merged: dict[str, Any] = dict(DEFAULT_CONFIG)
    merged.update(_persisted())
    if path:
        merged.update(load_config_file(path))
    merged.update(_environment())
    return merged


# 4. CORE CONFIG FUNCTIONS ######################################################################################
def get_config(key: str) -> Any:
    """
    Retrieves a setting: environment first, then persisted values, then the default.
    """
    key = key.lower()
    env = _environment()
    if key in env:
        return env[key]
    persisted = _persisted()
    if key in persisted:
        return persisted[key]
    logger.debug(f"Key '{key}' not set; returning default value.")
    return DEFAULT_CONFIG.get(key)


def set_config(key: str, value: Any):
    """
    Persists a setting in the user data folder.
    """
    try:
        Path(SETTINGS_FILE).touch(exist_ok=True)
        set_key(SETTINGS_FILE, key.lower(), str(value), quote_mode="never")
        logger.debug(f"Configuration key '{key}' has been set/updated.")
    except Exception:
        logger.exception(f"Failed to set configuration for key '{key}'.")
        raise


def reset_to_defaults():
    """
    Removes every persisted setting, leaving the defaults in force.
    """
    try:
        for key in list(_persisted()):
            unset_key(SETTINGS_FILE, key)
        logger.info("Configuration has been reset to default values.")
    except Exception:
        logger.exception("Failed to reset the configuration to defaults.")
        raise
