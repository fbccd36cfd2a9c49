# tests\test_config.py

"""
# GU Local Models
# Copyright (c) 2025 Ali Kazemi
# Licensed under MPL 2.0
# This file is part of a derivative work and must retain this notice.
"""

import logging
from logging.handlers import RotatingFileHandler

import pytest
from rich.logging import RichHandler

from gulocal import config_manager
from gulocal.config_manager import (
    DEFAULT_CONFIG,
    get_config,
    load_config_file,
    merged_config,
    reset_to_defaults,
    set_config,
)
from gulocal.logging_config import setup_logging


# ---------------------------------------------------------
# Settings layers
# ---------------------------------------------------------
def test_defaults_are_returned_when_nothing_is_set():
    assert get_config("q") == DEFAULT_CONFIG["q"]
    assert get_config("does_not_exist") is None


def test_persisted_settings_roundtrip():
    set_config("seed", 42)
    assert get_config("seed") == "42"
    assert merged_config()["seed"] == "42"
    reset_to_defaults()
    assert get_config("seed") == DEFAULT_CONFIG["seed"]


def test_environment_beats_persisted_settings(monkeypatch):
    set_config("budget", 10)
    monkeypatch.setenv("GULOCAL_BUDGET", "20")
    assert get_config("budget") == "20"
    assert merged_config()["budget"] == "20"


def test_config_file_keys_are_normalized(tmp_path):
    path = tmp_path / "run.env"
    path.write_text("GULOCAL_Q=5\nverify-generators=0\n", encoding="utf-8")
    values = load_config_file(str(path))
    assert values == {"q": "5", "verify_generators": "0"}
    assert merged_config(str(path))["q"] == "5"


def test_missing_config_file():
    with pytest.raises(FileNotFoundError):
        load_config_file("no/such/file.env")


def test_settings_file_is_isolated(tmp_path):
    assert config_manager.SETTINGS_FILE == str(tmp_path / "gulocal.env")


def test_convolution_samples_default_checks_several_representatives():
    assert DEFAULT_CONFIG["convolution_samples"] == 3
    assert merged_config()["convolution_samples"] == 3


# ---------------------------------------------------------
# Logging
# ---------------------------------------------------------
def test_setup_logging_is_idempotent(tmp_path):
    root = logging.getLogger()
    saved = list(root.handlers), root.level
    try:
        log_file = tmp_path / "logs" / "gulocal.log"
        setup_logging("DEBUG", log_file=str(log_file))
        setup_logging("INFO", log_file=str(log_file))
        assert root.level == logging.INFO
        assert len(root.handlers) == 2
        assert any(isinstance(h, RichHandler) for h in root.handlers)
        assert any(isinstance(h, RotatingFileHandler) for h in root.handlers)
        logging.getLogger("gulocal.test").info("hello")
        assert log_file.exists()
    finally:
        for handler in root.handlers:
            handler.close()
        root.handlers[:] = saved[0]
        root.setLevel(saved[1])


def test_setup_logging_without_file():
    root = logging.getLogger()
    saved = list(root.handlers), root.level
    try:
        setup_logging("bogus", log_file=None)
        assert root.level == logging.WARNING
        assert len(root.handlers) == 1
    finally:
        root.handlers[:] = saved[0]
        root.setLevel(saved[1])
