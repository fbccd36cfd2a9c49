# tests\conftest.py

"""
# GU Local Models
# Copyright (c) 2025 Ali Kazemi
# Licensed under MPL 2.0
# This file is part of a derivative work and must retain this notice.
"""

import os
from pathlib import Path

import pytest

from gulocal import config_manager
from gulocal.gfring import field_ctx

GOLDEN_DIR = Path(__file__).resolve().parents[1] / "fixtures" / "golden"


@pytest.fixture(autouse=True)
def isolated_settings(tmp_path, monkeypatch):
    """Keeps persisted user settings and GULOCAL_* variables out of every test."""
    monkeypatch.setattr(config_manager, "SETTINGS_FILE", str(tmp_path / "gulocal.env"))
    for key in list(os.environ):
        if key.startswith(config_manager.ENV_PREFIX):
            monkeypatch.delenv(key)
    yield


@pytest.fixture
def f9():
    return field_ctx(3, 2)


@pytest.fixture
def f25():
    return field_ctx(5, 2)


@pytest.fixture
def golden_dir():
    return GOLDEN_DIR
