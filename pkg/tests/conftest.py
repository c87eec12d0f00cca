"""Shared fixtures."""

from pathlib import Path

import pytest

from orbitlab.config import config


@pytest.fixture
def out_dir(tmp_path, monkeypatch) -> Path:
    """Isolated output root for reports, plots and the run log."""
    monkeypatch.setattr(config, "OUT_DIR", str(tmp_path))
    return tmp_path
