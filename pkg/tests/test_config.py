import pytest

from orbitlab.config import Config, ConfigError


def test_defaults_validate():
    Config.validate_config()


@pytest.mark.parametrize(
    "name, value",
    [
        ("WORKERS", -1),
        ("CHUNK_SIZE", 0),
        ("ARC_PRECISION_BITS", 53),
        ("WOS_SHELL_FRACTION", 0.5),
        ("WOS_STEP_CAP", 10),
        ("DW_TOL", 1.0),
    ],
)
def test_invalid_settings(monkeypatch, name, value):
    monkeypatch.setattr(Config, name, value)
    with pytest.raises(ConfigError):
        Config.validate_config()


def test_worker_count(monkeypatch):
    monkeypatch.setattr(Config, "WORKERS", 3)
    assert Config.worker_count() == 3
    monkeypatch.setattr(Config, "WORKERS", 0)
    assert Config.worker_count() >= 1


def test_out_dir(monkeypatch, tmp_path):
    monkeypatch.setattr(Config, "OUT_DIR", str(tmp_path))
    assert Config.out_dir() == tmp_path
