"""Tests for configuration module"""
import importlib
from pathlib import Path

import pytest

from app.config import Config


@pytest.fixture
def reload_config(monkeypatch):
    """Reloads app.config under patched environment; restores it afterwards"""
    from app import config as config_module

    def _reload():
        return importlib.reload(config_module).config

    yield _reload
    monkeypatch.undo()
    importlib.reload(config_module)


class TestConfig:
    """Test configuration class"""

    def test_config_initialization(self):
        """Test that config can be initialized"""
        config = Config()
        assert config is not None
        assert isinstance(config.SEED, int)
        assert isinstance(config.TOL, float)

    def test_output_path_property(self):
        """Test OUTPUT_PATH is a Path built from OUTPUT_DIR"""
        config = Config()
        assert isinstance(config.OUTPUT_PATH, Path)
        assert config.OUTPUT_PATH == Path(config.OUTPUT_DIR)

    def test_environment_overrides(self, monkeypatch, reload_config):
        """Test OPFREE_* variables are picked up on reload"""
        monkeypatch.setenv("OPFREE_OUTPUT_DIR", "custom_results")
        monkeypatch.setenv("OPFREE_SEED", "7")
        monkeypatch.setenv("OPFREE_TOL", "1e-6")
        monkeypatch.setenv("OPFREE_NC_MAX_ORDER", "10")
        monkeypatch.setenv("OPFREE_WORKERS", "2")

        config = reload_config()

        assert config.OUTPUT_PATH == Path("custom_results")
        assert config.SEED == 7
        assert config.TOL == 1e-6
        assert config.NC_MAX_ORDER == 10
        assert config.WORKERS == 2

    def test_defaults(self, monkeypatch, reload_config):
        """Test documented defaults when the environment is empty"""
        for name in ("OPFREE_SEED", "OPFREE_TOL", "OPFREE_ALGEBRA_TOL", "OPFREE_CUMULANT_MAX_ORDER",
                     "OPFREE_GRID_SIZE", "OPFREE_OUTPUT_DIR"):
            monkeypatch.delenv(name, raising=False)

        config = reload_config()

        assert config.SEED == 20240601
        assert config.TOL == 1e-8
        assert config.ALGEBRA_TOL == 1e-10
        assert config.CUMULANT_MAX_ORDER == 8
        assert config.GRID_SIZE == 64
        assert config.OUTPUT_DIR == "results"
