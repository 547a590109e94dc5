import json
import logging

from src.utils.config_loader import ConfigLoader
from src.utils.logging_setup import setup_from_config, setup_logging


def test_defaults_when_file_missing(tmp_path):
    config = ConfigLoader.load_config(tmp_path / "missing.json")
    assert config == ConfigLoader.get_default_config()


def test_partial_file_is_merged(tmp_path):
    path = tmp_path / "config.json"
    path.write_text(json.dumps({"simulation": {"max_rounds": 7}, "extra": 1}), encoding="utf-8")
    config = ConfigLoader.load_config(path)
    assert config["simulation"]["max_rounds"] == 7
    assert config["simulation"]["default_rounds"] == 1
    assert config["provenance"]["max_alternatives"] == 64
    assert config["extra"] == 1


def test_invalid_json_falls_back(tmp_path):
    path = tmp_path / "config.json"
    path.write_text("{not json", encoding="utf-8")
    assert ConfigLoader.load_config(path) == ConfigLoader.get_default_config()


def test_non_object_falls_back(tmp_path):
    path = tmp_path / "config.json"
    path.write_text("[1, 2]", encoding="utf-8")
    assert ConfigLoader.load_config(path) == ConfigLoader.get_default_config()


def test_bundled_config_loads():
    config = ConfigLoader.load_config()
    assert config["app_name"] == "webdamlog-acl"
    assert config["trace"]["seed"] == 0


def test_defaults_are_fresh_copies():
    first = ConfigLoader.get_default_config()
    first["simulation"]["max_rounds"] = 1
    assert ConfigLoader.get_default_config()["simulation"]["max_rounds"] == 1000


def test_setup_logging_levels():
    setup_logging("debug")
    logger = logging.getLogger("src")
    assert logger.level == logging.DEBUG
    assert not logger.propagate
    setup_from_config({"logging": {"level": "ERROR"}})
    assert logger.level == logging.ERROR
    setup_from_config(ConfigLoader.get_default_config(), level="INFO")
    assert logger.level == logging.INFO
