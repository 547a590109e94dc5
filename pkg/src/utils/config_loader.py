"""Configuration loader utility"""

import copy
import json
import logging
from pathlib import Path
from typing import Any, Dict, Mapping, Optional

logger = logging.getLogger(__name__)


def _deep_merge(base: Dict[str, Any], override: Mapping[str, Any]) -> Dict[str, Any]:
    merged = copy.deepcopy(base)
    for key, value in override.items():
        if isinstance(value, Mapping) and isinstance(merged.get(key), dict):
            merged[key] = _deep_merge(merged[key], value)
        else:
            merged[key] = value
    return merged


class ConfigLoader:
    """Loads the simulator configuration"""

    DEFAULT_CONFIG_PATH = Path(__file__).parent.parent.parent / "config.json"

    @classmethod
    def load_config(cls, config_path: Optional[Path] = None) -> Dict[str, Any]:
        """
        Load configuration from a JSON file

        Sections present in the file override the defaults key by key, so a
        partial file is valid.

        Args:
            config_path: Path to config file (optional)

        Returns:
            Configuration dictionary
        """
        if config_path is None:
            config_path = cls.DEFAULT_CONFIG_PATH

        try:
            with open(config_path, "r", encoding="utf-8") as f:
                loaded = json.load(f)
        except FileNotFoundError:
            logger.warning("config file %s not found, using defaults", config_path)
            return cls.get_default_config()
        except json.JSONDecodeError as e:
            logger.warning("error parsing config %s: %s, using defaults", config_path, e)
            return cls.get_default_config()

        if not isinstance(loaded, Mapping):
            logger.warning("config %s is not a JSON object, using defaults", config_path)
            return cls.get_default_config()
        logger.debug("configuration loaded from %s", config_path)
        return _deep_merge(cls.get_default_config(), loaded)

    @staticmethod
    def get_default_config() -> Dict[str, Any]:
        """Return default configuration"""
        return {
            "simulation": {
                "max_rounds": 1000,
                "default_rounds": 1,
                "parallel_peers": False,
                "max_workers": 4,
            },
            "provenance": {"max_alternatives": 64},
            "engine": {"max_fixpoint_iterations": 10000},
            "trace": {"seed": 0},
            "logging": {
                "level": "WARNING",
                "format": "[%(levelname)s] %(name)s: %(message)s",
            },
        }
