"""Logging configuration for the command-line entry point"""

import logging.config
from typing import Any, Mapping, Optional

DEFAULT_FORMAT = "[%(levelname)s] %(name)s: %(message)s"


def setup_logging(level: str = "WARNING", fmt: Optional[str] = None) -> None:
    """Route every `src.*` logger to stderr at `level`"""
    logging.config.dictConfig({
        "version": 1,
        "disable_existing_loggers": False,
        "formatters": {"plain": {"format": fmt or DEFAULT_FORMAT}},
        "handlers": {
            "stderr": {
                "class": "logging.StreamHandler",
                "formatter": "plain",
                "stream": "ext://sys.stderr",
            },
        },
        "loggers": {
            "src": {"handlers": ["stderr"], "level": level.upper(), "propagate": False},
        },
    })


def setup_from_config(config: Mapping[str, Any], level: Optional[str] = None) -> None:
    section = config.get("logging", {})
    setup_logging(level or section.get("level", "WARNING"), section.get("format"))
