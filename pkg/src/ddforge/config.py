"""Loading of the INI-style device/noise/run configuration."""

from __future__ import annotations

import configparser
from importlib import resources
from pathlib import Path


def default_config_text() -> str:
    return resources.files("ddforge").joinpath("data/defaults.ini").read_text()


def read_config(path: str | Path | None = None) -> configparser.ConfigParser:
    """Defaults overlaid with ``path`` (if given)."""
    parser = configparser.ConfigParser(inline_comment_prefixes=("#", ";"))
    parser.optionxform = str  # keep gate names upper-case
    parser.read_string(default_config_text())
    if path is not None:
        with open(path) as fh:
            parser.read_file(fh)
    return parser
