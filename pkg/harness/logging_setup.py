"""
Logging configuration for command-line runs.
"""

import logging
from typing import Dict, Optional

from config import LOGGING_CONFIG


def configure_logging(settings: Optional[Dict] = None, level: Optional[str] = None) -> None:
    """
    Configure the root logger from LOGGING_CONFIG.

    Args:
        settings (dict, optional): Overrides for LOGGING_CONFIG entries
        level (str, optional): Level name taking precedence over settings
    """
    merged = dict(LOGGING_CONFIG)
    merged.update(settings or {})
    handlers = [logging.StreamHandler()]
    if merged.get('log_file'):
        handlers.append(logging.FileHandler(merged['log_file']))
    logging.basicConfig(
        level=(level or merged['level']).upper(),
        format=merged['format'],
        handlers=handlers,
        force=True,
    )
