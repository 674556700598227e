"""Configuration access helpers."""

from flexshare.utils.config_manager import ConfigManager

__all__ = ["ConfigManager"]
