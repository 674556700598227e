import json
import os
from pathlib import Path
from typing import Any, Dict, Optional

try:
    from dotenv import load_dotenv
except ImportError:  # pragma: no cover - optional at runtime
    load_dotenv = None

CONFIG_PATH_ENV = "FLEXSHARE_CONFIG"
ENV_PREFIX = "FLEXSHARE"


class ConfigManager:
    """File and environment backed configuration helper.

    Values come from the ``flexshare`` section of a JSON file. Dotted keys may be
    overridden by environment variables, e.g. ``solver.barrier_growth`` by
    ``FLEXSHARE_SOLVER_BARRIER_GROWTH``.
    """

    def __init__(self, config_path: Optional[str | Path] = None, use_dotenv: bool = True) -> None:
        if use_dotenv and load_dotenv is not None:
            load_dotenv(override=False)
        self.config_path = self._resolve_path(config_path)
        self.config: Dict[str, Any] = {}
        self.refresh()

    @staticmethod
    def _resolve_path(config_path: Optional[str | Path]) -> Optional[Path]:
        if config_path is not None:
            return Path(config_path)
        env_path = os.getenv(CONFIG_PATH_ENV)
        if env_path:
            return Path(env_path)
        default = Path.cwd() / "config.json"
        return default if default.exists() else None

    def refresh(self) -> None:
        """Reload the file snapshot."""
        self.config = {}
        if self.config_path is None or not self.config_path.exists():
            return
        with self.config_path.open("r", encoding="utf-8") as f:
            data = json.load(f)
        if isinstance(data, dict):
            section = data.get("flexshare", {})
            if isinstance(section, dict):
                self.config = section

    @staticmethod
    def env_key(key: str) -> str:
        return "_".join([ENV_PREFIX, *key.split(".")]).upper()

    def get(self, key: str, default: Any = None) -> Any:
        """Get a configuration item, environment first."""
        env_value = os.getenv(self.env_key(key))
        if env_value not in (None, ""):
            return env_value

        value: Any = self.config
        for part in key.split("."):
            if isinstance(value, dict) and part in value:
                value = value[part]
            else:
                return default
        return value

