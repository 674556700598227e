from __future__ import annotations

from importlib.metadata import PackageNotFoundError, version as _dist_version
from pathlib import Path


def _read_local_pyproject_version() -> str | None:
    """Version from the source tree's pyproject.toml, or None when unavailable."""
    pyproject_path = Path(__file__).resolve().parents[1] / "pyproject.toml"
    if not pyproject_path.exists():
        return None
    try:
        import tomllib

        with pyproject_path.open("rb") as f:
            data = tomllib.load(f)
    except (OSError, ValueError):
        return None
    version = data.get("project", {}).get("version")
    if isinstance(version, str) and version.strip():
        return version.strip()
    return None


def _resolve_version() -> str:
    try:
        return _dist_version("flexshare")
    except PackageNotFoundError:
        pass
    return _read_local_pyproject_version() or "0.0.0"


__version__: str = _resolve_version()

from flexshare.config import FlexShareSettings
from flexshare.engine import Strategy, deinstantiate_service, deploy_service, merge_pass, run_strategy
from flexshare.model import Deployment, PriorityModel, ServiceSpec, VmSpec, VnfSpec
from flexshare.scenario import ScenarioFile, bundled_scenario, load_scenario

__all__ = [
    "__version__",
    "Deployment",
    "FlexShareSettings",
    "PriorityModel",
    "ScenarioFile",
    "ServiceSpec",
    "Strategy",
    "VmSpec",
    "VnfSpec",
    "bundled_scenario",
    "deinstantiate_service",
    "deploy_service",
    "load_scenario",
    "merge_pass",
    "run_strategy",
]
