"""Configuration primitives for the FlexShare engine."""

from __future__ import annotations

import logging
import math
from dataclasses import dataclass, field, fields, replace
from typing import Any, Dict, Optional, Tuple

from flexshare.errors import ConfigurationError
from flexshare.utils.config_manager import ConfigManager

logger = logging.getLogger(__name__)

LAMBDA_SHARE_MODES = ("services", "competitors")


# ---------------------------------------------------------------------------
# Barrier solver
# ---------------------------------------------------------------------------


@dataclass
class SolverConfig:
    """Controls the log-barrier interior point method used for capability scaling."""

    barrier_growth: float = 20.0
    initial_barrier: float = 1.0
    gap_tolerance: float = 1e-9
    newton_tolerance: float = 1e-10
    max_newton_steps: int = 20000
    feasibility_tolerance: float = 1e-6
    elastic_threshold: float = 1e-6
    # Growth factors tried in turn when a solve fails numerically.
    retry_growths: Tuple[float, ...] = (20.0, 8.0, 4.0)
    armijo_alpha: float = 0.25
    armijo_beta: float = 0.5

    def __post_init__(self) -> None:
        if self.barrier_growth <= 1:
            raise ConfigurationError("must be greater than 1", "solver.barrier_growth")
        if self.initial_barrier <= 0:
            raise ConfigurationError("must be positive", "solver.initial_barrier")
        for name in ("gap_tolerance", "newton_tolerance", "feasibility_tolerance", "elastic_threshold"):
            if not getattr(self, name) > 0:
                raise ConfigurationError("must be positive", f"solver.{name}")
        if self.max_newton_steps < 1:
            raise ConfigurationError("must be at least 1", "solver.max_newton_steps")
        self.retry_growths = tuple(float(g) for g in self.retry_growths) or (self.barrier_growth,)
        if any(g <= 1 for g in self.retry_growths):
            raise ConfigurationError("every growth factor must exceed 1", "solver.retry_growths")
        if not 0 < self.armijo_alpha < 0.5:
            raise ConfigurationError("must lie in (0, 0.5)", "solver.armijo_alpha")
        if not 0 < self.armijo_beta < 1:
            raise ConfigurationError("must lie in (0, 1)", "solver.armijo_beta")


# ---------------------------------------------------------------------------
# Deployment engine
# ---------------------------------------------------------------------------


@dataclass
class EngineConfig:
    """Controls placement, priority realization and lifecycle handling."""

    epsilon: float = 1e-6
    # "services": sum of relaxed rates is |S|/2 times the load; "competitors": (|S|-1)/2.
    lambda_share: str = "services"
    jitter: float = 1.0
    merge_before_deploy: bool = True
    repair_orders: bool = True
    repair_order_cap: int = 512
    merge_order_cap: int = 720
    brute_force_cap: int = 1_000_000
    workers: int = 1

    def __post_init__(self) -> None:
        mode = (self.lambda_share or "services").lower()
        if mode not in LAMBDA_SHARE_MODES:
            raise ConfigurationError(
                f"expected one of {', '.join(LAMBDA_SHARE_MODES)}, got '{self.lambda_share}'",
                "engine.lambda_share",
            )
        self.lambda_share = mode
        if not self.epsilon >= 0:
            raise ConfigurationError("must be non-negative", "engine.epsilon")
        if not (math.isfinite(self.jitter) and self.jitter > 0):
            raise ConfigurationError("must be finite and positive", "engine.jitter")
        for name in ("repair_order_cap", "merge_order_cap", "brute_force_cap"):
            if getattr(self, name) < 1:
                raise ConfigurationError("must be at least 1", f"engine.{name}")
        if self.workers < 1:
            self.workers = 1

    @property
    def share_offset(self) -> float:
        """Number subtracted from |S| before halving in the rate-averaging constraint."""
        return 0.0 if self.lambda_share == "services" else 1.0


# ---------------------------------------------------------------------------
# Analysis
# ---------------------------------------------------------------------------


@dataclass
class AnalysisConfig:
    """Caps for the exhaustive oracle."""

    max_services: int = 3
    max_vms: int = 4
    max_vnfs: int = 4

    def __post_init__(self) -> None:
        for name in ("max_services", "max_vms", "max_vnfs"):
            if getattr(self, name) < 1:
                raise ConfigurationError("must be at least 1", f"analysis.{name}")


# ---------------------------------------------------------------------------
# Settings bundle
# ---------------------------------------------------------------------------


def _coerce(value: Any, default: Any, key: str) -> Any:
    if isinstance(value, str):
        text = value.strip()
        try:
            if isinstance(default, bool):
                lowered = text.lower()
                if lowered in {"1", "true", "yes", "on"}:
                    return True
                if lowered in {"0", "false", "no", "off"}:
                    return False
                raise ValueError(text)
            if isinstance(default, int):
                return int(text)
            if isinstance(default, float):
                return float(text)
            if isinstance(default, tuple):
                return tuple(float(part) for part in text.split(",") if part.strip())
        except ValueError as exc:
            raise ConfigurationError(f"cannot parse '{value}'", key) from exc
        return text
    if isinstance(default, tuple) and isinstance(value, list):
        return tuple(value)
    return value


def _section(cls, manager: ConfigManager, name: str):
    defaults = cls()
    overrides: Dict[str, Any] = {}
    for spec in fields(cls):
        key = f"{name}.{spec.name}"
        raw = manager.get(key)
        if raw is None:
            continue
        overrides[spec.name] = _coerce(raw, getattr(defaults, spec.name), key)
    return replace(defaults, **overrides) if overrides else defaults


@dataclass
class FlexShareSettings:
    """Resolved configuration view for a FlexShare session."""

    solver: SolverConfig = field(default_factory=SolverConfig)
    engine: EngineConfig = field(default_factory=EngineConfig)
    analysis: AnalysisConfig = field(default_factory=AnalysisConfig)

    @classmethod
    def load(cls, config_manager: Optional[ConfigManager] = None) -> "FlexShareSettings":
        """Load settings from config.json with environment overrides."""
        manager = config_manager or ConfigManager()
        settings = cls(
            solver=_section(SolverConfig, manager, "solver"),
            engine=_section(EngineConfig, manager, "engine"),
            analysis=_section(AnalysisConfig, manager, "analysis"),
        )
        logger.debug("Loaded settings: %s", settings)
        return settings
