"""Domain records for VNFs, services, VMs and priority models."""

from __future__ import annotations

import math
from enum import Enum
from typing import Dict, List

from pydantic import BaseModel, ConfigDict, Field, field_validator, model_validator


class VnfSpec(BaseModel):
    """A VNF type and the capability each of its flows consumes."""

    model_config = ConfigDict(frozen=True)

    id: str = Field(..., min_length=1, description="VNF identifier")
    load: float = Field(..., gt=0, description="Capability units per flow per time unit, l(v)")

    @field_validator("load")
    @classmethod
    def _finite_load(cls, value: float) -> float:
        if not math.isfinite(value):
            raise ValueError("load must be finite")
        return value


class ServiceSpec(BaseModel):
    """A requested service: per-VNF arrival rates and an end-to-end delay target."""

    model_config = ConfigDict(frozen=True)

    id: str = Field(..., min_length=1, description="Service identifier")
    rates: Dict[str, float] = Field(..., description="VNF id -> arrival rate in flows per time unit")
    max_delay: float = Field(..., gt=0, description="Maximum average delay D^max(s)")

    @field_validator("rates", mode="before")
    @classmethod
    def _normalize_rates(cls, value):
        if not isinstance(value, dict):
            raise ValueError("rates must be a mapping of VNF id to rate")
        normalized: Dict[str, float] = {}
        for vnf_id, rate in value.items():
            rate = float(rate)
            if not math.isfinite(rate) or rate < 0:
                raise ValueError(f"rate for '{vnf_id}' must be finite and non-negative")
            normalized[str(vnf_id)] = rate
        return normalized

    @model_validator(mode="after")
    def _has_traffic(self) -> "ServiceSpec":
        if not any(rate > 0 for rate in self.rates.values()):
            raise ValueError(f"service '{self.id}' needs at least one positive rate")
        return self

    def rate(self, vnf_id: str) -> float:
        return self.rates.get(vnf_id, 0.0)

    @property
    def required_vnfs(self) -> List[str]:
        """VNFs the service actually traverses, in id order."""
        return sorted(v for v, rate in self.rates.items() if rate > 0)

    def scaled(self, multiplier: float) -> "ServiceSpec":
        """Copy with every rate multiplied by ``multiplier``."""
        return self.model_copy(update={"rates": {v: rate * multiplier for v, rate in self.rates.items()}})


class VmSpec(BaseModel):
    """A VM of the PoP with its capability bound and cost coefficients."""

    model_config = ConfigDict(frozen=True)

    id: str = Field(..., min_length=1, description="VM identifier")
    max_capability: float = Field(..., gt=0, description="C(m), capability units")
    fixed_cost: float = Field(default=0.0, ge=0, description="kappa_f(m), paid when active")
    prop_cost: float = Field(default=0.0, ge=0, description="kappa_p(m), per capability unit")


class PriorityScheme(str, Enum):
    PER_SERVICE = "per_service"
    PER_VNF = "per_vnf"
    PER_FLOW = "per_flow"


class PriorityModel(BaseModel):
    """How priorities among services sharing an instance are expressed."""

    model_config = ConfigDict(frozen=True)

    scheme: PriorityScheme = Field(default=PriorityScheme.PER_VNF)
    jitter: float = Field(default=1.0, description="Half-width of the per-flow uniform priority")

    @field_validator("scheme", mode="before")
    @classmethod
    def _normalize_scheme(cls, value):
        if isinstance(value, str):
            return value.strip().lower().replace("-", "_")
        return value

    @field_validator("jitter")
    @classmethod
    def _valid_jitter(cls, value: float) -> float:
        if not (math.isfinite(value) and value > 0):
            raise ValueError("jitter must be finite and strictly positive")
        return value

    @classmethod
    def per_service(cls) -> "PriorityModel":
        return cls(scheme=PriorityScheme.PER_SERVICE)

    @classmethod
    def per_vnf(cls) -> "PriorityModel":
        return cls(scheme=PriorityScheme.PER_VNF)

    @classmethod
    def per_flow(cls, jitter: float = 1.0) -> "PriorityModel":
        return cls(scheme=PriorityScheme.PER_FLOW, jitter=jitter)

    @property
    def is_per_flow(self) -> bool:
        return self.scheme is PriorityScheme.PER_FLOW
