"""
Scenario files: VNFs, services, VMs and the request sequence of one experiment.

Scenarios are TOML documents::

    name = "synthetic"
    multiplier = 1.0

    [priority_model]
    scheme = "per_vnf"

    [[vnfs]]
    id = "v1"
    load = 1.0

    [[services]]
    id = "s1"
    max_delay = 10.0
    rates = { v1 = 2.0 }

    [vm_generator]
    count = 10
    capability_range = [5.0, 10.0]
    seed = 7
    fixed_cost = 8.0
    prop_cost = 0.5

Either ``[[vms]]`` or ``[vm_generator]`` must be given.
"""

from __future__ import annotations

import logging
import re
import tomllib
from importlib.resources import files
from pathlib import Path
from typing import List, Optional, Sequence, Tuple

import numpy as np
from pydantic import BaseModel, Field, ValidationError, ValidationInfo, field_validator, model_validator

from flexshare.errors import ScenarioError
from flexshare.model import Deployment, PriorityModel, ServiceSpec, VmSpec, VnfSpec

logger = logging.getLogger(__name__)

BUNDLED_SCENARIOS = ("synthetic", "realistic", "example1", "example2")
CAPABILITY_DECIMALS = 6


class VmGenerator(BaseModel):
    """Draws VM capabilities uniformly from a range with a fixed seed."""

    count: int = Field(..., gt=0)
    capability_range: Tuple[float, float]
    seed: int
    fixed_cost: float = Field(default=0.0, ge=0)
    prop_cost: float = Field(default=0.0, ge=0)
    prefix: str = Field(default="m", min_length=1)

    @field_validator("capability_range")
    @classmethod
    def _positive_range(cls, value: Tuple[float, float]) -> Tuple[float, float]:
        low, high = value
        if not 0 < low <= high:
            raise ValueError("capability_range must satisfy 0 < low <= high")
        return value

    def generate(self, seed: Optional[int] = None) -> List[VmSpec]:
        rng = np.random.default_rng(self.seed if seed is None else seed)
        low, high = self.capability_range
        draws = np.round(rng.uniform(low, high, size=self.count), CAPABILITY_DECIMALS)
        width = len(str(self.count))
        return [
            VmSpec(
                id=f"{self.prefix}{i + 1:0{width}d}",
                max_capability=float(capability),
                fixed_cost=self.fixed_cost,
                prop_cost=self.prop_cost,
            )
            for i, capability in enumerate(draws)
        ]


class ScenarioFile(BaseModel):
    """A validated scenario."""

    name: str = "scenario"
    vnfs: List[VnfSpec] = Field(..., min_length=1)
    services: List[ServiceSpec] = Field(..., min_length=1)
    vms: Optional[List[VmSpec]] = None
    vm_generator: Optional[VmGenerator] = None
    multiplier: float = Field(default=1.0, gt=0)
    priority_model: PriorityModel = Field(default_factory=PriorityModel)
    request_order: Optional[List[str]] = None

    @field_validator("vnfs")
    @classmethod
    def _unique_vnfs(cls, value: List[VnfSpec]) -> List[VnfSpec]:
        _require_unique([v.id for v in value], "VNF")
        return value

    @field_validator("services")
    @classmethod
    def _known_vnfs(cls, value: List[ServiceSpec], info: ValidationInfo) -> List[ServiceSpec]:
        _require_unique([s.id for s in value], "service")
        declared = {v.id for v in info.data.get("vnfs") or []}
        for service in value:
            dangling = sorted(set(service.rates) - declared)
            if dangling:
                raise ValueError(f"service '{service.id}' references undeclared VNFs {dangling}")
        return value

    @field_validator("vms")
    @classmethod
    def _unique_vms(cls, value: Optional[List[VmSpec]]) -> Optional[List[VmSpec]]:
        if value is not None:
            if not value:
                raise ValueError("at least one VM is required")
            _require_unique([m.id for m in value], "VM")
        return value

    @model_validator(mode="after")
    def _vm_source(self) -> "ScenarioFile":
        if (self.vms is None) == (self.vm_generator is None):
            raise ValueError("exactly one of 'vms' and 'vm_generator' must be given")
        if self.request_order is not None:
            known = {s.id for s in self.services}
            _require_unique(self.request_order, "request")
            unknown = [s for s in self.request_order if s not in known]
            if unknown:
                raise ValueError(f"request_order names unknown services {unknown}")
        return self

    # ------------------------------------------------------------------

    def vm_specs(self, seed: Optional[int] = None) -> List[VmSpec]:
        """The PoP's VMs; a generator is expanded with ``seed`` or its own."""
        if self.vms is not None:
            return list(self.vms)
        return self.vm_generator.generate(seed)

    def requests(self, multiplier: Optional[float] = None) -> List[ServiceSpec]:
        """Services in request order with rates scaled by the traffic multiplier."""
        factor = self.multiplier if multiplier is None else multiplier
        if not factor > 0:
            raise ScenarioError("must be positive", "multiplier")
        by_id = {s.id: s for s in self.services}
        order = self.request_order if self.request_order is not None else list(by_id)
        return [by_id[s].scaled(factor) if factor != 1 else by_id[s] for s in order]

    def deployment(self, model: Optional[PriorityModel] = None, seed: Optional[int] = None) -> Deployment:
        return Deployment.empty(self.vnfs, self.vm_specs(seed), model or self.priority_model)

    @property
    def seeded(self) -> bool:
        return self.vm_generator is not None


def _require_unique(ids: Sequence[str], kind: str) -> None:
    seen = set()
    for item in ids:
        if item in seen:
            raise ValueError(f"duplicate {kind} id '{item}'")
        seen.add(item)


# ---------------------------------------------------------------------------
# Loading
# ---------------------------------------------------------------------------

_TOML_LINE = re.compile(r"line (\d+)")


def _locate(text: str, loc: Sequence) -> Optional[int]:
    """1-based line of the deepest part of an error location found in ``text``."""
    lines = text.splitlines()
    start, found = 0, None
    for i, part in enumerate(loc):
        if isinstance(part, int):
            continue
        index = loc[i + 1] if i + 1 < len(loc) and isinstance(loc[i + 1], int) else None
        header = re.compile(rf"^\s*\[\[?\s*{re.escape(str(part))}\s*\]\]?\s*$")
        key = re.compile(rf"^\s*{re.escape(str(part))}\s*=")
        hits = [n for n in range(start, len(lines)) if header.match(lines[n]) or key.match(lines[n])]
        if not hits:
            break
        pick = hits[index] if index is not None and index < len(hits) else hits[0]
        found, start = pick + 1, pick + 1
    return found


def parse_scenario(text: str, source: str = "<string>") -> ScenarioFile:
    """Validate scenario TOML text."""
    try:
        raw = tomllib.loads(text)
    except tomllib.TOMLDecodeError as exc:
        match = _TOML_LINE.search(str(exc))
        raise ScenarioError(f"invalid TOML in {source}: {exc}", line=int(match.group(1)) if match else None) from exc
    try:
        return ScenarioFile.model_validate(raw)
    except ValidationError as exc:
        error = exc.errors()[0]
        loc = tuple(error["loc"])
        field = ".".join(str(part) for part in loc) or "scenario"
        raise ScenarioError(error["msg"], field=field, line=_locate(text, loc)) from exc


def load_scenario(path: str | Path) -> ScenarioFile:
    """Read and validate a scenario file."""
    path = Path(path)
    if not path.is_file():
        raise ScenarioError(f"scenario file not found: {path}")
    scenario = parse_scenario(path.read_text(encoding="utf-8"), str(path))
    logger.debug("Loaded scenario '%s' from %s", scenario.name, path)
    return scenario


def bundled_scenario(name: str) -> ScenarioFile:
    """One of the scenarios shipped with the package."""
    if name not in BUNDLED_SCENARIOS:
        raise ScenarioError(f"unknown bundled scenario '{name}', expected one of {list(BUNDLED_SCENARIOS)}")
    resource = files("flexshare") / "scenarios" / f"{name}.toml"
    return parse_scenario(resource.read_text(encoding="utf-8"), f"bundled:{name}")


def resolve_scenario(reference: str) -> ScenarioFile:
    """A scenario path, or the name of a bundled scenario."""
    if Path(reference).is_file() or reference not in BUNDLED_SCENARIOS:
        return load_scenario(reference)
    return bundled_scenario(reference)
