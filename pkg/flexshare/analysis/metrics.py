"""Cost, sharing and capability figures of a deployment."""

from __future__ import annotations

import logging
from dataclasses import asdict, dataclass, field
from typing import Dict, List, Optional

from scipy.optimize import brentq

from flexshare.errors import UnstableQueueError
from flexshare.model import Deployment, service_total_delay

logger = logging.getLogger(__name__)

CAPABILITY_XTOL = 1e-10


@dataclass(frozen=True)
class DeploymentMetrics:
    total_cost: float
    services_per_instance: float
    used_capability: float
    max_active_capability: float
    active_vms: int
    instances_per_vnf: Dict[str, int] = field(default_factory=dict)

    def as_dict(self) -> Dict[str, object]:
        return asdict(self)


def metrics(deployment: Deployment) -> DeploymentMetrics:
    active = deployment.active_vms()
    sharing = [len(deployment.services_on(m)) for m in active]
    per_vnf: Dict[str, int] = {}
    for vm_id in active:
        per_vnf[deployment.hosted[vm_id]] = per_vnf.get(deployment.hosted[vm_id], 0) + 1
    return DeploymentMetrics(
        total_cost=deployment.total_cost(),
        services_per_instance=sum(sharing) / len(sharing) if sharing else 0.0,
        used_capability=sum(deployment.capability.get(m, 0.0) for m in active),
        max_active_capability=sum(deployment.vms[m].max_capability for m in active),
        active_vms=len(active),
        instances_per_vnf=dict(sorted(per_vnf.items())),
    )


@dataclass(frozen=True)
class InstanceCapability:
    vm_id: str
    vnf_id: str
    services: List[str]
    capability: float
    max_capability: float
    stability_floor: float
    # None when the current capability already misses a target.
    min_capability: Optional[float]

    @property
    def headroom(self) -> float:
        return self.max_capability - self.capability


def _delay_slack(deployment: Deployment, vm_id: str, services: List[str]):
    def slack(mu: float) -> float:
        trial = deployment.copy()
        trial.capability[vm_id] = mu
        try:
            return min(deployment.services[s].max_delay - service_total_delay(s, trial) for s in services)
        except UnstableQueueError:
            return float("-inf")

    return slack


def _min_capability(deployment: Deployment, vm_id: str, floor: float) -> Optional[float]:
    services = deployment.services_on(vm_id)
    slack = _delay_slack(deployment, vm_id, services)
    high = deployment.capability.get(vm_id, 0.0)
    if not slack(high) >= 0:
        return None
    low = floor * (1 + 1e-12) + 1e-12
    if low >= high:
        return high
    low_slack = slack(low)
    if low_slack >= 0:
        return low
    # brentq needs a finite sign change; walk up until the slack is finite.
    while low_slack == float("-inf"):
        low = 0.5 * (low + high)
        low_slack = slack(low)
    if low_slack >= 0:
        return low
    return brentq(slack, low, high, xtol=CAPABILITY_XTOL)


def capability_report(deployment: Deployment) -> List[InstanceCapability]:
    """Per active instance: capability, bounds and the least capability meeting every target.

    The least capability holds the other instances at their current values.
    """
    report = []
    for vm_id in deployment.active_vms():
        vnf = deployment.vnfs[deployment.hosted[vm_id]]
        services = deployment.services_on(vm_id)
        floor = deployment.offered_load(vm_id)
        report.append(
            InstanceCapability(
                vm_id=vm_id,
                vnf_id=vnf.id,
                services=services,
                capability=deployment.capability.get(vm_id, 0.0),
                max_capability=deployment.vms[vm_id].max_capability,
                stability_floor=floor,
                min_capability=_min_capability(deployment, vm_id, floor) if services else None,
            )
        )
    return report
