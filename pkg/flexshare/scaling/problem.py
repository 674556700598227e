"""Capability-scaling problems built from a deployment snapshot."""

from __future__ import annotations

from dataclasses import dataclass, field
from typing import Dict, Iterable, List, Optional, Tuple

from flexshare.errors import DeploymentStateError
from flexshare.model import Deployment, VmSpec

Pair = Tuple[str, str]  # (service id, VM id)


@dataclass(frozen=True)
class InstanceEntry:
    """A VNF instance in the problem roster and the services sharing it."""

    vm_id: str
    vnf_id: str
    load: float
    services: Tuple[Tuple[str, float], ...]

    @property
    def total_rate(self) -> float:
        return sum(rate for _, rate in self.services)

    @property
    def shared(self) -> bool:
        return len(self.services) >= 2


@dataclass
class ScalingProblem:
    """Roster of instances, their bounds and the delay budgets of the services using them.

    ``delay_offset`` holds the constant delay each service accumulates on instances
    outside the roster. When ``fixed_lambda`` is set the higher-priority rates are
    known and only capabilities are decided.
    """

    vms: Dict[str, VmSpec]
    instances: List[InstanceEntry]
    max_delay: Dict[str, float]
    delay_offset: Dict[str, float] = field(default_factory=dict)
    fixed_lambda: Optional[Dict[Pair, float]] = None
    share_offset: float = 0.0

    @property
    def mu_only(self) -> bool:
        return self.fixed_lambda is not None

    @property
    def vm_ids(self) -> List[str]:
        return [entry.vm_id for entry in self.instances]

    @property
    def services(self) -> List[str]:
        return sorted(self.max_delay)

    def entry(self, vm_id: str) -> InstanceEntry:
        for candidate in self.instances:
            if candidate.vm_id == vm_id:
                return candidate
        raise KeyError(vm_id)

    def budget(self, service_id: str) -> float:
        """Delay still available on the roster."""
        return self.max_delay[service_id] - self.delay_offset.get(service_id, 0.0)

    def relaxed_target(self, entry: InstanceEntry) -> float:
        """Right-hand side of the rate-averaging constraint of one instance."""
        return (len(entry.services) - self.share_offset) / 2.0 * entry.total_rate

    def pairs(self) -> List[Pair]:
        return [(s, entry.vm_id) for entry in self.instances for s, _ in entry.services]

    def fixed_cost(self) -> float:
        return sum(self.vms[m].fixed_cost for m in self.vm_ids)

    def stability_floor(self, vm_id: str) -> float:
        """Least capability that keeps every class at ``vm_id`` stable.

        Under fixed rates this is the largest offered load any class sees. In the
        relaxed program the averaging constraint spreads its target over the
        sharing services, so the floor is the water level that target reaches.
        """
        entry = self.entry(vm_id)
        if not entry.services:
            return 0.0
        rates = [rate for _, rate in entry.services]
        if self.fixed_lambda is not None:
            return max(entry.load * (self.fixed_lambda[(s, vm_id)] + rate) for s, rate in entry.services)
        target = self.relaxed_target(entry)
        if entry.shared and target > 0:
            return entry.load * max(max(rates), (target + sum(rates)) / len(rates))
        return entry.load * (target / len(rates) + max(rates))


def build_problem(
    deployment: Deployment,
    services: Optional[Iterable[str]] = None,
    *,
    mu_only: bool = False,
    share_offset: float = 0.0,
) -> ScalingProblem:
    """Snapshot the instances used by ``services`` (default: all deployed).

    Every service sharing one of those instances is constrained too; the delay it
    accumulates on instances outside the roster becomes a constant offset. With
    ``mu_only`` the higher-priority rates come from the deployment's priorities.
    """
    selected = sorted(services) if services is not None else sorted(deployment.services)
    roster = sorted({m for s in selected for m in deployment.service_vms(s).values()})

    instances: List[InstanceEntry] = []
    for vm_id in roster:
        if not deployment.is_active(vm_id):
            raise DeploymentStateError(f"VM '{vm_id}' is in the roster but not active")
        vnf_id = deployment.hosted[vm_id]
        instances.append(
            InstanceEntry(
                vm_id=vm_id,
                vnf_id=vnf_id,
                load=deployment.vnfs[vnf_id].load,
                services=tuple(deployment.instance_rates(vm_id)),
            )
        )

    constrained = sorted({s for entry in instances for s, _ in entry.services})
    roster_set = set(roster)
    offsets: Dict[str, float] = {}
    for service_id in constrained:
        outside = [m for m in deployment.service_vms(service_id).values() if m not in roster_set]
        if outside:
            offsets[service_id] = sum(deployment.sojourn(service_id, m) for m in outside)

    fixed = None
    if mu_only:
        fixed = {(s, entry.vm_id): deployment.higher_rate(s, entry.vm_id) for entry in instances for s, _ in entry.services}

    return ScalingProblem(
        vms={m: deployment.vms[m] for m in roster},
        instances=instances,
        max_delay={s: deployment.services[s].max_delay for s in constrained},
        delay_offset=offsets,
        fixed_lambda=fixed,
        share_offset=share_offset,
    )
