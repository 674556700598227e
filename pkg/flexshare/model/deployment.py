"""Mutable state of the point of presence."""

from __future__ import annotations

from dataclasses import dataclass, field
from typing import Dict, Iterable, List, Optional, Sequence, Tuple

from flexshare.errors import DeploymentStateError, ServiceStateError
from flexshare.model.queueing import lambda_per_flow, lambda_per_vnf, sojourn_time
from flexshare.model.types import PriorityModel, PriorityScheme, ServiceSpec, VmSpec, VnfSpec

# Spacing of per-flow centres that realizes a strict order, in units of jitter.
STRICT_CENTER_SPACING = 3.0


def strict_levels(order: Sequence[str], model: PriorityModel) -> Dict[str, float]:
    """Priority parameters realizing ``order`` (highest priority first) exactly."""
    n = len(order)
    step = STRICT_CENTER_SPACING * model.jitter if model.is_per_flow else 1.0
    return {service_id: step * (n - 1 - rank) for rank, service_id in enumerate(order)}


@dataclass
class Deployment:
    """Assignment, activation, capability and priorities of every instance.

    ``hosted`` maps an active VM to its VNF, ``assignment`` maps a (service, VNF)
    pair to the VM serving it, and ``priorities`` holds the deterministic level or
    the per-flow centre of a service at a VM.
    """

    vnfs: Dict[str, VnfSpec]
    vms: Dict[str, VmSpec]
    priority_model: PriorityModel = field(default_factory=PriorityModel)
    services: Dict[str, ServiceSpec] = field(default_factory=dict)
    hosted: Dict[str, str] = field(default_factory=dict)
    assignment: Dict[Tuple[str, str], str] = field(default_factory=dict)
    capability: Dict[str, float] = field(default_factory=dict)
    priorities: Dict[Tuple[str, str], float] = field(default_factory=dict)

    @classmethod
    def empty(
        cls,
        vnfs: Iterable[VnfSpec],
        vms: Iterable[VmSpec],
        priority_model: Optional[PriorityModel] = None,
    ) -> "Deployment":
        return cls(
            vnfs={v.id: v for v in vnfs},
            vms={m.id: m for m in vms},
            priority_model=priority_model or PriorityModel(),
        )

    def copy(self) -> "Deployment":
        return Deployment(
            vnfs=self.vnfs,
            vms=self.vms,
            priority_model=self.priority_model,
            services=dict(self.services),
            hosted=dict(self.hosted),
            assignment=dict(self.assignment),
            capability=dict(self.capability),
            priorities=dict(self.priorities),
        )

    def replace_with(self, other: "Deployment") -> None:
        """Commit another deployment's state into this one."""
        self.priority_model = other.priority_model
        self.services = dict(other.services)
        self.hosted = dict(other.hosted)
        self.assignment = dict(other.assignment)
        self.capability = dict(other.capability)
        self.priorities = dict(other.priorities)

    # ------------------------------------------------------------------
    # Queries
    # ------------------------------------------------------------------

    def triples(self) -> List[Tuple[str, str, str]]:
        return sorted((s, v, m) for (s, v), m in self.assignment.items())

    def active_vms(self) -> List[str]:
        return sorted(self.hosted)

    def is_active(self, vm_id: str) -> bool:
        return vm_id in self.hosted

    def instances_of(self, vnf_id: str) -> List[str]:
        return sorted(m for m, v in self.hosted.items() if v == vnf_id)

    def services_on(self, vm_id: str) -> List[str]:
        return sorted(s for (s, _), m in self.assignment.items() if m == vm_id)

    def service_vms(self, service_id: str) -> Dict[str, str]:
        """VNF -> VM map of a deployed service."""
        return {v: m for (s, v), m in self.assignment.items() if s == service_id}

    def rate(self, service_id: str, vm_id: str) -> float:
        return self.services[service_id].rate(self.hosted[vm_id])

    def instance_rates(self, vm_id: str) -> List[Tuple[str, float]]:
        return [(s, self.rate(s, vm_id)) for s in self.services_on(vm_id)]

    def offered_load(self, vm_id: str) -> float:
        if vm_id not in self.hosted:
            return 0.0
        load = self.vnfs[self.hosted[vm_id]].load
        return load * sum(rate for _, rate in self.instance_rates(vm_id))

    def population(self, vm_id: str) -> List[Tuple[str, float, float]]:
        return [
            (s, rate, self.priorities.get((s, vm_id), 0.0))
            for s, rate in self.instance_rates(vm_id)
        ]

    def higher_rate(self, service_id: str, vm_id: str) -> float:
        """Rate served before ``service_id`` at ``vm_id`` under the deployment's priorities."""
        population = self.population(vm_id)
        if self.priority_model.is_per_flow:
            return lambda_per_flow(service_id, population, self.priority_model.jitter)
        return lambda_per_vnf(service_id, population)

    def sojourn(self, service_id: str, vm_id: str) -> float:
        vnf = self.vnfs[self.hosted[vm_id]]
        return sojourn_time(
            vnf.load,
            self.capability.get(vm_id, 0.0),
            self.higher_rate(service_id, vm_id),
            self.rate(service_id, vm_id),
        )

    def priority_order(self, vm_id: str) -> List[str]:
        """Services at ``vm_id`` from highest to lowest priority, ties by id."""
        return sorted(self.services_on(vm_id), key=lambda s: (-self.priorities.get((s, vm_id), 0.0), s))

    def total_cost(self) -> float:
        return sum(
            self.vms[m].fixed_cost + self.vms[m].prop_cost * self.capability.get(m, 0.0)
            for m in self.hosted
        )

    # ------------------------------------------------------------------
    # Mutation
    # ------------------------------------------------------------------

    def add_service(self, service: ServiceSpec) -> None:
        if service.id in self.services:
            raise ServiceStateError(service.id, "already deployed")
        unknown = [v for v in service.required_vnfs if v not in self.vnfs]
        if unknown:
            raise DeploymentStateError(f"Service '{service.id}' references unknown VNFs {unknown}")
        self.services[service.id] = service

    def assign(self, service_id: str, vnf_id: str, vm_id: str) -> bool:
        """Record that ``service_id`` uses the ``vnf_id`` instance at ``vm_id``.

        Returns True when the VM was activated by this call.
        """
        current = self.hosted.get(vm_id)
        if current is not None and current != vnf_id:
            raise DeploymentStateError(f"VM '{vm_id}' already runs VNF '{current}', cannot host '{vnf_id}'")
        self.assignment[(service_id, vnf_id)] = vm_id
        if current is None:
            self.hosted[vm_id] = vnf_id
            self.capability.setdefault(vm_id, 0.0)
            return True
        return False

    def deactivate(self, vm_id: str) -> None:
        self.hosted.pop(vm_id, None)
        self.capability[vm_id] = 0.0
        for key in [k for k in self.priorities if k[1] == vm_id]:
            del self.priorities[key]

    def set_order(self, vm_id: str, order: Sequence[str]) -> None:
        """Give the services at ``vm_id`` the strict order ``order`` (highest first)."""
        for service_id, level in strict_levels(order, self.priority_model).items():
            self.priorities[(service_id, vm_id)] = level

    def apply_service_priorities(self) -> None:
        """Rank services by delay target (earliest request first on ties), same rank everywhere."""
        arrival = {s: i for i, s in enumerate(self.services)}
        ranking = sorted(self.services, key=lambda s: (self.services[s].max_delay, arrival[s]))
        for vm_id in self.hosted:
            present = set(self.services_on(vm_id))
            self.set_order(vm_id, [s for s in ranking if s in present])

    # ------------------------------------------------------------------
    # Invariants
    # ------------------------------------------------------------------

    def check_invariants(self, tolerance: float = 1e-9) -> None:
        """Raise DeploymentStateError if one-VNF-per-VM, hosting, capacity or stability fails."""
        for (service_id, vnf_id), vm_id in self.assignment.items():
            if self.hosted.get(vm_id) != vnf_id:
                raise DeploymentStateError(f"({service_id}, {vnf_id}) assigned to '{vm_id}' which does not run it")
        for vm_id in self.hosted:
            mu = self.capability.get(vm_id, 0.0)
            if mu > self.vms[vm_id].max_capability * (1 + tolerance):
                raise DeploymentStateError(f"VM '{vm_id}' capability {mu} exceeds its maximum")
            if self.services_on(vm_id) and not self.offered_load(vm_id) < mu:
                raise DeploymentStateError(f"VM '{vm_id}' is unstable at capability {mu}")
