"""Bipartite graph of admissible VNF-to-VM placements for an incoming service."""

from __future__ import annotations

import logging
from dataclasses import dataclass, field
from typing import Dict, FrozenSet, List, Optional, Sequence, Tuple

from flexshare.errors import InsufficientResourcesError
from flexshare.model import Deployment, ServiceSpec, instance_stable

logger = logging.getLogger(__name__)

DEFAULT_EPSILON = 1e-6

Edge = Tuple[str, str]


@dataclass(frozen=True)
class BipartiteGraph:
    """VNFs of one service on the left, candidate VMs on the right."""

    service_id: str
    vnfs: Tuple[str, ...]
    edges: Dict[Edge, float]
    pruned: FrozenSet[Edge] = field(default_factory=frozenset)

    @property
    def vms(self) -> List[str]:
        return sorted({m for _, m in self.edges})

    def has_edge(self, vnf_id: str, vm_id: str) -> bool:
        return (vnf_id, vm_id) in self.edges

    def neighbours(self, vnf_id: str) -> List[str]:
        return sorted(m for v, m in self.edges if v == vnf_id)

    def without(self, vnf_id: str, vm_id: str) -> "BipartiteGraph":
        """Copy with one edge removed; the edge is remembered as pruned."""
        edges = {e: c for e, c in self.edges.items() if e != (vnf_id, vm_id)}
        return BipartiteGraph(self.service_id, self.vnfs, edges, self.pruned | {(vnf_id, vm_id)})

    def __len__(self) -> int:
        return len(self.edges)


def edge_cost(
    vnf_id: str,
    vm_id: str,
    service: ServiceSpec,
    deployment: Deployment,
    epsilon: float = DEFAULT_EPSILON,
) -> float:
    """Fixed cost if the VM must be activated, plus the proportional cost of the added load."""
    vm = deployment.vms[vm_id]
    activation = 0.0 if deployment.is_active(vm_id) else vm.fixed_cost
    added_load = deployment.vnfs[vnf_id].load * service.rate(vnf_id)
    return activation + vm.prop_cost * (added_load + epsilon)


def build_graph(
    service: ServiceSpec,
    deployment: Deployment,
    vms: Optional[Sequence[str]] = None,
    epsilon: float = DEFAULT_EPSILON,
) -> BipartiteGraph:
    """Connect each required VNF to every unused VM or instance of it that stays stable with the service added."""
    inventory = sorted(vms) if vms is not None else sorted(deployment.vms)
    edges: Dict[Edge, float] = {}
    required = service.required_vnfs
    for vnf_id in required:
        vnf = deployment.vnfs[vnf_id]
        admissible = 0
        for vm_id in inventory:
            hosted = deployment.hosted.get(vm_id)
            if hosted is not None and hosted != vnf_id:
                continue
            rates = [rate for _, rate in deployment.instance_rates(vm_id)] if hosted else []
            rates.append(service.rate(vnf_id))
            if not instance_stable(vnf, deployment.vms[vm_id], rates):
                continue
            edges[(vnf_id, vm_id)] = edge_cost(vnf_id, vm_id, service, deployment, epsilon)
            admissible += 1
        if admissible == 0:
            raise InsufficientResourcesError(service.id, vnf_id)
    logger.debug("Graph for %s: %d VNFs, %d edges", service.id, len(required), len(edges))
    return BipartiteGraph(service.id, tuple(required), edges)
