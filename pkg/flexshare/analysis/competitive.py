"""
Competitive-ratio diagnostics on the number of VMs running each VNF.

The bounds assume every VM has the same maximum capability C and that activating
a VM costs more than running it at full capability (kappa_f > C * kappa_p).
Loads and capabilities are normalized by the VNF's per-flow load.
"""

from __future__ import annotations

import logging
import math
from dataclasses import asdict, dataclass
from typing import Dict, List, Optional

from flexshare.errors import AnalysisError
from flexshare.model import Deployment

logger = logging.getLogger(__name__)

BOUND_TOLERANCE = 1e-6


def load_gap(normalized_capacity: float, delay: float) -> float:
    """Headroom above the offered load that keeps every sojourn at ``delay`` or below."""
    if not delay > 0:
        raise AnalysisError(f"delay must be positive, got {delay}")
    if not normalized_capacity > 0:
        raise AnalysisError(f"capacity must be positive, got {normalized_capacity}")
    return math.sqrt(normalized_capacity / delay)


def normalized_capacity(max_capability: float, load: float) -> float:
    return max_capability / load


def competitive_bound(theta: float, capacity: float) -> float:
    """Worst-case ratio of VMs used to VMs needed for one VNF."""
    if not capacity > theta:
        raise AnalysisError(f"load gap {theta:.6g} leaves no room in capacity {capacity:.6g}")
    return 2.0 + 2.0 * theta / (capacity - theta)


@dataclass(frozen=True)
class VnfBound:
    vnf_id: str
    instances: int
    oracle_instances: Optional[int]
    min_sojourn: float
    load_gap: float
    capacity: float
    average_load: float
    ratio: float
    within_bound: Optional[bool]
    load_bound_holds: Optional[bool]

    def as_dict(self) -> Dict[str, object]:
        return asdict(self)


def uniform_capability(deployment: Deployment) -> float:
    capabilities = {vm.max_capability for vm in deployment.vms.values()}
    if len(capabilities) != 1:
        raise AnalysisError("competitive analysis needs the same maximum capability on every VM")
    return capabilities.pop()


def competitive_report(
    deployment: Deployment,
    oracle_instances: Optional[Dict[str, int]] = None,
) -> List[VnfBound]:
    """Bound checks per VNF of a deployment after its final merge pass.

    ``within_bound`` compares against ``oracle_instances`` when given; a VNF run
    on a single VM is optimal and gets no checks.
    """
    capability = uniform_capability(deployment)
    rows = []
    for vnf_id in sorted({v for v in deployment.hosted.values()}):
        vms = deployment.instances_of(vnf_id)
        load = deployment.vnfs[vnf_id].load
        capacity = normalized_capacity(capability, load)
        sojourns = [deployment.sojourn(s, m) for m in vms for s in deployment.services_on(m)]
        d_v = min(sojourns)
        theta = load_gap(capacity, d_v)
        ratio = competitive_bound(theta, capacity)
        average = sum(deployment.offered_load(m) / load for m in vms) / len(vms)

        within = holds = None
        if len(vms) >= 2:
            holds = average >= (capacity - theta) / 2.0 - BOUND_TOLERANCE
            optimum = (oracle_instances or {}).get(vnf_id)
            if optimum is not None:
                within = len(vms) <= ratio * optimum + BOUND_TOLERANCE
            if not holds:
                logger.warning(
                    "Average load %.6g on %s is below the merge-irreducibility bound %.6g",
                    average,
                    vnf_id,
                    (capacity - theta) / 2.0,
                )
        rows.append(
            VnfBound(
                vnf_id=vnf_id,
                instances=len(vms),
                oracle_instances=(oracle_instances or {}).get(vnf_id),
                min_sojourn=d_v,
                load_gap=theta,
                capacity=capacity,
                average_load=average,
                ratio=ratio,
                within_bound=within,
                load_bound_holds=holds,
            )
        )
    return rows
