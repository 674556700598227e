"""Exhaustive minimum-cost deployment for small instances."""

from __future__ import annotations

import itertools
import logging
import math
from dataclasses import dataclass
from typing import Dict, Iterator, Optional, Sequence, Tuple

from flexshare.config import AnalysisConfig, FlexShareSettings
from flexshare.errors import OracleCapError, SolverConvergenceError, UnstableQueueError
from flexshare.model import Deployment, PriorityModel, ServiceSpec, VmSpec, VnfSpec, service_total_delay
from flexshare.scaling import build_problem, solve

logger = logging.getLogger(__name__)

DELAY_TOLERANCE = 1e-6


@dataclass
class OracleResult:
    deployment: Optional[Deployment]
    cost: float
    candidates: int

    @property
    def feasible(self) -> bool:
        return self.deployment is not None

    def instances_per_vnf(self) -> Dict[str, int]:
        if self.deployment is None:
            return {}
        counts: Dict[str, int] = {}
        for vnf_id in self.deployment.hosted.values():
            counts[vnf_id] = counts.get(vnf_id, 0) + 1
        return dict(sorted(counts.items()))


def check_caps(services: Sequence[ServiceSpec], vms: Sequence[VmSpec], vnf_ids: Sequence[str], caps: AnalysisConfig) -> None:
    for dimension, size, cap in (
        ("services", len(services), caps.max_services),
        ("VMs", len(vms), caps.max_vms),
        ("VNFs", len(vnf_ids), caps.max_vnfs),
    ):
        if size > cap:
            raise OracleCapError(dimension, size, cap)


def _hostings(vnf_ids: Sequence[str], vm_ids: Sequence[str]) -> Iterator[Dict[str, str]]:
    """VM -> VNF maps giving every VNF at least one VM; idle VMs are left out."""
    for choice in itertools.product([None, *vnf_ids], repeat=len(vm_ids)):
        hosted = {m: v for m, v in zip(vm_ids, choice) if v is not None}
        if set(hosted.values()) == set(vnf_ids):
            yield hosted


def _placements(
    services: Sequence[ServiceSpec], hosted: Dict[str, str]
) -> Iterator[Dict[Tuple[str, str], str]]:
    """Assignments of every (service, VNF) to a hosting VM that use every hosting VM."""
    pairs = [(s.id, v) for s in services for v in s.required_vnfs]
    options = [[m for m, hv in sorted(hosted.items()) if hv == v] for _, v in pairs]
    for choice in itertools.product(*options):
        if set(choice) == set(hosted):
            yield dict(zip(pairs, choice))


def _rankings(services: Sequence[str]) -> Iterator[Dict[str, float]]:
    """Every ranking of ``services`` with ties allowed, as dense priority levels."""
    for levels in itertools.product(range(len(services)), repeat=len(services)):
        if sorted(set(levels)) == list(range(max(levels) + 1)):
            yield {s: float(level) for s, level in zip(services, levels)}


def _lower_bound(deployment: Deployment) -> float:
    return sum(
        deployment.vms[m].fixed_cost + deployment.vms[m].prop_cost * deployment.offered_load(m)
        for m in deployment.hosted
    )


def _meets_targets(deployment: Deployment) -> bool:
    try:
        return all(
            service_total_delay(s, deployment) <= spec.max_delay + DELAY_TOLERANCE
            for s, spec in deployment.services.items()
        )
    except UnstableQueueError:
        return False


def oracle_enumerate(
    vnfs: Sequence[VnfSpec],
    vms: Sequence[VmSpec],
    services: Sequence[ServiceSpec],
    settings: Optional[FlexShareSettings] = None,
) -> OracleResult:
    """Cheapest feasible deployment over every placement and priority ranking, ties included.

    Raises OracleCapError when the instance exceeds the configured caps.
    """
    settings = settings or FlexShareSettings()
    vnf_ids = sorted({v for s in services for v in s.required_vnfs})
    check_caps(services, vms, vnf_ids, settings.analysis)
    vm_ids = sorted(m.id for m in vms)
    base = Deployment.empty(vnfs, vms, PriorityModel.per_vnf())
    for service in services:
        base.add_service(service)

    best: Optional[Deployment] = None
    best_cost = math.inf
    candidates = 0
    for hosted in _hostings(vnf_ids, vm_ids):
        for placement in _placements(services, hosted):
            trial = base.copy()
            for (service_id, vnf_id), vm_id in placement.items():
                trial.assign(service_id, vnf_id, vm_id)
            if any(not trial.offered_load(m) < trial.vms[m].max_capability for m in trial.hosted):
                continue
            if _lower_bound(trial) >= best_cost:
                continue
            shared = [m for m in trial.active_vms() if len(trial.services_on(m)) >= 2]
            rankings = itertools.product(*[list(_rankings(trial.services_on(m))) for m in shared])
            for combo in rankings:
                candidates += 1
                ordered = trial.copy()
                for vm_id, levels in zip(shared, combo):
                    ordered.priorities.update({(s, vm_id): level for s, level in levels.items()})
                try:
                    solution = solve(build_problem(ordered, mu_only=True), settings.solver)
                except SolverConvergenceError as exc:
                    logger.debug("Oracle candidate skipped: %s", exc.message)
                    continue
                if not solution.feasible:
                    continue
                ordered.capability.update(solution.capability)
                cost = ordered.total_cost()
                if cost < best_cost - 1e-9 * max(1.0, best_cost) and _meets_targets(ordered):
                    best, best_cost = ordered, cost
    logger.debug("Oracle evaluated %d candidates, best cost %.6g", candidates, best_cost)
    return OracleResult(deployment=best, cost=best_cost, candidates=candidates)
