"""Service removal and instance consolidation."""

from __future__ import annotations

import logging
from dataclasses import dataclass
from typing import List, Optional, Tuple

from flexshare.config import FlexShareSettings
from flexshare.errors import EnumerationOverflowError, ServiceStateError
from flexshare.engine.evaluation import COST_TOLERANCE, evaluate_fixed, search_orders
from flexshare.model import Deployment, PriorityScheme

logger = logging.getLogger(__name__)


@dataclass(frozen=True)
class Merge:
    vnf_id: str
    source: str
    target: str
    services: Tuple[str, ...]
    saving: float


def deinstantiate_service(
    service_id: str,
    deployment: Deployment,
    settings: Optional[FlexShareSettings] = None,
) -> Deployment:
    """Remove a service, deactivate the VMs it leaves empty and re-scale the rest."""
    settings = settings or FlexShareSettings()
    if service_id not in deployment.services:
        raise ServiceStateError(service_id, "not deployed")

    used = sorted(set(deployment.service_vms(service_id).values()))
    del deployment.services[service_id]
    for key in [k for k in deployment.assignment if k[0] == service_id]:
        del deployment.assignment[key]
    for key in [k for k in deployment.priorities if k[0] == service_id]:
        del deployment.priorities[key]
    emptied = [m for m in used if not deployment.services_on(m)]
    for vm_id in emptied:
        deployment.deactivate(vm_id)

    if deployment.services:
        solution, scaled = evaluate_fixed(deployment, settings)
        if solution.feasible:
            deployment.capability.update(scaled.capability)
        else:
            logger.warning("Re-scaling after removing %s failed; capabilities kept", service_id)
    logger.info("De-instantiated %s, deactivated %s", service_id, emptied or "no VMs")
    return deployment


def _moved(deployment: Deployment, source: str, target: str) -> Deployment:
    trial = deployment.copy()
    vnf_id = trial.hosted[source]
    for service_id in trial.services_on(source):
        trial.assignment[(service_id, vnf_id)] = target
        trial.priorities.pop((service_id, source), None)
    trial.deactivate(source)
    return trial


def _try_merge(deployment: Deployment, source: str, target: str, settings: FlexShareSettings) -> Optional[Deployment]:
    vnf = deployment.vnfs[deployment.hosted[target]]
    combined = deployment.offered_load(source) + deployment.offered_load(target)
    if not combined < deployment.vms[target].max_capability:
        return None

    trial = _moved(deployment, source, target)
    services = trial.services_on(target)
    if trial.priority_model.scheme is PriorityScheme.PER_SERVICE:
        trial.apply_service_priorities()
        solution, scaled = evaluate_fixed(trial, settings, services)
        merged = scaled if solution.feasible else None
    else:
        try:
            merged = search_orders(
                trial,
                [target],
                settings,
                cap=settings.engine.merge_order_cap,
                services=services,
                workers=settings.engine.workers,
            )
        except EnumerationOverflowError as exc:
            logger.warning("Merge of %s into %s (%s) skipped: %s", source, target, vnf.id, exc)
            return None
    if merged is None:
        return None
    if merged.total_cost() < deployment.total_cost() - COST_TOLERANCE * max(1.0, deployment.total_cost()):
        return merged
    return None


def find_merge(deployment: Deployment, settings: Optional[FlexShareSettings] = None) -> Optional[Tuple[Merge, Deployment]]:
    """First cost-reducing merge, scanning same-VNF pairs by ascending combined load."""
    settings = settings or FlexShareSettings()
    active = deployment.active_vms()
    pairs = []
    for i, first in enumerate(active):
        for second in active[i + 1:]:
            if deployment.hosted[first] != deployment.hosted[second]:
                continue
            combined = deployment.offered_load(first) + deployment.offered_load(second)
            pairs.append((combined, first, second))
    pairs.sort()

    for _, first, second in pairs:
        # Empty the lighter VM first; on equal load keep the lower id.
        orientations = sorted(
            [(first, second), (second, first)],
            key=lambda p: (deployment.offered_load(p[0]), p[1]),
        )
        for source, target in orientations:
            merged = _try_merge(deployment, source, target, settings)
            if merged is not None:
                merge = Merge(
                    vnf_id=deployment.hosted[source],
                    source=source,
                    target=target,
                    services=tuple(deployment.services_on(source)),
                    saving=deployment.total_cost() - merged.total_cost(),
                )
                return merge, merged
    return None


def merge_pass(deployment: Deployment, settings: Optional[FlexShareSettings] = None) -> List[Merge]:
    """Apply cost-reducing merges until none is left; returns them in order."""
    settings = settings or FlexShareSettings()
    merges: List[Merge] = []
    while True:
        found = find_merge(deployment, settings)
        if found is None:
            return merges
        merge, merged = found
        deployment.replace_with(merged)
        merges.append(merge)
        logger.info(
            "Merged %s into %s for %s (%s), saving %.6g",
            merge.source,
            merge.target,
            merge.vnf_id,
            ", ".join(merge.services),
            merge.saving,
        )
