"""The placement loop: graph, assignment, scaling, pruning, and again."""

from __future__ import annotations

import logging
from dataclasses import dataclass, field
from enum import Enum
from typing import Dict, List, Optional, Sequence, Tuple

from flexshare.assignment import BipartiteGraph, apply_assignment, build_graph, hungarian_solve
from flexshare.config import FlexShareSettings
from flexshare.errors import EngineError, InsufficientResourcesError, NoAssignmentError, ServiceStateError
from flexshare.engine.evaluation import EVALUATORS, Evaluator, meets_targets
from flexshare.model import Deployment, PriorityModel, ServiceSpec

logger = logging.getLogger(__name__)


class DeployStatus(str, Enum):
    DEPLOYED = "deployed"
    REJECTED = "rejected"


@dataclass
class DeployOutcome:
    service_id: str
    status: DeployStatus
    added: List[Tuple[str, str, str]] = field(default_factory=list)
    activated: List[str] = field(default_factory=list)
    capability_changes: Dict[str, Tuple[float, float]] = field(default_factory=dict)
    cost_delta: float = 0.0
    iterations: int = 0
    reason: Optional[str] = None

    @property
    def deployed(self) -> bool:
        return self.status is DeployStatus.DEPLOYED

    def to_dict(self) -> Dict[str, object]:
        return {
            "service": self.service_id,
            "status": self.status.value,
            "added": [list(t) for t in self.added],
            "activated": list(self.activated),
            "capability_changes": {m: list(change) for m, change in sorted(self.capability_changes.items())},
            "cost_delta": self.cost_delta,
            "iterations": self.iterations,
            "reason": self.reason,
        }


def prune_edge(
    graph: BipartiteGraph,
    violated: Sequence[Tuple[str, float]],
    service_id: str,
    deployment: Deployment,
) -> BipartiteGraph:
    """Remove the incoming service's edge to the violated VM closest to instability.

    ``deployment`` holds the tentative placement. When no violated VM is used by
    the service, its selected edge on the tightest VM goes instead.
    """
    placed = {vm_id: vnf_id for vnf_id, vm_id in deployment.service_vms(service_id).items()}

    def gap(vm_id: str) -> Tuple[float, str]:
        return deployment.vms[vm_id].max_capability - deployment.offered_load(vm_id), vm_id

    candidates = [m for m, _ in violated if m in placed and graph.has_edge(placed[m], m)]
    if not candidates:
        candidates = [m for m in placed if graph.has_edge(placed[m], m)]
        logger.warning(
            "No violated VM %s is used by %s; pruning its tightest selected edge",
            [m for m, _ in violated],
            service_id,
        )
    if not candidates:
        raise EngineError(f"No prunable edge left for service '{service_id}'")
    target = min(candidates, key=gap)
    logger.debug("Pruning edge (%s, %s) for %s", placed[target], target, service_id)
    return graph.without(placed[target], target)


def _outcome(service_id: str, before: Deployment, after: Deployment, iterations: int) -> DeployOutcome:
    added = [t for t in after.triples() if t[0] == service_id]
    activated = sorted(set(after.hosted) - set(before.hosted))
    changes = {}
    for vm_id in sorted(set(before.capability) | set(after.capability)):
        old, new = before.capability.get(vm_id, 0.0), after.capability.get(vm_id, 0.0)
        if abs(old - new) > 1e-12:
            changes[vm_id] = (old, new)
    return DeployOutcome(
        service_id=service_id,
        status=DeployStatus.DEPLOYED,
        added=added,
        activated=activated,
        capability_changes=changes,
        cost_delta=after.total_cost() - before.total_cost(),
        iterations=iterations,
    )


def deploy_service(
    service: ServiceSpec,
    deployment: Deployment,
    model: Optional[PriorityModel] = None,
    *,
    evaluator: Optional[Evaluator] = None,
    settings: Optional[FlexShareSettings] = None,
) -> DeployOutcome:
    """Place, prioritize and scale a new service; the deployment only changes on success."""
    settings = settings or FlexShareSettings()
    if service.id in deployment.services:
        raise ServiceStateError(service.id, "already deployed")
    if model is not None and model != deployment.priority_model:
        if deployment.services:
            raise EngineError("priority model cannot change while services are deployed")
        deployment.priority_model = model
    evaluator = evaluator or EVALUATORS[deployment.priority_model.scheme]

    try:
        graph = build_graph(service, deployment, epsilon=settings.engine.epsilon)
    except InsufficientResourcesError as exc:
        logger.info("Rejected %s: %s", service.id, exc.message)
        return DeployOutcome(service.id, DeployStatus.REJECTED, reason=exc.message)

    iterations = 0
    while True:
        try:
            matching = hungarian_solve(graph)
        except NoAssignmentError as exc:
            logger.info("Rejected %s after %d pruning rounds", service.id, iterations)
            return DeployOutcome(service.id, DeployStatus.REJECTED, iterations=iterations, reason=exc.message)

        candidate = apply_assignment(matching, service, deployment.copy())
        verdict = evaluator(candidate, service.id, settings)
        if verdict.feasible and verdict.deployment is not None and meets_targets(verdict.deployment):
            verdict.deployment.check_invariants()
            outcome = _outcome(service.id, deployment, verdict.deployment, iterations)
            deployment.replace_with(verdict.deployment)
            logger.info(
                "Deployed %s after %d pruning rounds (cost %+.6g)", service.id, iterations, outcome.cost_delta
            )
            return outcome

        graph = prune_edge(graph, verdict.violated, service.id, candidate)
        iterations += 1
