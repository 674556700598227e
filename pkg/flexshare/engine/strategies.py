"""Sequential deployment of a scenario under one priority strategy."""

from __future__ import annotations

import logging
from dataclasses import dataclass, field
from enum import Enum
from typing import Dict, List, Optional

from flexshare.analysis import DeploymentMetrics, metrics
from flexshare.config import FlexShareSettings
from flexshare.engine.evaluation import Evaluator, evaluate_brute_force, evaluate_flexshare, evaluate_per_service
from flexshare.engine.flexshare import DeployOutcome, deploy_service
from flexshare.engine.lifecycle import Merge, merge_pass
from flexshare.errors import UnstableQueueError
from flexshare.model import Deployment, PriorityModel, PriorityScheme
from flexshare.scenario import ScenarioFile

logger = logging.getLogger(__name__)


class Strategy(str, Enum):
    PER_SERVICE = "per_service"
    PER_VNF_FLEXSHARE = "per_vnf_flexshare"
    PER_VNF_BRUTE = "per_vnf_brute"
    PER_FLOW_FLEXSHARE = "per_flow_flexshare"

    @property
    def scheme(self) -> PriorityScheme:
        return _SCHEMES[self]

    @property
    def evaluator(self) -> Evaluator:
        return _EVALUATORS[self]

    def priority_model(self, jitter: float = 1.0) -> PriorityModel:
        if self.scheme is PriorityScheme.PER_FLOW:
            return PriorityModel.per_flow(jitter)
        return PriorityModel(scheme=self.scheme)


_SCHEMES: Dict[Strategy, PriorityScheme] = {
    Strategy.PER_SERVICE: PriorityScheme.PER_SERVICE,
    Strategy.PER_VNF_FLEXSHARE: PriorityScheme.PER_VNF,
    Strategy.PER_VNF_BRUTE: PriorityScheme.PER_VNF,
    Strategy.PER_FLOW_FLEXSHARE: PriorityScheme.PER_FLOW,
}

_EVALUATORS: Dict[Strategy, Evaluator] = {
    Strategy.PER_SERVICE: evaluate_per_service,
    Strategy.PER_VNF_FLEXSHARE: evaluate_flexshare,
    Strategy.PER_VNF_BRUTE: evaluate_brute_force,
    Strategy.PER_FLOW_FLEXSHARE: evaluate_flexshare,
}


def priority_table(deployment: Deployment) -> List[Dict[str, object]]:
    """Per active instance, its services from highest to lowest priority."""
    table = []
    for vm_id in deployment.active_vms():
        rows = []
        for service_id in deployment.priority_order(vm_id):
            try:
                sojourn: Optional[float] = deployment.sojourn(service_id, vm_id)
            except UnstableQueueError:
                sojourn = None
            rows.append(
                {
                    "service": service_id,
                    "priority": deployment.priorities.get((service_id, vm_id), 0.0),
                    "higher_rate": deployment.higher_rate(service_id, vm_id),
                    "rate": deployment.rate(service_id, vm_id),
                    "sojourn": sojourn,
                }
            )
        table.append(
            {
                "vm": vm_id,
                "vnf": deployment.hosted[vm_id],
                "capability": deployment.capability.get(vm_id, 0.0),
                "max_capability": deployment.vms[vm_id].max_capability,
                "services": rows,
            }
        )
    return table


@dataclass
class RunReport:
    scenario: str
    strategy: Strategy
    multiplier: float
    seed: Optional[int]
    outcomes: List[DeployOutcome] = field(default_factory=list)
    merges: List[Merge] = field(default_factory=list)
    deployment: Optional[Deployment] = None

    @property
    def feasible(self) -> bool:
        return all(outcome.deployed for outcome in self.outcomes)

    @property
    def rejected(self) -> List[str]:
        return [outcome.service_id for outcome in self.outcomes if not outcome.deployed]

    @property
    def metrics(self) -> DeploymentMetrics:
        return metrics(self.deployment)

    def to_dict(self) -> Dict[str, object]:
        deployment = self.deployment
        return {
            "scenario": self.scenario,
            "strategy": self.strategy.value,
            "multiplier": self.multiplier,
            "seed": self.seed,
            "feasible": self.feasible,
            "rejected": self.rejected,
            "metrics": self.metrics.as_dict(),
            "outcomes": [outcome.to_dict() for outcome in self.outcomes],
            "merges": [
                {"vnf": m.vnf_id, "source": m.source, "target": m.target, "services": list(m.services), "saving": m.saving}
                for m in self.merges
            ],
            "assignment": [list(t) for t in deployment.triples()],
            "capability": {m: deployment.capability[m] for m in deployment.active_vms()},
            "priorities": [[s, m, p] for (s, m), p in sorted(deployment.priorities.items())],
            "priority_table": priority_table(deployment),
        }


def run_strategy(
    scenario: ScenarioFile,
    strategy: Strategy,
    settings: Optional[FlexShareSettings] = None,
    multiplier: Optional[float] = None,
    seed: Optional[int] = None,
) -> RunReport:
    """Deploy every service of ``scenario`` once, in request order."""
    settings = settings or FlexShareSettings()
    strategy = Strategy(strategy)
    factor = scenario.multiplier if multiplier is None else multiplier
    jitter = scenario.priority_model.jitter if scenario.priority_model.is_per_flow else settings.engine.jitter
    deployment = scenario.deployment(strategy.priority_model(jitter), seed)
    report = RunReport(
        scenario=scenario.name,
        strategy=strategy,
        multiplier=factor,
        seed=seed if seed is not None else (scenario.vm_generator.seed if scenario.seeded else None),
        deployment=deployment,
    )

    for service in scenario.requests(factor):
        if settings.engine.merge_before_deploy and deployment.services:
            report.merges.extend(merge_pass(deployment, settings))
        report.outcomes.append(deploy_service(service, deployment, evaluator=strategy.evaluator, settings=settings))
    report.merges.extend(merge_pass(deployment, settings))

    logger.info(
        "%s on %s (n=%g): %d/%d deployed, cost %.6g",
        strategy.value,
        scenario.name,
        factor,
        len(report.outcomes) - len(report.rejected),
        len(report.outcomes),
        deployment.total_cost(),
    )
    return report
