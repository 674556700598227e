"""Service deployment, lifecycle and strategy runs."""

from flexshare.engine.evaluation import (
    EVALUATORS,
    Verdict,
    evaluate_brute_force,
    evaluate_fixed,
    evaluate_flexshare,
    evaluate_per_service,
    meets_targets,
    search_orders,
)
from flexshare.engine.flexshare import DeployOutcome, DeployStatus, deploy_service, prune_edge
from flexshare.engine.lifecycle import Merge, deinstantiate_service, find_merge, merge_pass
from flexshare.engine.strategies import RunReport, Strategy, priority_table, run_strategy

__all__ = [
    "DeployOutcome",
    "DeployStatus",
    "EVALUATORS",
    "Merge",
    "RunReport",
    "Strategy",
    "Verdict",
    "deinstantiate_service",
    "deploy_service",
    "evaluate_brute_force",
    "evaluate_fixed",
    "evaluate_flexshare",
    "evaluate_per_service",
    "find_merge",
    "meets_targets",
    "merge_pass",
    "priority_table",
    "prune_edge",
    "run_strategy",
    "search_orders",
]
