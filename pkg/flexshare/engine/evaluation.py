"""
Deciding whether a tentative placement can be scaled, and at which priorities.

Each strategy turns a candidate deployment (placement already applied) into a
verdict: either a deployment with committed capabilities and priorities, or the
VMs whose capacity bounds stand in the way.
"""

from __future__ import annotations

import itertools
import logging
import math
from concurrent.futures import ThreadPoolExecutor
from dataclasses import dataclass, field
from typing import Callable, Dict, Iterator, List, Optional, Sequence, Tuple

from flexshare.config import FlexShareSettings
from flexshare.errors import EnumerationOverflowError, ScalingError, SolverConvergenceError, UnstableQueueError
from flexshare.model import Deployment, PriorityScheme, service_total_delay
from flexshare.scaling import (
    ScalingProblem,
    ScalingSolution,
    SolveStatus,
    build_problem,
    find_violated_capacity,
    map_priorities,
    solve,
)

logger = logging.getLogger(__name__)

DELAY_TOLERANCE = 1e-6
COST_TOLERANCE = 1e-9


@dataclass
class Verdict:
    feasible: bool
    deployment: Optional[Deployment] = None
    violated: List[Tuple[str, float]] = field(default_factory=list)


Evaluator = Callable[[Deployment, str, FlexShareSettings], Verdict]


def meets_targets(deployment: Deployment, services: Optional[Sequence[str]] = None) -> bool:
    """True iff every listed service is within its delay target."""
    for service_id in services if services is not None else deployment.services:
        try:
            delay = service_total_delay(service_id, deployment)
        except UnstableQueueError:
            return False
        if delay > deployment.services[service_id].max_delay + DELAY_TOLERANCE:
            return False
    return True


def _solve(problem: ScalingProblem, settings: FlexShareSettings) -> ScalingSolution:
    try:
        return solve(problem, settings.solver)
    except SolverConvergenceError as exc:
        logger.warning("Treating scaling problem as infeasible: %s", exc.message)
        return ScalingSolution(status=SolveStatus.INFEASIBLE)


def evaluate_fixed(
    deployment: Deployment,
    settings: FlexShareSettings,
    services: Optional[Sequence[str]] = None,
) -> Tuple[ScalingSolution, Deployment]:
    """Scale capabilities with the deployment's priorities held fixed.

    With ``services`` only their instances are re-scaled; the rest stay as they are.
    """
    candidate = deployment.copy()
    problem = build_problem(candidate, services, mu_only=True)
    solution = _solve(problem, settings)
    if solution.feasible:
        candidate.capability.update(solution.capability)
        if not meets_targets(candidate, problem.services):
            logger.debug("Scaled deployment misses a delay target by more than the tolerance")
            return ScalingSolution(status=SolveStatus.INFEASIBLE), candidate
    return solution, candidate


def order_count(deployment: Deployment, vms: Sequence[str]) -> int:
    return math.prod(math.factorial(len(deployment.services_on(m))) for m in vms)


def order_combinations(deployment: Deployment, vms: Sequence[str]) -> Iterator[Tuple[Tuple[str, ...], ...]]:
    """Every combination of strict orders on ``vms``, in lexicographic order."""
    per_vm = [list(itertools.permutations(deployment.services_on(m))) for m in vms]
    return itertools.product(*per_vm)


def search_orders(
    deployment: Deployment,
    vms: Sequence[str],
    settings: FlexShareSettings,
    cap: int,
    services: Optional[Sequence[str]] = None,
    workers: int = 1,
) -> Optional[Deployment]:
    """Cheapest feasible deployment over all strict orders on ``vms``.

    Ties keep the lexicographically first combination. Raises
    EnumerationOverflowError when the number of combinations exceeds ``cap``.
    """
    vms = sorted(vms)
    count = order_count(deployment, vms)
    if count > cap:
        raise EnumerationOverflowError(count, cap)

    def evaluate(combo) -> Optional[Deployment]:
        trial = deployment.copy()
        for vm_id, order in zip(vms, combo):
            trial.set_order(vm_id, order)
        solution, scaled = evaluate_fixed(trial, settings, services)
        return scaled if solution.feasible else None

    combos = list(order_combinations(deployment, vms))
    if workers > 1 and len(combos) > 1:
        with ThreadPoolExecutor(max_workers=workers) as pool:
            results = list(pool.map(evaluate, combos))
    else:
        results = [evaluate(combo) for combo in combos]

    best: Optional[Deployment] = None
    for result in results:
        if result is None:
            continue
        if best is None or result.total_cost() < best.total_cost() - COST_TOLERANCE * max(1.0, best.total_cost()):
            best = result
    logger.debug("Order search over %d combinations on %s: %s", count, vms, "found" if best else "none feasible")
    return best


def _violated_fixed(deployment: Deployment, settings: FlexShareSettings) -> List[Tuple[str, float]]:
    try:
        return find_violated_capacity(build_problem(deployment, mu_only=True), settings.solver)
    except ScalingError as exc:
        logger.debug("No violated capacity under fixed priorities: %s", exc.message)
        return []


def _shared(deployment: Deployment, vms: Sequence[str]) -> List[str]:
    return sorted(m for m in vms if len(deployment.services_on(m)) >= 2)


# ---------------------------------------------------------------------------
# Strategy evaluators
# ---------------------------------------------------------------------------


def evaluate_per_service(candidate: Deployment, service_id: str, settings: FlexShareSettings) -> Verdict:
    """Rank services by delay target everywhere, then scale."""
    ranked = candidate.copy()
    ranked.apply_service_priorities()
    solution, scaled = evaluate_fixed(ranked, settings)
    if solution.feasible:
        return Verdict(True, scaled)
    return Verdict(False, violated=solution.violated_capacity or _violated_fixed(ranked, settings))


def evaluate_brute_force(candidate: Deployment, service_id: str, settings: FlexShareSettings) -> Verdict:
    """Try every strict order on every shared instance."""
    shared = _shared(candidate, candidate.active_vms())
    best = search_orders(
        candidate,
        shared,
        settings,
        cap=settings.engine.brute_force_cap,
        workers=settings.engine.workers,
    )
    if best is not None:
        return Verdict(True, best)
    first = candidate.copy()
    for vm_id in shared:
        first.set_order(vm_id, first.services_on(vm_id))
    return Verdict(False, violated=_violated_fixed(first, settings))


def _realize(candidate: Deployment, settings: FlexShareSettings) -> Tuple[Optional[Deployment], ScalingSolution, Deployment]:
    """Solve the relaxed program, map it to priorities and re-scale with the true rates."""
    engine = settings.engine
    problem = build_problem(candidate, share_offset=engine.share_offset)
    relaxed = _solve(problem, settings)
    if not relaxed.feasible:
        return None, relaxed, candidate

    model = candidate.priority_model
    assignment = map_priorities(relaxed, problem, model)
    mapped = candidate.copy()
    mapped.priorities.update(assignment.params)
    options = [mapped]
    if model.scheme is PriorityScheme.PER_FLOW:
        shared_orders = {m: o for m, o in assignment.orders.items() if len(o) >= 2}
        if assignment.clamped:
            partial = mapped.copy()
            for vm_id in assignment.clamped:
                partial.set_order(vm_id, shared_orders[vm_id])
            options.append(partial)
        strict = candidate.copy()
        for vm_id, order in shared_orders.items():
            strict.set_order(vm_id, order)
        options.append(strict)

    best: Optional[Deployment] = None
    for option in options:
        solution, scaled = evaluate_fixed(option, settings)
        if solution.feasible and (best is None or scaled.total_cost() < best.total_cost() - COST_TOLERANCE):
            best = scaled
    return best, relaxed, mapped


def _repair(candidate: Deployment, service_id: str, settings: FlexShareSettings) -> Optional[Deployment]:
    """Strict orders on the shared instances the incoming service uses, others kept.

    With no shared instance this is the fixed-priority program at the current priorities.
    """
    engine = settings.engine
    touched = _shared(candidate, list(candidate.service_vms(service_id).values()))
    try:
        return search_orders(candidate, touched, settings, cap=engine.repair_order_cap, workers=engine.workers)
    except EnumerationOverflowError as exc:
        logger.warning("Order repair for %s skipped: %s", service_id, exc)
        return None


def evaluate_flexshare(candidate: Deployment, service_id: str, settings: FlexShareSettings) -> Verdict:
    """Relaxed program, priority realization, then order repair before giving up."""
    realized, relaxed, mapped = _realize(candidate, settings)
    if realized is not None:
        return Verdict(True, realized)
    if settings.engine.repair_orders:
        repaired = _repair(candidate, service_id, settings)
        if repaired is not None:
            logger.debug("Order repair made %s feasible", service_id)
            return Verdict(True, repaired)
    if not relaxed.feasible:
        return Verdict(False, violated=relaxed.violated_capacity)
    return Verdict(False, violated=_violated_fixed(mapped, settings))


EVALUATORS: Dict[PriorityScheme, Evaluator] = {
    PriorityScheme.PER_SERVICE: evaluate_per_service,
    PriorityScheme.PER_VNF: evaluate_flexshare,
    PriorityScheme.PER_FLOW: evaluate_flexshare,
}
