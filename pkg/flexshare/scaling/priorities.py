"""Turning relaxed higher-priority rates into concrete priority parameters."""

from __future__ import annotations

import logging
from dataclasses import dataclass, field
from typing import Dict, List

import numpy as np

from flexshare.errors import ScalingPreconditionError
from flexshare.model import PriorityModel, PriorityScheme
from flexshare.scaling.problem import InstanceEntry, Pair, ScalingProblem
from flexshare.scaling.solver import ScalingSolution

logger = logging.getLogger(__name__)

MIDDLE_CASE_TOLERANCE = 1e-9


@dataclass
class PriorityAssignment:
    """Priority parameter per (service, VM), plus what the per-flow mapping had to repair."""

    params: Dict[Pair, float] = field(default_factory=dict)
    clamped: List[str] = field(default_factory=list)
    orders: Dict[str, List[str]] = field(default_factory=dict)


def relaxed_order(entry: InstanceEntry, lambda_tilde: Dict[Pair, float]) -> List[str]:
    """Services from highest to lowest priority: fewer flows ahead means higher priority."""
    return sorted((s for s, _ in entry.services), key=lambda s: (lambda_tilde[(s, entry.vm_id)], s))


def solve_centers(entry: InstanceEntry, lambda_tilde: Dict[Pair, float], jitter: float) -> np.ndarray:
    """Centres reproducing the relaxed rates when every pair is in the linear regime.

    Solves the linearized overtaking equations anchored by a zero mean, in the
    least-squares sense. Returns equal centres when the system is singular.
    """
    services = [s for s, _ in entry.services]
    rates = np.array([rate for _, rate in entry.services], dtype=float)
    k = len(services)
    total = float(rates.sum())
    matrix = np.zeros((k + 1, k))
    rhs = np.zeros(k + 1)
    for i, s in enumerate(services):
        matrix[i, :] = rates / (4.0 * jitter)
        matrix[i, i] = (rates[i] - total) / (4.0 * jitter)
        rhs[i] = lambda_tilde[(s, entry.vm_id)] - 0.5 * (total - rates[i])
    matrix[k, :] = 1.0
    centers, _, rank, _ = np.linalg.lstsq(matrix, rhs, rcond=None)
    if rank < k:
        logger.debug("Singular centre system at %s; using equal centres", entry.vm_id)
        return np.zeros(k)
    return centers


def map_priorities(solution: ScalingSolution, problem: ScalingProblem, model: PriorityModel) -> PriorityAssignment:
    """Derive priority parameters for every (service, instance) of a feasible solution."""
    if not solution.feasible:
        raise ScalingPreconditionError("priorities can only be mapped from a feasible solution")
    result = PriorityAssignment()
    lam = solution.lambda_tilde

    if model.scheme is PriorityScheme.PER_SERVICE:
        ranking = sorted(problem.max_delay, key=lambda s: (problem.max_delay[s], s))
        for entry in problem.instances:
            present = {s for s, _ in entry.services}
            order = [s for s in ranking if s in present]
            result.orders[entry.vm_id] = order
            for rank, s in enumerate(order):
                result.params[(s, entry.vm_id)] = float(len(order) - 1 - rank)
        return result

    for entry in problem.instances:
        order = relaxed_order(entry, lam)
        result.orders[entry.vm_id] = order
        if model.scheme is PriorityScheme.PER_VNF:
            for s, _ in entry.services:
                result.params[(s, entry.vm_id)] = -lam[(s, entry.vm_id)]
            continue

        if not entry.shared:
            result.params[(entry.services[0][0], entry.vm_id)] = 0.0
            continue
        centers = solve_centers(entry, lam, model.jitter)
        spread = float(centers.max() - centers.min())
        if spread > 2 * model.jitter + MIDDLE_CASE_TOLERANCE:
            centers = np.clip(centers - centers.mean(), -model.jitter, model.jitter)
            result.clamped.append(entry.vm_id)
            logger.debug("Clamped per-flow centres at %s (spread %.4g)", entry.vm_id, spread)
        for (s, _), center in zip(entry.services, centers):
            result.params[(s, entry.vm_id)] = float(center)
    return result
