"""Minimum-cost assignment of VNFs to VMs."""

from __future__ import annotations

import logging
from typing import Dict, Optional, Tuple

import numpy as np
from scipy.optimize import linear_sum_assignment

from flexshare.assignment.graph import BipartiteGraph
from flexshare.errors import NoAssignmentError
from flexshare.model import Deployment, ServiceSpec

logger = logging.getLogger(__name__)

TIE_TOLERANCE = 1e-12


def _cost_matrix(graph: BipartiteGraph) -> Tuple[np.ndarray, list, list]:
    rows = list(graph.vnfs)
    cols = graph.vms
    col_index = {m: j for j, m in enumerate(cols)}
    matrix = np.full((len(rows), len(cols)), np.inf)
    for i, vnf_id in enumerate(rows):
        for vm_id in graph.neighbours(vnf_id):
            matrix[i, col_index[vm_id]] = graph.edges[(vnf_id, vm_id)]
    return matrix, rows, cols


def _optimal_cost(matrix: np.ndarray) -> Optional[float]:
    if matrix.shape[0] == 0:
        return 0.0
    if matrix.shape[0] > matrix.shape[1] or np.isinf(matrix).all(axis=1).any():
        return None
    try:
        rows, cols = linear_sum_assignment(matrix)
    except ValueError:
        return None
    total = float(matrix[rows, cols].sum())
    return total if np.isfinite(total) else None


def hungarian_solve(graph: BipartiteGraph) -> Dict[str, str]:
    """Map every VNF of the graph to a distinct VM at minimum total edge cost.

    Among optimal matchings, VNFs taken in id order get the lowest VM id that
    keeps the optimum.
    """
    matrix, rows, cols = _cost_matrix(graph)
    best = _optimal_cost(matrix)
    if best is None:
        raise NoAssignmentError(graph.service_id)

    tolerance = TIE_TOLERANCE * max(1.0, abs(best))
    work = matrix.copy()
    chosen: Dict[str, str] = {}
    for i, vnf_id in enumerate(rows):
        for j in np.flatnonzero(np.isfinite(work[i])):
            trial = work.copy()
            trial[i, :] = np.inf
            trial[:, j] = np.inf
            trial[i, j] = matrix[i, j]
            cost = _optimal_cost(trial)
            if cost is not None and cost <= best + tolerance:
                work = trial
                chosen[vnf_id] = cols[j]
                break
        else:  # pragma: no cover - the optimum always admits a completion
            raise NoAssignmentError(graph.service_id, {"vnf": vnf_id})
    logger.debug("Assignment for %s: %s (cost %.6g)", graph.service_id, chosen, best)
    return chosen


def assignment_cost(graph: BipartiteGraph, assignment: Dict[str, str]) -> float:
    return sum(graph.edges[(v, m)] for v, m in assignment.items())


def apply_assignment(assignment: Dict[str, str], service: ServiceSpec, deployment: Deployment) -> Deployment:
    """Record the placement in x and y; capability is left to scaling."""
    if service.id not in deployment.services:
        deployment.add_service(service)
    activated = []
    for vnf_id in sorted(assignment):
        vm_id = assignment[vnf_id]
        if deployment.assign(service.id, vnf_id, vm_id):
            activated.append(vm_id)
        deployment.priorities.setdefault((service.id, vm_id), 0.0)
    if activated:
        logger.debug("Activated %s for %s", activated, service.id)
    return deployment
