"""Capability scaling: relaxed and fixed-priority programs, infeasibility analysis, priority mapping."""

from flexshare.scaling.barrier import BarrierResult, BarrierSolver, ConvexProgram, DelayConstraints, DelayTerm
from flexshare.scaling.priorities import PriorityAssignment, map_priorities, relaxed_order, solve_centers
from flexshare.scaling.problem import InstanceEntry, ScalingProblem, build_problem
from flexshare.scaling.solver import ScalingSolution, SolveStatus, find_violated_capacity, solve

__all__ = [
    "BarrierResult",
    "BarrierSolver",
    "ConvexProgram",
    "DelayConstraints",
    "DelayTerm",
    "InstanceEntry",
    "PriorityAssignment",
    "ScalingProblem",
    "ScalingSolution",
    "SolveStatus",
    "build_problem",
    "find_violated_capacity",
    "map_priorities",
    "relaxed_order",
    "solve",
    "solve_centers",
]
