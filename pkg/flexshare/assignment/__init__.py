"""Bipartite placement graph and minimum-cost assignment."""

from flexshare.assignment.graph import DEFAULT_EPSILON, BipartiteGraph, build_graph, edge_cost
from flexshare.assignment.hungarian import apply_assignment, assignment_cost, hungarian_solve

__all__ = [
    "DEFAULT_EPSILON",
    "BipartiteGraph",
    "apply_assignment",
    "assignment_cost",
    "build_graph",
    "edge_cost",
    "hungarian_solve",
]
