"""Domain types and closed-form queueing mathematics."""

from flexshare.model.deployment import STRICT_CENTER_SPACING, Deployment, strict_levels
from flexshare.model.queueing import (
    Population,
    heaviside,
    instance_stable,
    lambda_per_flow,
    lambda_per_vnf,
    q_overtake,
    service_total_delay,
    sojourn_time,
)
from flexshare.model.types import PriorityModel, PriorityScheme, ServiceSpec, VmSpec, VnfSpec

__all__ = [
    "Deployment",
    "Population",
    "PriorityModel",
    "PriorityScheme",
    "STRICT_CENTER_SPACING",
    "ServiceSpec",
    "VmSpec",
    "VnfSpec",
    "heaviside",
    "instance_stable",
    "lambda_per_flow",
    "lambda_per_vnf",
    "q_overtake",
    "service_total_delay",
    "sojourn_time",
    "strict_levels",
]
