"""Deployment metrics, competitive-ratio diagnostics and the exhaustive oracle."""

from flexshare.analysis.competitive import (
    VnfBound,
    competitive_bound,
    competitive_report,
    load_gap,
    normalized_capacity,
    uniform_capability,
)
from flexshare.analysis.metrics import DeploymentMetrics, InstanceCapability, capability_report, metrics
from flexshare.analysis.oracle import OracleResult, check_caps, oracle_enumerate

__all__ = [
    "DeploymentMetrics",
    "InstanceCapability",
    "OracleResult",
    "VnfBound",
    "capability_report",
    "check_caps",
    "competitive_bound",
    "competitive_report",
    "load_gap",
    "metrics",
    "normalized_capacity",
    "oracle_enumerate",
    "uniform_capability",
]
