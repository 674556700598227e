"""
Closed-form queueing mathematics.

Every VNF instance is an M/M/1 queue whose flows are served with priorities. A
service's sojourn time at an instance depends on the rate of flows that are given
priority over it (``higher_rate``) and on its own rate.
"""

from __future__ import annotations

import math
from typing import TYPE_CHECKING, Iterable, Sequence, Tuple

from flexshare.errors import ModelError, PopulationError, UnstableQueueError
from flexshare.model.types import VmSpec, VnfSpec

if TYPE_CHECKING:  # pragma: no cover
    from flexshare.model.deployment import Deployment

# (service id, rate at the instance, priority parameter)
Population = Sequence[Tuple[str, float, float]]


def sojourn_time(load: float, capability: float, higher_rate: float, own_rate: float) -> float:
    """Mean sojourn time of a flow class at a priority queue.

    ``load`` is the capability a flow consumes, ``capability`` the VM's scaled
    capability, ``higher_rate`` the rate of flows served before this class and
    ``own_rate`` the class's own rate.
    """
    if not (load > 0 and capability > 0):
        raise ModelError(f"load and capability must be positive (got {load}, {capability})")
    if higher_rate < 0 or own_rate < 0:
        raise ModelError(f"rates must be non-negative (got {higher_rate}, {own_rate})")
    if load * (higher_rate + own_rate) >= capability:
        raise UnstableQueueError(load, capability, higher_rate, own_rate)
    service_time = load / capability
    return service_time / ((1.0 - load * higher_rate / capability) * (1.0 - load * (higher_rate + own_rate) / capability))


def heaviside(z: float) -> float:
    if z > 0:
        return 1.0
    if z < 0:
        return 0.0
    return 0.5


def _split_population(target: str, population: Population) -> Tuple[float, list]:
    own = None
    others = []
    for service_id, rate, param in population:
        if rate < 0:
            raise ModelError(f"rate of '{service_id}' must be non-negative")
        if service_id == target:
            own = param
        else:
            others.append((rate, param))
    if own is None:
        raise PopulationError(target)
    return own, others


def lambda_per_vnf(target: str, population: Population) -> float:
    """Rate of flows served before ``target`` under deterministic priorities.

    Higher priority values are served first; equal priorities split evenly.
    """
    own, others = _split_population(target, population)
    return sum(heaviside(param - own) * rate for rate, param in others)


def q_overtake(r_s: float, r_t: float, jitter: float) -> float:
    """Probability that a flow of t is given priority over a flow of s.

    Priorities are uniform on [r - jitter, r + jitter].
    """
    if not (math.isfinite(jitter) and jitter > 0):
        raise ModelError(f"jitter must be finite and positive (got {jitter})")
    delta = r_t - r_s
    if delta > 2 * jitter:
        return 1.0
    if delta < -2 * jitter:
        return 0.0
    return min(1.0, max(0.0, 0.5 + delta / (4 * jitter)))


def lambda_per_flow(target: str, population: Population, jitter: float) -> float:
    """Rate of flows served before ``target`` under uniform per-flow priorities."""
    own, others = _split_population(target, population)
    return sum(q_overtake(own, center, jitter) * rate for rate, center in others)


def instance_stable(vnf: VnfSpec, vm: VmSpec, rates: Iterable[float]) -> bool:
    """True iff the VM can serve the given rates of ``vnf`` below its maximum capability."""
    return vnf.load * sum(rates) < vm.max_capability


def service_total_delay(service_id: str, deployment: "Deployment") -> float:
    """End-to-end delay of a service: the sum of its sojourn times."""
    return sum(
        deployment.sojourn(service_id, vm_id)
        for vm_id in deployment.service_vms(service_id).values()
    )
