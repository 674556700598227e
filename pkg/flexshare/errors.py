"""
Standardized error hierarchy for FlexShare operations.
"""

from typing import Any, Dict, Optional


class FlexShareError(Exception):
    """Base exception for all FlexShare errors."""

    def __init__(self, message: str, context: Optional[Dict[str, Any]] = None):
        self.message = message
        self.context = context or {}
        super().__init__(message)


class ConfigurationError(FlexShareError):
    """Configuration validation or loading error."""

    def __init__(self, message: str, config_key: Optional[str] = None,
                 context: Optional[Dict[str, Any]] = None):
        self.config_key = config_key
        if config_key:
            formatted_message = f"Configuration error for '{config_key}': {message}"
        else:
            formatted_message = f"Configuration error: {message}"
        super().__init__(formatted_message, context)


# ---------------------------------------------------------------------------
# Queueing model
# ---------------------------------------------------------------------------


class ModelError(FlexShareError):
    """Base class for queueing-model errors."""


class UnstableQueueError(ModelError):
    """The offered load reaches or exceeds the capability of a queue."""

    def __init__(self, load: float, capability: float, higher_rate: float, own_rate: float,
                 context: Optional[Dict[str, Any]] = None):
        self.load = load
        self.capability = capability
        self.higher_rate = higher_rate
        self.own_rate = own_rate
        offered = load * (higher_rate + own_rate)
        message = f"Unstable queue: offered load {offered:.6g} >= capability {capability:.6g}"
        super().__init__(message, context)


class PopulationError(ModelError):
    """The target service is not part of an instance population."""

    def __init__(self, service_id: str, context: Optional[Dict[str, Any]] = None):
        self.service_id = service_id
        super().__init__(f"Service '{service_id}' is not in the instance population", context)


class DeploymentStateError(ModelError):
    """A deployment invariant is broken."""


# ---------------------------------------------------------------------------
# Assignment
# ---------------------------------------------------------------------------


class AssignmentError(FlexShareError):
    """Base class for VNF-to-VM assignment errors."""


class InsufficientResourcesError(AssignmentError):
    """A required VNF has no admissible VM."""

    def __init__(self, service_id: str, vnf_id: str, context: Optional[Dict[str, Any]] = None):
        self.service_id = service_id
        self.vnf_id = vnf_id
        message = f"No admissible VM for VNF '{vnf_id}' of service '{service_id}'"
        super().__init__(message, context)


class NoAssignmentError(AssignmentError):
    """The bipartite graph has no perfect matching on its VNF side."""

    def __init__(self, service_id: str, context: Optional[Dict[str, Any]] = None):
        self.service_id = service_id
        super().__init__(f"No complete assignment left for service '{service_id}'", context)


# ---------------------------------------------------------------------------
# Scaling
# ---------------------------------------------------------------------------


class ScalingError(FlexShareError):
    """Base class for capability-scaling errors."""


class SolverConvergenceError(ScalingError):
    """The barrier method ran out of its iteration budget."""

    def __init__(self, phase: str, iterations: int, context: Optional[Dict[str, Any]] = None):
        self.phase = phase
        self.iterations = iterations
        message = f"Barrier solver did not converge in phase '{phase}' after {iterations} Newton steps"
        super().__init__(message, context)


class ScalingPreconditionError(ScalingError):
    """A scaling operation was called on a problem or solution in the wrong state."""


class ScalingInternalError(ScalingError):
    """The elastic relaxation could not be started; this indicates a bug."""


# ---------------------------------------------------------------------------
# Engine
# ---------------------------------------------------------------------------


class EngineError(FlexShareError):
    """Base class for deployment-engine errors."""


class ServiceStateError(EngineError):
    """A service is deployed twice or removed while absent."""

    def __init__(self, service_id: str, message: str, context: Optional[Dict[str, Any]] = None):
        self.service_id = service_id
        super().__init__(f"Service '{service_id}': {message}", context)


class EnumerationOverflowError(EngineError):
    """A priority-order enumeration exceeds its configured cap."""

    def __init__(self, combinations: int, cap: int, context: Optional[Dict[str, Any]] = None):
        self.combinations = combinations
        self.cap = cap
        message = f"Enumeration of {combinations} priority combinations exceeds the cap of {cap}"
        super().__init__(message, context)


# ---------------------------------------------------------------------------
# Analysis and scenarios
# ---------------------------------------------------------------------------


class AnalysisError(FlexShareError):
    """Base class for analysis errors."""


class OracleCapError(AnalysisError):
    """The exhaustive oracle refused an instance above its caps."""

    def __init__(self, dimension: str, size: int, cap: int, context: Optional[Dict[str, Any]] = None):
        self.dimension = dimension
        self.size = size
        self.cap = cap
        super().__init__(f"Oracle cap exceeded: {size} {dimension} > {cap}", context)


class ScenarioError(FlexShareError):
    """Scenario file validation error."""

    def __init__(self, message: str, field: Optional[str] = None, line: Optional[int] = None,
                 context: Optional[Dict[str, Any]] = None):
        self.field = field
        self.line = line
        location = ""
        if field:
            location = f" for '{field}'"
        if line is not None:
            location += f" (line {line})"
        super().__init__(f"Scenario error{location}: {message}", context)
