"""Solving scaling problems and locating the capacity constraints that make them infeasible."""

from __future__ import annotations

import logging
from dataclasses import dataclass, field
from enum import Enum
from typing import Dict, List, Optional, Tuple

import numpy as np
from tenacity import Retrying, before_sleep_log, retry_if_exception_type, stop_after_attempt, wait_none

from flexshare.config import SolverConfig
from flexshare.errors import (
    ScalingInternalError,
    ScalingPreconditionError,
    SolverConvergenceError,
)
from flexshare.scaling.barrier import (
    BarrierSolver,
    ConvexProgram,
    DelayConstraints,
    DelayTerm,
    stack_rows,
)
from flexshare.scaling.problem import Pair, ScalingProblem

logger = logging.getLogger(__name__)

PHASE_ONE_MARGIN = 1e-9
MAX_HEADROOM_DOUBLINGS = 200


class SolveStatus(str, Enum):
    FEASIBLE = "feasible"
    INFEASIBLE = "infeasible"


@dataclass
class ScalingSolution:
    status: SolveStatus
    capability: Dict[str, float] = field(default_factory=dict)
    lambda_tilde: Dict[Pair, float] = field(default_factory=dict)
    objective: float = 0.0
    violated_capacity: List[Tuple[str, float]] = field(default_factory=list)
    newton_steps: int = 0

    @property
    def feasible(self) -> bool:
        return self.status is SolveStatus.FEASIBLE


class _Layout:
    """Variable indices and constant rates of one problem."""

    def __init__(self, problem: ScalingProblem):
        self.problem = problem
        self.mu_index: Dict[str, int] = {m: i for i, m in enumerate(problem.vm_ids)}
        self.lam_index: Dict[Pair, int] = {}
        self.lam_const: Dict[Pair, float] = {}
        self.groups: List[Tuple[List[int], float]] = []
        nxt = len(self.mu_index)
        for entry in problem.instances:
            for s, rate in entry.services:
                pair = (s, entry.vm_id)
                if problem.fixed_lambda is not None:
                    self.lam_const[pair] = problem.fixed_lambda[pair]
                elif not entry.shared or problem.relaxed_target(entry) <= 0:
                    self.lam_const[pair] = problem.relaxed_target(entry) / len(entry.services)
            if problem.fixed_lambda is None and entry.shared and problem.relaxed_target(entry) > 0:
                indices = []
                for s, _ in entry.services:
                    self.lam_index[(s, entry.vm_id)] = nxt
                    indices.append(nxt)
                    nxt += 1
                self.groups.append((indices, problem.relaxed_target(entry)))
        self.size = nxt

    def lam_value(self, pair: Pair, x: np.ndarray) -> float:
        if pair in self.lam_index:
            return float(x[self.lam_index[pair]])
        return self.lam_const[pair]


@dataclass
class _Assembly:
    layout: _Layout
    program: ConvexProgram
    capacity_rows: List[int]
    services: List[str]


def _assemble(problem: ScalingProblem) -> _Assembly:
    layout = _Layout(problem)
    n = layout.size
    rows: List[Tuple[np.ndarray, float]] = []
    capacity_rows: List[int] = []

    for entry in problem.instances:
        m = layout.mu_index[entry.vm_id]
        cap = problem.vms[entry.vm_id].max_capability
        row = np.zeros(n)
        row[m] = 1.0 / cap
        capacity_rows.append(len(rows))
        rows.append((row, 1.0))

        floor = 0.0
        for s, rate in entry.services:
            pair = (s, entry.vm_id)
            if pair in layout.lam_index:
                k = layout.lam_index[pair]
                row = np.zeros(n)
                row[k] = entry.load / cap
                row[m] = -1.0 / cap
                rows.append((row, -entry.load * rate / cap))
                row = np.zeros(n)
                row[k] = -1.0 / max(problem.relaxed_target(entry), 1.0)
                rows.append((row, 0.0))
            else:
                floor = max(floor, entry.load * (layout.lam_const[pair] + rate))
        row = np.zeros(n)
        row[m] = -1.0 / cap
        rows.append((row, -floor / cap))

    G, h = stack_rows(rows, n)

    A = np.zeros((len(layout.groups), n))
    b = np.zeros(len(layout.groups))
    for g, (indices, target) in enumerate(layout.groups):
        A[g, indices] = 1.0
        b[g] = target

    services = [s for s in problem.services if problem.budget(s) > 0]
    service_index = {s: j for j, s in enumerate(services)}
    terms: List[DelayTerm] = []
    for entry in problem.instances:
        for s, rate in entry.services:
            if rate <= 0 or s not in service_index:
                continue
            pair = (s, entry.vm_id)
            terms.append(
                DelayTerm(
                    constraint=service_index[s],
                    mu_index=layout.mu_index[entry.vm_id],
                    lam_index=layout.lam_index.get(pair, -1),
                    lam_const=layout.lam_const.get(pair, 0.0),
                    own_rate=rate,
                    load=entry.load,
                )
            )
    used = sorted({t.constraint for t in terms})
    remap = {old: new for new, old in enumerate(used)}
    services = [services[j] for j in used]
    terms = [DelayTerm(remap[t.constraint], t.mu_index, t.lam_index, t.lam_const, t.own_rate, t.load) for t in terms]
    delays = DelayConstraints(np.array([problem.budget(s) for s in services]), terms) if terms else None

    cost = np.zeros(n)
    for vm_id, i in layout.mu_index.items():
        cost[i] = problem.vms[vm_id].prop_cost
    program = ConvexProgram(cost=cost, G=G, h=h, A=A, b=b, delays=delays)
    return _Assembly(layout=layout, program=program, capacity_rows=capacity_rows, services=services)


def _floors(assembly: _Assembly, x: np.ndarray) -> np.ndarray:
    layout = assembly.layout
    floors = np.zeros(len(layout.mu_index))
    for entry in layout.problem.instances:
        m = layout.mu_index[entry.vm_id]
        floors[m] = max(
            (entry.load * (layout.lam_value((s, entry.vm_id), x) + rate) for s, rate in entry.services),
            default=0.0,
        )
    return floors


def _initial_point(assembly: _Assembly, meet_delays: bool) -> np.ndarray:
    """Equal split of the relaxed rates and capabilities with headroom over the load."""
    layout = assembly.layout
    x = np.zeros(layout.size)
    for indices, target in layout.groups:
        x[indices] = target / len(indices)
    floors = _floors(assembly, x)
    for vm_id, m in layout.mu_index.items():
        cap = layout.problem.vms[vm_id].max_capability
        x[m] = 2.0 * floors[m] if floors[m] > 0 else 0.5 * cap
    delays = assembly.program.delays
    if not meet_delays or delays is None:
        return x
    terms = delays.terms
    for _ in range(MAX_HEADROOM_DOUBLINGS):
        f = delays.values(x)
        if f is not None and np.all(f < 0):
            return x
        late = {j for j, value in enumerate(f) if value >= 0} if f is not None else set(range(len(delays)))
        for m in {t.mu_index for t in terms if t.constraint in late}:
            x[m] = floors[m] + 2.0 * (x[m] - floors[m])
    raise ScalingInternalError("could not build a start point meeting every delay budget")


def _phase_one(assembly: _Assembly, x0: np.ndarray, solver: BarrierSolver) -> Tuple[np.ndarray, bool, int]:
    """Minimize the largest normalized violation; feasible iff it ends below zero.

    The outer loop also stops once the gap bound proves the minimum is positive.
    """
    program = assembly.program
    n = program.size
    G = np.hstack([program.G, np.zeros((len(program.h), 1))])
    G[assembly.capacity_rows, n] = -1.0
    delays = program.delays.with_shift(n) if program.delays is not None else None
    cost = np.zeros(n + 1)
    cost[n] = 1.0
    A = np.hstack([program.A, np.zeros((program.A.shape[0], 1))])
    relaxed = ConvexProgram(cost=cost, G=G, h=program.h, A=A, b=program.b, delays=delays)

    violation = float(np.max(program.G[assembly.capacity_rows] @ x0 - program.h[assembly.capacity_rows]))
    if program.delays is not None:
        f = program.delays.values(x0)
        violation = max(violation, float(np.max(f)))
    start = np.concatenate([x0, [violation + 1.0]])
    result = solver.minimize(
        relaxed,
        start,
        phase="phase-one",
        stop=lambda z, gap: z[n] < -PHASE_ONE_MARGIN or z[n] - gap > PHASE_ONE_MARGIN,
    )
    return result.x[:n], bool(result.x[n] < -PHASE_ONE_MARGIN), result.newton_steps


def _overloaded(problem: ScalingProblem) -> List[Tuple[str, float]]:
    """VMs whose stability floor already reaches their capacity, with the excess."""
    overloaded = []
    for vm_id in problem.vm_ids:
        excess = problem.stability_floor(vm_id) - problem.vms[vm_id].max_capability
        if excess >= 0:
            overloaded.append((vm_id, excess))
    return sorted(overloaded)


def _verify(problem: ScalingProblem, assembly: _Assembly, x: np.ndarray, tolerance: float) -> Optional[str]:
    layout = assembly.layout
    for vm_id, m in layout.mu_index.items():
        if x[m] > problem.vms[vm_id].max_capability * (1 + 1e-12):
            return f"capacity of {vm_id}"
    for indices, target in layout.groups:
        if abs(float(np.sum(x[indices])) - target) > tolerance * max(1.0, target):
            return "rate averaging"
        if np.any(x[indices] < -tolerance):
            return "negative relaxed rate"
    delays = assembly.program.delays
    if delays is not None:
        totals = (delays.values(x) + 1.0) * delays.budgets
        if np.any(totals > delays.budgets + tolerance):
            return "delay budget"
    return None


def _solution(problem: ScalingProblem, assembly: _Assembly, x: np.ndarray, steps: int) -> ScalingSolution:
    layout = assembly.layout
    capability = {vm_id: float(x[m]) for vm_id, m in layout.mu_index.items()}
    lambda_tilde = {pair: max(0.0, layout.lam_value(pair, x)) for pair in problem.pairs()}
    objective = problem.fixed_cost() + sum(problem.vms[m].prop_cost * mu for m, mu in capability.items())
    return ScalingSolution(
        status=SolveStatus.FEASIBLE,
        capability=capability,
        lambda_tilde=lambda_tilde,
        objective=objective,
        newton_steps=steps,
    )


def _solve_once(problem: ScalingProblem, config: SolverConfig, growth: float) -> ScalingSolution:
    if not problem.instances:
        return ScalingSolution(status=SolveStatus.FEASIBLE)
    if any(problem.budget(s) <= 0 for s in problem.services):
        logger.debug("Delay budget already exhausted outside the roster")
        return ScalingSolution(status=SolveStatus.INFEASIBLE)
    overloaded = _overloaded(problem)
    if overloaded:
        logger.debug("Stability floor reaches capacity on %s", [m for m, _ in overloaded])
        return ScalingSolution(status=SolveStatus.INFEASIBLE, violated_capacity=overloaded)

    assembly = _assemble(problem)
    solver = BarrierSolver(config, growth)
    x = _initial_point(assembly, meet_delays=False)
    steps = 0
    if assembly.program.slack(x) is None:
        x, feasible, steps = _phase_one(assembly, x, solver)
        if not feasible:
            violated = _elastic(problem, config, growth)
            flagged = [(m, s) for m, s in violated.items() if s > config.elastic_threshold]
            if not flagged and violated:
                worst = max(violated, key=lambda m: (violated[m], m))
                logger.warning("Elastic slack below threshold on an infeasible problem; flagging %s", worst)
                flagged = [(worst, violated[worst])]
            return ScalingSolution(status=SolveStatus.INFEASIBLE, violated_capacity=sorted(flagged), newton_steps=steps)

    result = solver.minimize(assembly.program, x, phase="phase-two")
    steps += result.newton_steps
    failure = _verify(problem, assembly, result.x, config.feasibility_tolerance)
    if failure is not None:
        raise SolverConvergenceError("verify", steps, {"constraint": failure})
    return _solution(problem, assembly, result.x, steps)


def _retrying(config: SolverConfig) -> Retrying:
    return Retrying(
        retry=retry_if_exception_type(SolverConvergenceError),
        stop=stop_after_attempt(len(config.retry_growths)),
        wait=wait_none(),
        before_sleep=before_sleep_log(logger, logging.WARNING),
        reraise=True,
    )


def solve(problem: ScalingProblem, config: Optional[SolverConfig] = None) -> ScalingSolution:
    """Minimize the operator cost of the roster under capacity, averaging and delay constraints."""
    config = config or SolverConfig()
    for attempt in _retrying(config):
        with attempt:
            growth = config.retry_growths[attempt.retry_state.attempt_number - 1]
            solution = _solve_once(problem, config, growth)
    logger.debug("Scaling %s in %d Newton steps", solution.status.value, solution.newton_steps)
    return solution


def _elastic(problem: ScalingProblem, config: SolverConfig, growth: float) -> Dict[str, float]:
    if any(problem.budget(s) <= 0 for s in problem.services):
        raise ScalingInternalError("elastic relaxation cannot meet a delay budget that is already exhausted")
    assembly = _assemble(problem)
    program = assembly.program
    n = program.size
    vm_ids = list(assembly.layout.mu_index)
    count = len(vm_ids)
    x0 = _initial_point(assembly, meet_delays=True)

    G = np.hstack([program.G, np.zeros((len(program.h), count))])
    extra_rows = np.zeros((count, n + count))
    sigma0 = np.zeros(count)
    for k, vm_id in enumerate(vm_ids):
        cap = problem.vms[vm_id].max_capability
        G[assembly.capacity_rows[k], n + k] = -1.0 / cap
        extra_rows[k, n + k] = -1.0 / cap
        sigma0[k] = max(0.0, x0[assembly.layout.mu_index[vm_id]] - cap) + 0.5 * cap
    G = np.vstack([G, extra_rows])
    h = np.concatenate([program.h, np.zeros(count)])
    cost = np.concatenate([np.zeros(n), np.ones(count)])
    A = np.hstack([program.A, np.zeros((program.A.shape[0], count))])
    elastic = ConvexProgram(cost=cost, G=G, h=h, A=A, b=program.b, delays=program.delays)
    start = np.concatenate([x0, sigma0])
    if elastic.slack(start) is None:
        raise ScalingInternalError("elastic relaxation has no strictly feasible start")
    result = BarrierSolver(config, growth).minimize(elastic, start, phase="elastic")
    return {vm_id: float(result.x[n + k]) for k, vm_id in enumerate(vm_ids)}


def find_violated_capacity(problem: ScalingProblem, config: Optional[SolverConfig] = None) -> List[Tuple[str, float]]:
    """VMs whose capacity bound must be relaxed, with the relaxation needed.

    VMs whose stability floor alone reaches capacity are reported with that
    excess, without running the elastic program. Raises
    ScalingPreconditionError when the problem is feasible.
    """
    config = config or SolverConfig()
    overloaded = _overloaded(problem)
    if overloaded:
        return overloaded
    for attempt in _retrying(config):
        with attempt:
            growth = config.retry_growths[attempt.retry_state.attempt_number - 1]
            slack = _elastic(problem, config, growth)
    violated = sorted((m, s) for m, s in slack.items() if s > config.elastic_threshold)
    if not violated:
        raise ScalingPreconditionError("scaling problem is feasible; no capacity constraint is violated")
    logger.debug("Violated capacity: %s", violated)
    return violated
