import numpy as np
import pytest

from flexshare.errors import ScalingPreconditionError
from flexshare.model import PriorityModel, ServiceSpec, lambda_per_flow, lambda_per_vnf
from flexshare.scaling import (
    InstanceEntry,
    ScalingSolution,
    SolveStatus,
    build_problem,
    map_priorities,
    relaxed_order,
    solve_centers,
)

from builders import build_deployment


def _shared_problem(rates, delays=None):
    ids = [f"s{i + 1}" for i in range(len(rates))]
    delays = delays or [10.0] * len(rates)
    services = [ServiceSpec(id=s, rates={"v": r}, max_delay=d) for s, r, d in zip(ids, rates, delays)]
    deployment = build_deployment({"v": 1.0}, {"m": 20.0}, services, {(s, "v"): "m" for s in ids})
    return deployment, build_problem(deployment)


def _feasible(lambda_tilde):
    return ScalingSolution(status=SolveStatus.FEASIBLE, capability={"m": 10.0}, lambda_tilde=lambda_tilde)


class TestRelaxedOrder:
    def test_fewer_flows_ahead_ranks_higher(self):
        entry = InstanceEntry("m", "v", 1.0, (("a", 1.0), ("b", 1.0), ("c", 1.0)))
        lam = {("a", "m"): 2.0, ("b", "m"): 0.0, ("c", "m"): 1.0}
        assert relaxed_order(entry, lam) == ["b", "c", "a"]

    def test_ties_by_id(self):
        entry = InstanceEntry("m", "v", 1.0, (("b", 1.0), ("a", 1.0)))
        assert relaxed_order(entry, {("a", "m"): 1.0, ("b", "m"): 1.0}) == ["a", "b"]


class TestSolveCenters:
    def test_recovers_linear_regime_centres(self):
        entry = InstanceEntry("m", "v", 1.0, (("s", 2.0), ("t", 1.0)))
        centers = solve_centers(entry, {("s", "m"): 0.4, ("t", "m"): 1.2}, 1.0)
        np.testing.assert_allclose(centers, [0.2, -0.2], atol=1e-12)

    def test_equal_rates_give_equal_centres(self):
        entry = InstanceEntry("m", "v", 1.0, (("s", 1.0), ("t", 1.0)))
        centers = solve_centers(entry, {("s", "m"): 0.5, ("t", "m"): 0.5}, 1.0)
        np.testing.assert_allclose(centers, [0.0, 0.0], atol=1e-12)

    def test_three_service_round_trip(self):
        entry = InstanceEntry("m", "v", 1.0, (("a", 1.0), ("b", 2.0), ("c", 0.5)))
        truth = {"a": 0.3, "b": -0.1, "c": -0.2}
        population = [(s, rate, truth[s]) for s, rate in entry.services]
        lam = {(s, "m"): lambda_per_flow(s, population, 1.0) for s, _ in entry.services}
        centers = solve_centers(entry, lam, 1.0)
        rebuilt = [(s, rate, float(c)) for (s, rate), c in zip(entry.services, centers)]
        for s, _ in entry.services:
            assert lambda_per_flow(s, rebuilt, 1.0) == pytest.approx(lam[(s, "m")], abs=1e-9)


class TestMapPriorities:
    def test_per_vnf_negates_relaxed_rates(self):
        _, problem = _shared_problem([2.0, 1.0])
        result = map_priorities(_feasible({("s1", "m"): 0.0, ("s2", "m"): 3.0}), problem, PriorityModel.per_vnf())
        assert result.params == {("s1", "m"): 0.0, ("s2", "m"): -3.0}
        assert result.orders == {"m": ["s1", "s2"]}
        population = [(s, r, result.params[(s, "m")]) for s, r in problem.entry("m").services]
        assert lambda_per_vnf("s1", population) == 0.0
        assert lambda_per_vnf("s2", population) == pytest.approx(2.0)

    def test_per_service_ranks_by_delay_target(self):
        _, problem = _shared_problem([1.0, 1.0, 1.0], delays=[5.0, 1.0, 3.0])
        lam = {("s1", "m"): 0.0, ("s2", "m"): 1.5, ("s3", "m"): 1.5}
        result = map_priorities(_feasible(lam), problem, PriorityModel.per_service())
        assert result.orders["m"] == ["s2", "s3", "s1"]
        assert result.params[("s2", "m")] > result.params[("s3", "m")] > result.params[("s1", "m")]

    def test_per_flow_equal_rates(self):
        _, problem = _shared_problem([1.0, 1.0])
        result = map_priorities(_feasible({("s1", "m"): 0.5, ("s2", "m"): 0.5}), problem, PriorityModel.per_flow(1.0))
        assert result.params[("s1", "m")] == pytest.approx(0.0, abs=1e-12)
        assert result.params[("s2", "m")] == pytest.approx(0.0, abs=1e-12)
        assert result.clamped == []

    def test_single_service_instance(self):
        service = ServiceSpec(id="s", rates={"v": 1.0}, max_delay=5.0)
        deployment = build_deployment({"v": 1.0}, {"m": 5.0}, [service], {("s", "v"): "m"})
        problem = build_problem(deployment)
        result = map_priorities(_feasible({("s", "m"): 0.5}), problem, PriorityModel.per_flow(1.0))
        assert result.params == {("s", "m"): 0.0}

    def test_needs_feasible_solution(self):
        _, problem = _shared_problem([1.0, 1.0])
        with pytest.raises(ScalingPreconditionError, match="feasible"):
            map_priorities(ScalingSolution(status=SolveStatus.INFEASIBLE), problem, PriorityModel.per_vnf())
