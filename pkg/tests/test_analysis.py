import math

import numpy as np
import pytest

from flexshare.analysis import (
    capability_report,
    competitive_bound,
    competitive_report,
    load_gap,
    metrics,
    normalized_capacity,
    uniform_capability,
)
from flexshare.engine import Strategy, run_strategy
from flexshare.errors import AnalysisError
from flexshare.model import ServiceSpec, service_total_delay, sojourn_time

from asserts import FlexShareAssertions
from builders import build_deployment


@pytest.fixture
def two_instances():
    """Two services on one instance of v, one of them also alone on w."""
    services = [
        ServiceSpec(id="a", rates={"v": 1.0}, max_delay=5.0),
        ServiceSpec(id="b", rates={"v": 1.0, "w": 1.0}, max_delay=5.0),
    ]
    deployment = build_deployment(
        {"v": 1.0, "w": 1.0},
        {"m1": 10.0, "m2": 10.0, "m3": 10.0},
        services,
        {("a", "v"): "m1", ("b", "v"): "m1", ("b", "w"): "m2"},
        fixed_cost=8.0,
        prop_cost=0.5,
    )
    deployment.capability.update({"m1": 4.0, "m2": 4.0})
    return deployment


class TestMetrics:
    def test_figures(self, two_instances):
        figures = metrics(two_instances)
        assert figures.total_cost == pytest.approx(2 * (8.0 + 0.5 * 4.0))
        assert figures.services_per_instance == pytest.approx(1.5)
        assert figures.used_capability == pytest.approx(8.0)
        assert figures.max_active_capability == pytest.approx(20.0)
        assert figures.active_vms == 2
        assert figures.instances_per_vnf == {"v": 1, "w": 1}

    def test_single_vm_cost(self, two_instances):
        two_instances.deactivate("m2")
        assert metrics(two_instances).total_cost == pytest.approx(10.0)

    def test_empty_deployment(self, example1):
        figures = metrics(example1.deployment())
        assert figures.total_cost == 0.0
        assert figures.services_per_instance == 0.0
        assert figures.as_dict()["instances_per_vnf"] == {}


class TestCapabilityReport:
    def test_least_capability_holds_others_fixed(self, shared_example1):
        rows = {row.vm_id: row for row in capability_report(shared_example1)}
        fr = rows["m1"]
        assert fr.vnf_id == "fr"
        assert fr.services == ["s1"]
        assert fr.stability_floor == pytest.approx(2.0)
        assert fr.headroom == pytest.approx(0.0)
        # s1 spends 4/9 at each shared instance under equal priorities.
        FlexShareAssertions.assert_close(fr.min_capability, 2.0 + 90.0 / 19.0, rel=1e-8)

    def test_shared_instance(self, shared_example1):
        md = {row.vm_id: row for row in capability_report(shared_example1)}["m2"]
        assert md.stability_floor == pytest.approx(3.0)
        assert 3.0 < md.min_capability <= 5.0
        trial = shared_example1.copy()
        trial.capability["m2"] = md.min_capability * (1 - 1e-6)
        slack = [trial.services[s].max_delay - service_total_delay(s, trial) for s in ("s1", "s2")]
        assert min(slack) < 0

    def test_missed_target_has_no_least_capability(self, shared_example1):
        shared_example1.set_order("m2", ["s1", "s2"])
        shared_example1.set_order("m3", ["s1", "s2"])
        rows = {row.vm_id: row for row in capability_report(shared_example1)}
        assert rows["m2"].min_capability is None


class TestCompetitiveBounds:
    def test_load_gap(self):
        assert load_gap(8.0, 2.0) == pytest.approx(2.0)
        assert normalized_capacity(10.0, 2.0) == pytest.approx(5.0)

    @pytest.mark.parametrize("capacity, delay", [(0.0, 1.0), (1.0, 0.0), (-1.0, 1.0)])
    def test_load_gap_needs_positive_inputs(self, capacity, delay):
        with pytest.raises(AnalysisError, match="must be positive"):
            load_gap(capacity, delay)

    def test_load_gap_bounds_every_sojourn(self):
        rng = np.random.default_rng(17)
        for _ in range(200):
            load = rng.uniform(0.5, 2.0)
            capacity = normalized_capacity(rng.uniform(5.0, 20.0), load)
            delay = rng.uniform(0.5, 5.0)
            theta = load_gap(capacity, delay)
            offered = rng.uniform(0.0, capacity - theta)
            mu = rng.uniform(offered + theta, capacity)
            rates = rng.dirichlet(np.ones(int(rng.integers(1, 5)))) * offered
            for i, own in enumerate(rates):
                # Strict order: everything listed earlier is served first.
                higher = float(np.sum(rates[:i]))
                assert mu - higher >= mu - higher - own - 1e-12
                assert mu - higher - own >= mu - offered - 1e-9
                assert mu - offered >= theta * (1 - 1e-12)
                assert sojourn_time(load, mu * load, higher, own) <= delay * (1 + 1e-9)

    def test_bound_limits(self):
        assert competitive_bound(2.0, 4.0) == pytest.approx(4.0)
        assert competitive_bound(1e-9, 4.0) == pytest.approx(2.0)
        assert competitive_bound(3.9, 4.0) > 50

    def test_bound_needs_room(self):
        with pytest.raises(AnalysisError, match="no room"):
            competitive_bound(4.0, 4.0)

    def test_mixed_capabilities(self, example1):
        with pytest.raises(AnalysisError, match="same maximum capability"):
            uniform_capability(example1.deployment())

    def test_report_after_run(self, example2, settings):
        report = run_strategy(example2, Strategy.PER_VNF_FLEXSHARE, settings)
        (row,) = competitive_report(report.deployment, {"v1": 1})
        assert row.vnf_id == "v1"
        assert row.instances == 2
        assert row.oracle_instances == 1
        assert row.capacity == pytest.approx(5.0)
        assert row.average_load == pytest.approx(3.0)
        assert row.load_gap == pytest.approx(math.sqrt(5.0 / row.min_sojourn))
        assert row.ratio >= 2.0
        assert row.within_bound is True
        assert row.load_bound_holds is True
        assert row.as_dict()["vnf_id"] == "v1"

    def test_single_instance_gets_no_checks(self, example2, settings):
        report = run_strategy(example2, Strategy.PER_VNF_FLEXSHARE, settings, multiplier=0.5)
        (row,) = competitive_report(report.deployment)
        assert row.instances == 1
        assert row.within_bound is None
        assert row.load_bound_holds is None
