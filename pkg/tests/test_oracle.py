import numpy as np
import pytest

from flexshare.analysis import check_caps, competitive_report, oracle_enumerate
from flexshare.config import AnalysisConfig
from flexshare.engine import Strategy, run_strategy
from flexshare.errors import OracleCapError
from flexshare.model import ServiceSpec, VmSpec, VnfSpec
from flexshare.scenario import ScenarioFile

from asserts import FlexShareAssertions


def _random_instance(rng: np.random.Generator, index: int, vm_count: int = 3) -> ScenarioFile:
    """Uniform VMs whose activation costs more than running one at full capability."""
    vnf_ids = ["v1", "v2"][: int(rng.integers(1, 3))]
    services = []
    for i in range(int(rng.integers(2, 4))):
        used = [v for v in vnf_ids if rng.random() < 0.7] or [vnf_ids[0]]
        services.append(
            ServiceSpec(
                id=f"s{i + 1}",
                rates={v: round(float(rng.uniform(0.5, 2.0)), 3) for v in used},
                max_delay=round(float(rng.uniform(1.5, 4.0)), 3),
            )
        )
    return ScenarioFile(
        name=f"random-{index}",
        vnfs=[VnfSpec(id=v, load=1.0) for v in vnf_ids],
        services=services,
        vms=[VmSpec(id=f"m{j + 1}", max_capability=6.0, fixed_cost=10.0, prop_cost=1.0) for j in range(vm_count)],
    )


class TestCaps:
    def test_too_many_services(self):
        services = [ServiceSpec(id=f"s{i}", rates={"v": 1.0}, max_delay=1.0) for i in range(4)]
        with pytest.raises(OracleCapError, match="4 services > 3"):
            check_caps(services, [], ["v"], AnalysisConfig())

    def test_too_many_vms(self, example1):
        with pytest.raises(OracleCapError, match="5 VMs > 4"):
            oracle_enumerate(example1.vnfs, example1.vm_specs(), example1.requests())

    def test_raised_caps(self, example1, settings):
        settings.analysis = AnalysisConfig(max_vms=5)
        result = oracle_enumerate(example1.vnfs, example1.vm_specs()[:5], example1.requests()[:1], settings)
        assert result.feasible


class TestOracle:
    def test_single_service_matches_flexshare(self, example2, settings):
        scenario = example2.model_copy(update={"services": example2.services[:1]})
        oracle = oracle_enumerate(scenario.vnfs, scenario.vm_specs(), scenario.requests(), settings)
        report = run_strategy(scenario, Strategy.PER_VNF_FLEXSHARE, settings)
        assert oracle.feasible
        assert oracle.instances_per_vnf() == {"v1": 1}
        FlexShareAssertions.assert_close(oracle.cost, report.metrics.total_cost, rel=1e-6)

    def test_lifecycle_fixture_optimum(self, example2, settings):
        oracle = oracle_enumerate(example2.vnfs, example2.vm_specs(), example2.requests(), settings)
        report = run_strategy(example2, Strategy.PER_VNF_FLEXSHARE, settings)
        assert oracle.feasible
        assert oracle.cost <= report.metrics.total_cost * (1 + 1e-9)
        FlexShareAssertions.assert_targets_met(oracle.deployment)
        FlexShareAssertions.assert_consistent(oracle.deployment)

    def test_oracle_never_loses(self, settings):
        rng = np.random.default_rng(42)
        for index in range(8):
            scenario = _random_instance(rng, index)
            report = run_strategy(scenario, Strategy.PER_VNF_FLEXSHARE, settings)
            if not report.feasible:
                continue
            oracle = oracle_enumerate(scenario.vnfs, scenario.vm_specs(), scenario.requests(), settings)
            assert oracle.feasible, scenario.name
            assert oracle.cost <= report.metrics.total_cost * (1 + 1e-6), scenario.name

    def test_infeasible_instance(self, settings):
        vnfs = [VnfSpec(id="v", load=1.0)]
        vms = [VmSpec(id="m1", max_capability=2.0, fixed_cost=1.0, prop_cost=1.0)]
        services = [ServiceSpec(id="s", rates={"v": 1.0}, max_delay=0.5)]
        result = oracle_enumerate(vnfs, vms, services, settings)
        assert not result.feasible
        assert result.instances_per_vnf() == {}


@pytest.mark.slow
class TestCompetitiveBoundAgainstOracle:
    def test_random_uniform_instances(self, settings):
        rng = np.random.default_rng(2024)
        checked = 0
        for index in range(50):
            scenario = _random_instance(rng, index, vm_count=4)
            report = run_strategy(scenario, Strategy.PER_VNF_FLEXSHARE, settings)
            if not report.feasible:
                continue
            oracle = oracle_enumerate(scenario.vnfs, scenario.vm_specs(), scenario.requests(), settings)
            for row in competitive_report(report.deployment, oracle.instances_per_vnf()):
                assert row.within_bound in (True, None), f"{scenario.name}: {row}"
                assert row.load_bound_holds in (True, None), f"{scenario.name}: {row}"
            checked += 1
        assert checked > 0
