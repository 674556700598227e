import pytest

from flexshare.errors import ScenarioError
from flexshare.model import PriorityScheme
from flexshare.scenario import (
    BUNDLED_SCENARIOS,
    VmGenerator,
    bundled_scenario,
    load_scenario,
    parse_scenario,
    resolve_scenario,
)

HEADER = """name = "bad"

[[vnfs]]
id = "a"
load = 1.0
"""

ONE_VM = """
[[vms]]
id = "m1"
max_capability = 5.0
"""


def _scenario(services: str, vms: str = ONE_VM, extra: str = "") -> str:
    return HEADER + extra + services + vms


class TestBundledScenarios:
    @pytest.mark.parametrize("name", BUNDLED_SCENARIOS)
    def test_all_load(self, name):
        scenario = bundled_scenario(name)
        assert scenario.name == name
        assert scenario.vm_specs()

    def test_example1(self, example1):
        assert [v.id for v in example1.vnfs] == ["tc", "md", "fr"]
        s1, s2 = example1.requests()
        assert s1.rates == {"tc": 2.0, "md": 2.0, "fr": 2.0}
        assert s2.max_delay == pytest.approx(1.1)
        assert [m.id for m in example1.vm_specs()] == ["m1", "m2", "m3", "m4", "m5"]
        assert not example1.seeded

    def test_example2(self, example2):
        assert [s.id for s in example2.requests()] == ["s1", "s2", "s3"]
        assert {m.max_capability for m in example2.vm_specs()} == {5.0}

    def test_synthetic_generator(self, synthetic):
        assert synthetic.seeded
        vms = synthetic.vm_specs()
        assert [m.id for m in vms] == [f"m{i:02d}" for i in range(1, 11)]
        assert all(5.0 <= m.max_capability <= 10.0 for m in vms)
        assert {(m.fixed_cost, m.prop_cost) for m in vms} == {(8.0, 0.5)}

    def test_realistic_has_uniform_capability(self):
        vms = bundled_scenario("realistic").vm_specs()
        assert len(vms) == 20
        assert {m.max_capability for m in vms} == {1000.0}

    def test_unknown_bundled_name(self):
        with pytest.raises(ScenarioError, match="unknown bundled scenario 'nope'"):
            bundled_scenario("nope")


class TestVmGenerator:
    def test_seeded_draws_repeat(self):
        generator = VmGenerator(count=5, capability_range=(2.0, 4.0), seed=11)
        assert generator.generate() == generator.generate()
        assert generator.generate(12) != generator.generate()
        assert generator.generate(11) == generator.generate()

    def test_capabilities_are_rounded(self):
        for vm in VmGenerator(count=20, capability_range=(1.0, 2.0), seed=0).generate():
            assert round(vm.max_capability, 6) == vm.max_capability

    def test_prefix_and_padding(self):
        ids = [m.id for m in VmGenerator(count=100, capability_range=(1.0, 1.0), seed=0, prefix="vm").generate()]
        assert ids[0] == "vm001"
        assert ids[-1] == "vm100"

    @pytest.mark.parametrize("bounds", [(0.0, 1.0), (3.0, 2.0), (-1.0, 1.0)])
    def test_invalid_range(self, bounds):
        with pytest.raises(ValueError, match="capability_range"):
            VmGenerator(count=1, capability_range=bounds, seed=0)


class TestParseScenario:
    def test_defaults(self):
        scenario = parse_scenario(_scenario('\n[[services]]\nid = "s"\nmax_delay = 1.0\nrates = { a = 1.0 }\n'))
        assert scenario.multiplier == 1.0
        assert scenario.priority_model.scheme is PriorityScheme.PER_VNF
        assert scenario.request_order is None

    def test_priority_model_section(self):
        text = _scenario(
            '\n[[services]]\nid = "s"\nmax_delay = 1.0\nrates = { a = 1.0 }\n',
            extra='\n[priority_model]\nscheme = "per_flow"\njitter = 0.5\n',
        )
        model = parse_scenario(text).priority_model
        assert model.scheme is PriorityScheme.PER_FLOW
        assert model.jitter == 0.5

    def test_request_order_and_multiplier(self):
        services = (
            '\n[[services]]\nid = "s1"\nmax_delay = 1.0\nrates = { a = 1.0 }\n'
            '\n[[services]]\nid = "s2"\nmax_delay = 1.0\nrates = { a = 2.0 }\n'
        )
        text = 'request_order = ["s2", "s1"]\nmultiplier = 1.5\n' + _scenario(services)
        scenario = parse_scenario(text)
        requests = scenario.requests()
        assert [s.id for s in requests] == ["s2", "s1"]
        assert requests[0].rates == {"a": pytest.approx(3.0)}
        assert scenario.requests(2.0)[1].rates == {"a": pytest.approx(2.0)}

    def test_non_positive_multiplier(self, example2):
        with pytest.raises(ScenarioError, match="must be positive"):
            example2.requests(0.0)

    def test_dangling_vnf_reference(self):
        text = _scenario('\n[[services]]\nid = "s"\nmax_delay = 1.0\nrates = { b = 1.0 }\n')
        with pytest.raises(ScenarioError, match=r"undeclared VNFs \['b'\]") as info:
            parse_scenario(text)
        assert info.value.field == "services"
        assert info.value.line == 7

    def test_error_names_nested_field_and_line(self):
        text = HEADER.replace("load = 1.0", "load = -1.0") + (
            '\n[[services]]\nid = "s"\nmax_delay = 1.0\nrates = { a = 1.0 }\n' + ONE_VM
        )
        with pytest.raises(ScenarioError) as info:
            parse_scenario(text)
        assert info.value.field == "vnfs.0.load"
        assert info.value.line == 5
        assert "'vnfs.0.load' (line 5)" in str(info.value)

    def test_second_service_is_located(self):
        services = (
            '\n[[services]]\nid = "s1"\nmax_delay = 1.0\nrates = { a = 1.0 }\n'
            '\n[[services]]\nid = "s2"\nmax_delay = -1.0\nrates = { a = 1.0 }\n'
        )
        with pytest.raises(ScenarioError) as info:
            parse_scenario(_scenario(services))
        assert info.value.field == "services.1.max_delay"
        assert info.value.line == 14

    def test_services_required(self):
        with pytest.raises(ScenarioError) as info:
            parse_scenario(HEADER + ONE_VM)
        assert info.value.field == "services"

    def test_duplicate_service(self):
        service = '\n[[services]]\nid = "s"\nmax_delay = 1.0\nrates = { a = 1.0 }\n'
        with pytest.raises(ScenarioError, match="duplicate service id 's'"):
            parse_scenario(_scenario(service + service))

    def test_vm_sources_are_exclusive(self):
        generator = "\n[vm_generator]\ncount = 2\ncapability_range = [1.0, 2.0]\nseed = 1\n"
        service = '\n[[services]]\nid = "s"\nmax_delay = 1.0\nrates = { a = 1.0 }\n'
        with pytest.raises(ScenarioError, match="exactly one of 'vms' and 'vm_generator'"):
            parse_scenario(_scenario(service, vms=ONE_VM + generator))
        with pytest.raises(ScenarioError, match="exactly one of 'vms' and 'vm_generator'"):
            parse_scenario(_scenario(service, vms=""))

    def test_request_order_errors(self):
        service = '\n[[services]]\nid = "s"\nmax_delay = 1.0\nrates = { a = 1.0 }\n'
        with pytest.raises(ScenarioError, match=r"unknown services \['t'\]"):
            parse_scenario('request_order = ["s", "t"]\n' + _scenario(service))
        with pytest.raises(ScenarioError, match="duplicate request id 's'"):
            parse_scenario('request_order = ["s", "s"]\n' + _scenario(service))

    def test_invalid_toml_reports_line(self):
        with pytest.raises(ScenarioError, match="invalid TOML in broken.toml") as info:
            parse_scenario('name = "x"\nbroken line\n', "broken.toml")
        assert info.value.line == 2


class TestLoading:
    def test_load_and_resolve_path(self, tmp_path):
        path = tmp_path / "mine.toml"
        path.write_text(_scenario('\n[[services]]\nid = "s"\nmax_delay = 1.0\nrates = { a = 1.0 }\n'))
        assert load_scenario(path).name == "bad"
        assert resolve_scenario(str(path)).services[0].id == "s"

    def test_resolve_bundled_name(self):
        assert resolve_scenario("example2").name == "example2"

    def test_missing_file(self, tmp_path):
        with pytest.raises(ScenarioError, match="scenario file not found"):
            resolve_scenario(str(tmp_path / "absent.toml"))

    def test_deployment_uses_scenario_model(self, example1):
        deployment = example1.deployment()
        assert deployment.priority_model.scheme is PriorityScheme.PER_VNF
        assert set(deployment.vms) == {"m1", "m2", "m3", "m4", "m5"}
        assert deployment.hosted == {}
