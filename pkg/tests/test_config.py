import orjson
import pytest

from flexshare.config import AnalysisConfig, EngineConfig, FlexShareSettings, SolverConfig
from flexshare.errors import ConfigurationError
from flexshare.utils.config_manager import ConfigManager


def _write_config(path, section):
    path.write_bytes(orjson.dumps({"flexshare": section}))
    return path


class TestDefaults:
    def test_settings(self):
        settings = FlexShareSettings.load(ConfigManager(use_dotenv=False))
        assert settings == FlexShareSettings()
        assert settings.engine.lambda_share == "services"
        assert settings.engine.share_offset == 0.0
        assert settings.solver.retry_growths == (20.0, 8.0, 4.0)
        assert settings.analysis.max_vms == 4

    def test_competitors_mode(self, competitors_settings):
        assert competitors_settings.engine.share_offset == 1.0
        assert EngineConfig(lambda_share="Competitors").lambda_share == "competitors"

    def test_workers_floor(self):
        assert EngineConfig(workers=0).workers == 1


class TestValidation:
    @pytest.mark.parametrize(
        "factory, key",
        [
            (lambda: EngineConfig(lambda_share="everyone"), "engine.lambda_share"),
            (lambda: EngineConfig(epsilon=-1.0), "engine.epsilon"),
            (lambda: EngineConfig(jitter=0.0), "engine.jitter"),
            (lambda: EngineConfig(repair_order_cap=0), "engine.repair_order_cap"),
            (lambda: SolverConfig(barrier_growth=1.0), "solver.barrier_growth"),
            (lambda: SolverConfig(gap_tolerance=0.0), "solver.gap_tolerance"),
            (lambda: SolverConfig(retry_growths=(20.0, 0.5)), "solver.retry_growths"),
            (lambda: SolverConfig(armijo_alpha=0.5), "solver.armijo_alpha"),
            (lambda: AnalysisConfig(max_services=0), "analysis.max_services"),
        ],
    )
    def test_invalid_values_name_their_key(self, factory, key):
        with pytest.raises(ConfigurationError) as info:
            factory()
        assert info.value.config_key == key
        assert f"Configuration error for '{key}'" in str(info.value)

    def test_empty_retry_growths_fall_back(self):
        assert SolverConfig(barrier_growth=6.0, retry_growths=()).retry_growths == (6.0,)


class TestSources:
    def test_config_file_section(self, tmp_path):
        path = _write_config(
            tmp_path / "settings.json",
            {"engine": {"jitter": 0.5, "lambda_share": "competitors"}, "solver": {"retry_growths": [10.0, 5.0]}},
        )
        settings = FlexShareSettings.load(ConfigManager(config_path=path, use_dotenv=False))
        assert settings.engine.jitter == 0.5
        assert settings.engine.share_offset == 1.0
        assert settings.solver.retry_growths == (10.0, 5.0)
        assert settings.analysis == AnalysisConfig()

    def test_config_json_in_working_directory(self, tmp_path):
        _write_config(tmp_path / "config.json", {"analysis": {"max_vms": 5}})
        assert FlexShareSettings.load(ConfigManager(use_dotenv=False)).analysis.max_vms == 5

    def test_config_path_variable(self, tmp_path, monkeypatch):
        path = _write_config(tmp_path / "elsewhere.json", {"engine": {"repair_orders": False}})
        monkeypatch.setenv("FLEXSHARE_CONFIG", str(path))
        assert FlexShareSettings.load(ConfigManager(use_dotenv=False)).engine.repair_orders is False

    def test_environment_overrides_file(self, tmp_path, monkeypatch):
        path = _write_config(tmp_path / "settings.json", {"engine": {"lambda_share": "services", "jitter": 0.5}})
        monkeypatch.setenv("FLEXSHARE_ENGINE_LAMBDA_SHARE", "competitors")
        monkeypatch.setenv("FLEXSHARE_ENGINE_MERGE_BEFORE_DEPLOY", "off")
        monkeypatch.setenv("FLEXSHARE_SOLVER_RETRY_GROWTHS", "12, 6")
        monkeypatch.setenv("FLEXSHARE_ANALYSIS_MAX_SERVICES", "2")
        settings = FlexShareSettings.load(ConfigManager(config_path=path, use_dotenv=False))
        assert settings.engine.share_offset == 1.0
        assert settings.engine.jitter == 0.5
        assert settings.engine.merge_before_deploy is False
        assert settings.solver.retry_growths == (12.0, 6.0)
        assert settings.analysis.max_services == 2

    @pytest.mark.parametrize(
        "variable, value",
        [
            ("FLEXSHARE_ENGINE_WORKERS", "many"),
            ("FLEXSHARE_ENGINE_REPAIR_ORDERS", "maybe"),
            ("FLEXSHARE_SOLVER_BARRIER_GROWTH", "fast"),
        ],
    )
    def test_unparseable_environment_value(self, monkeypatch, variable, value):
        monkeypatch.setenv(variable, value)
        with pytest.raises(ConfigurationError, match=f"cannot parse '{value}'"):
            FlexShareSettings.load(ConfigManager(use_dotenv=False))

    def test_invalid_file_value_is_validated(self, tmp_path):
        path = _write_config(tmp_path / "settings.json", {"engine": {"lambda_share": "nobody"}})
        with pytest.raises(ConfigurationError, match="engine.lambda_share"):
            FlexShareSettings.load(ConfigManager(config_path=path, use_dotenv=False))

    def test_env_key(self):
        assert ConfigManager.env_key("solver.barrier_growth") == "FLEXSHARE_SOLVER_BARRIER_GROWTH"
