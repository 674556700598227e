import os
import sys
from pathlib import Path

import pytest

sys.path.insert(0, str(Path(__file__).resolve().parent))

from flexshare.config import EngineConfig, FlexShareSettings
from flexshare.model import ServiceSpec
from flexshare.scenario import bundled_scenario

from builders import build_deployment


@pytest.fixture(autouse=True)
def _isolated_config(monkeypatch, tmp_path):
    """Keep local config.json and FLEXSHARE_* variables out of the tests."""
    for key in list(os.environ):
        if key.startswith("FLEXSHARE_"):
            monkeypatch.delenv(key, raising=False)
    monkeypatch.chdir(tmp_path)


@pytest.fixture
def settings():
    return FlexShareSettings()


@pytest.fixture
def competitors_settings():
    return FlexShareSettings(engine=EngineConfig(lambda_share="competitors"))


@pytest.fixture
def example1():
    return bundled_scenario("example1")


@pytest.fixture
def example2():
    return bundled_scenario("example2")


@pytest.fixture
def synthetic():
    return bundled_scenario("synthetic")


@pytest.fixture
def shared_example1():
    """Both surveillance services placed with the common VNFs shared, capabilities at their maxima."""
    services = [
        ServiceSpec(id="s1", rates={"tc": 2.0, "md": 2.0, "fr": 2.0}, max_delay=1.1),
        ServiceSpec(id="s2", rates={"tc": 1.0, "md": 1.0}, max_delay=1.1),
    ]
    deployment = build_deployment(
        {"tc": 1.0, "md": 1.0, "fr": 1.0},
        {"m1": 9.15, "m2": 5.0, "m3": 5.0},
        services,
        {
            ("s1", "fr"): "m1",
            ("s1", "md"): "m2",
            ("s1", "tc"): "m3",
            ("s2", "md"): "m2",
            ("s2", "tc"): "m3",
        },
    )
    deployment.capability.update({"m1": 9.15, "m2": 5.0, "m3": 5.0})
    return deployment
