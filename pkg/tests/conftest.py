"""Shared fixtures; puts src/ on sys.path the way main.py does"""

import sys
from pathlib import Path

import pytest
from hypothesis import HealthCheck, settings

src_path = Path(__file__).parent.parent / "src"
sys.path.insert(0, str(src_path))

from core.bits import BitString, KeyStore  # noqa: E402
from protocol.network import ProtocolInstance  # noqa: E402

GOLDEN_DIR = Path(__file__).parent / "golden"

# k0B=0 k1B=1 k0C=1 k1C=0, every element forwarded
GOLDEN_KEYS = "0,1,1,0"
GOLDEN_MASKS = "1,1,1,1"

settings.register_profile("p2sim", deadline=None,
                          suppress_health_check=[HealthCheck.function_scoped_fixture])
settings.load_profile("p2sim")


def build_instance(keys: str, masks: str, message: int) -> ProtocolInstance:
    n0b, n1b, n0c, n1c = (BitString.parse(part) for part in masks.split(","))
    return ProtocolInstance(KeyStore.parse(keys), (n0b, n1b), (n0c, n1c), message)


@pytest.fixture
def golden_instance() -> ProtocolInstance:
    return build_instance(GOLDEN_KEYS, GOLDEN_MASKS, 0)


@pytest.fixture
def make_instance():
    return build_instance


@pytest.fixture
def golden_dir() -> Path:
    return GOLDEN_DIR


@pytest.fixture(autouse=True)
def isolated_settings(monkeypatch, tmp_path):
    """Keep a developer's .env and P2SIM_* variables out of the tests"""
    monkeypatch.delenv("P2SIM_CONFIG", raising=False)
    monkeypatch.delenv("P2SIM_LOG_LEVEL", raising=False)
    monkeypatch.chdir(tmp_path)
