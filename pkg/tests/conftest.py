from __future__ import annotations

import json
from pathlib import Path

import pytest

from staffplan.config import EngineConfig, load_config
from staffplan.registry import load_dataset

FIXTURES = Path(__file__).parent / "fixtures"


@pytest.fixture(scope="session")
def sample_manifest() -> Path:
    return FIXTURES / "sample" / "manifest.json"


@pytest.fixture(scope="session")
def sample_config_path() -> Path:
    return FIXTURES / "sample" / "config.json"


@pytest.fixture()
def sample_dataset(sample_manifest):
    return load_dataset(sample_manifest)


@pytest.fixture()
def sample_config(sample_config_path) -> EngineConfig:
    return load_config(sample_config_path)


@pytest.fixture(scope="session")
def minimal_manifest() -> Path:
    return FIXTURES / "minimal" / "manifest.json"


@pytest.fixture(scope="session")
def replay_fixture() -> dict:
    with open(FIXTURES / "replay" / "workloads.json", encoding="utf-8") as fh:
        return json.load(fh)
