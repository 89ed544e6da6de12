from __future__ import annotations

import sys
from pathlib import Path

import pytest

sys.path.insert(0, str(Path(__file__).parent))

from vlcomplexity import ScaleConfig
from vlcomplexity.fixtures import (
    empty_corridor,
    l_corridor,
    new_wing_analog,
    old_wing_analog,
    zigzag,
)

FIXTURES_DIR = Path(__file__).parent.parent / "fixtures"


@pytest.fixture(scope="session")
def config() -> ScaleConfig:
    return ScaleConfig()


@pytest.fixture(scope="session")
def empty_doc():
    return empty_corridor()


@pytest.fixture(scope="session")
def l_doc():
    return l_corridor()


@pytest.fixture(scope="session")
def zigzag_doc():
    return zigzag()


@pytest.fixture(scope="session")
def old_doc():
    return old_wing_analog()


@pytest.fixture(scope="session")
def new_doc():
    return new_wing_analog()


def nav_of(doc, config: ScaleConfig):
    return doc.nav_path("main", config.turn_threshold_deg)
