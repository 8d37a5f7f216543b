import sys
from pathlib import Path

import pytest

sys.path.insert(0, str(Path(__file__).parent))

from riskgrid.kb import load_seeded_kb
from riskgrid.parser import parse_rulebase

REPO_ROOT = Path(__file__).resolve().parent.parent
DEMO_DIR = REPO_ROOT / "demo"
DATA_DIR = Path(__file__).resolve().parent / "data"


@pytest.fixture(scope="session")
def seed_kb():
    return load_seeded_kb()


@pytest.fixture(scope="session")
def seed_rulebase(seed_kb):
    return seed_kb.rulebase


@pytest.fixture(scope="session")
def two_site_rulebase():
    return parse_rulebase((DEMO_DIR / "two_site.rules").read_text("utf-8"))


@pytest.fixture()
def demo_dir():
    return DEMO_DIR


@pytest.fixture()
def data_dir():
    return DATA_DIR
