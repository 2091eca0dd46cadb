import sys
from pathlib import Path

import pytest

# make the sibling brute-force helpers importable from every test module
sys.path.insert(0, str(Path(__file__).resolve().parent))

FIXTURE_DIR = Path(__file__).resolve().parent.parent / "fixtures"


@pytest.fixture(scope="session")
def fixture_dir() -> Path:
    return FIXTURE_DIR
