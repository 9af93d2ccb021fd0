import sys
from pathlib import Path

import pytest

DATA_DIR = Path(__file__).parent / "data"

# The loopback server is spawned as "python3 -m memaudit.serve"; pin the
# interpreter running the tests so venv setups resolve the same package.
PYTHON = sys.executable


@pytest.fixture
def data_dir():
    return DATA_DIR


@pytest.fixture
def golden_frames():
    """Frozen adapter session transcript: (request, response) line pairs."""
    lines = (DATA_DIR / "golden_frames.txt").read_text().splitlines()
    assert len(lines) % 2 == 0
    return list(zip(lines[0::2], lines[1::2]))
