import sys
from pathlib import Path

import pytest

PYTHON = sys.executable

# the auditor's frozen wire fixture, consumed as a format artifact
GOLDEN_PATH = Path(__file__).resolve().parents[2] / "tests" / "data" / "golden_frames.txt"


@pytest.fixture()
def golden_frames():
    lines = GOLDEN_PATH.read_text().splitlines()
    assert len(lines) % 2 == 0
    return [(lines[i], lines[i + 1]) for i in range(0, len(lines), 2)]
