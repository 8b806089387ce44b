import sys
from pathlib import Path

import pytest

sys.path.insert(0, str(Path(__file__).parent))

from affectlens.affect_lexicon import load_lexicon
from affectlens.text_normalizer import load_tables

GOLDEN = Path(__file__).parent / "golden"
DEMO = Path(__file__).resolve().parent.parent / "demo"


@pytest.fixture(scope="session")
def tables():
    return load_tables()


@pytest.fixture(scope="session")
def lexicon():
    return load_lexicon()


# criterion number -> (status, title, seconds), filled by test_acceptance
ACCEPTANCE: dict[int, tuple[str, str, float]] = {}


def pytest_terminal_summary(terminalreporter):
    if not ACCEPTANCE:
        return
    terminalreporter.section("acceptance criteria")
    for n in sorted(ACCEPTANCE):
        status, title, secs = ACCEPTANCE[n]
        terminalreporter.write_line(f"criterion {n}: {status:4s} {title} ({secs:.1f} s)")
