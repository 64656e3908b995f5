import json
import sys
from pathlib import Path

import pytest

TESTS = Path(__file__).resolve().parent
sys.path.insert(0, str(TESTS))

FIXTURE = TESTS / "fixtures"
GOLDEN = TESTS / "golden"
DATA = TESTS.parent / "src" / "fashion_trends" / "data"


@pytest.fixture(scope="session")
def golden():
    return json.loads((GOLDEN / "fixture_golden.json").read_text())


@pytest.fixture(scope="session")
def bundle(tmp_path_factory):
    """One full pipeline run over the committed fixture, shared by read-only tests."""
    from fashion_trends.pipeline import RunConfig, run_pipeline

    out = tmp_path_factory.mktemp("bundle")
    run_pipeline(RunConfig(input=str(FIXTURE / "texts.csv"), t4sa=str(FIXTURE / "t4sa.csv"),
                           seed=42, out=str(out), jobs=1))
    return out


def pytest_terminal_summary(terminalreporter):
    module = sys.modules.get("test_acceptance")
    results = getattr(module, "RESULTS", None)
    if results:
        terminalreporter.section("acceptance criteria")
        for line in results:
            terminalreporter.write_line(line)
