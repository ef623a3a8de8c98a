import os
from pathlib import Path

import pytest
from hypothesis import HealthCheck, settings

settings.register_profile("default", deadline=None, suppress_health_check=[HealthCheck.too_slow])
settings.load_profile("default")

DATA_DIR = Path(os.environ.get("PRIVGRAPH_DATA_DIR", Path(__file__).resolve().parents[1] / "data"))

_criteria: dict[str, tuple[int, str]] = {}
_outcomes: dict[str, str] = {}


def pytest_configure(config):
    config.addinivalue_line("markers", "criterion(number, title): acceptance criterion this test decides")


def pytest_collection_modifyitems(items):
    for item in items:
        mark = item.get_closest_marker("criterion")
        if mark is not None:
            _criteria[item.nodeid] = (mark.args[0], mark.args[1])


def pytest_runtest_logreport(report):
    if report.nodeid not in _criteria:
        return
    if report.failed:
        _outcomes[report.nodeid] = "FAIL"
    elif report.skipped:
        _outcomes.setdefault(report.nodeid, "SKIP")
    elif report.when == "call":
        _outcomes.setdefault(report.nodeid, "PASS")


def pytest_terminal_summary(terminalreporter):
    if not _criteria:
        return
    terminalreporter.section("acceptance criteria")
    for nodeid, (number, title) in sorted(_criteria.items(), key=lambda kv: kv[1][0]):
        outcome = _outcomes.get(nodeid, "NOT RUN")
        terminalreporter.write_line(f"criterion {number:>2} {outcome:<7} {title}")


def dataset_path(name: str) -> Path:
    return DATA_DIR / f"{name}.txt"


@pytest.fixture
def rng():
    import numpy as np

    return np.random.default_rng(12345)
