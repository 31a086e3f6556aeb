import numpy as np
import pytest

from optoamp.model import SystemParams
from optoamp.presets import resolved, resolved_lossy, unresolved, unresolved_lossy


@pytest.fixture
def p_resolved():
    return resolved()


@pytest.fixture
def p_resolved_lossy():
    return resolved_lossy()


@pytest.fixture
def p_unresolved():
    return unresolved()


@pytest.fixture
def p_unresolved_lossy():
    return unresolved_lossy()


@pytest.fixture
def p_passive():
    """G = 0 with a lossless auxiliary cavity."""
    return SystemParams(1.0, -1.0, 1.0, 0.0, 0.1, 0.0, 0.1)


@pytest.fixture
def p_decoupled():
    return SystemParams(1.0, -1.0, 0.0, 0.0, 0.1, 0.0, 0.1)


@pytest.fixture
def rng():
    return np.random.default_rng(20240611)


# --- acceptance reporting ---------------------------------------------------

_criteria: dict[int, dict] = {}


@pytest.hookimpl(hookwrapper=True)
def pytest_runtest_makereport(item, call):
    outcome = yield
    rep = outcome.get_result()
    marker = item.get_closest_marker("acceptance")
    if marker is None or (rep.when != "call" and rep.passed):
        return
    number = marker.kwargs["criterion"]
    entry = _criteria.setdefault(number, {"label": marker.kwargs["label"], "failed": [], "ran": 0})
    if rep.when == "call":
        entry["ran"] += 1
    if rep.failed:
        entry["failed"].append(item.callspec.id if hasattr(item, "callspec") else item.name)


def pytest_terminal_summary(terminalreporter):
    if not _criteria:
        return
    terminalreporter.section("acceptance criteria")
    for number in sorted(_criteria):
        entry = _criteria[number]
        status = "FAIL" if entry["failed"] or not entry["ran"] else "PASS"
        line = f"{status}  criterion {number:>2}: {entry['label']}"
        if entry["failed"]:
            line += f"  [failed: {', '.join(entry['failed'])}]"
        terminalreporter.write_line(line)
