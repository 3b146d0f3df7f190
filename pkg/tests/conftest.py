import sys
from pathlib import Path

import numpy as np
import pytest

sys.path.insert(0, str(Path(__file__).parent))

DATA = Path(__file__).parent / "data"
_acceptance: dict[str, list] = {}  # cid -> [text, all passed so far]


def pytest_configure(config):
    config.addinivalue_line("markers", "acceptance(cid, text): exit criterion id and summary")


@pytest.fixture
def rng():
    return np.random.default_rng(12345)


@pytest.fixture
def data_dir():
    return DATA


@pytest.hookimpl(hookwrapper=True)
def pytest_runtest_makereport(item, call):
    outcome = yield
    rep = outcome.get_result()
    marker = item.get_closest_marker("acceptance")
    if marker and (rep.when == "call" or rep.failed):
        cid, text = marker.args
        entry = _acceptance.setdefault(cid, [text, True])
        entry[1] = entry[1] and rep.passed


def pytest_terminal_summary(terminalreporter):
    if not _acceptance:
        return
    terminalreporter.section("acceptance criteria")
    for cid in sorted(_acceptance, key=lambda c: int(c.lstrip("AC"))):
        text, ok = _acceptance[cid]
        terminalreporter.write_line(f"{cid:<5} {'PASS' if ok else 'FAIL'}  {text}")
