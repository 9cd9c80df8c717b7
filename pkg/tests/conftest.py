from __future__ import annotations

import numpy as np
import pytest

from fixtures import DS_DESK, representative_models


@pytest.fixture(scope="session")
def models():
    return representative_models()


@pytest.fixture
def ds_desk():
    return DS_DESK


@pytest.fixture
def rng():
    return np.random.default_rng(12345)


def pytest_configure(config):
    config.acceptance_lines = []


@pytest.fixture
def verdict(request):
    """Print and record one PASS/FAIL line, then assert it."""

    def check(name: str, passed: bool, detail: str) -> None:
        line = f"{name}: {'PASS' if passed else 'FAIL'} ({detail})"
        print(line)
        request.config.acceptance_lines.append(line)
        assert passed, line

    return check


def pytest_terminal_summary(terminalreporter, exitstatus, config):
    lines = getattr(config, "acceptance_lines", [])
    if lines:
        terminalreporter.section("acceptance criteria")
        for line in lines:
            terminalreporter.write_line(line)
